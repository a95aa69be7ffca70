"""Distribution spec files.

A spec file is a small TOML document (JSON is accepted for ``*.json``)::

    kind = "mrl_piecewise"
    declared_mean = 2.0

    [[segments]]
    from = 0.0
    to = 1.0
    kind = "affine"   # a + b*x ; "reciprocal" means a + b/x
    a = 2.0
    b = 1.0

or::

    kind = "builtin"
    name = "weibull"
    params = { shape = 2.0, scale = 1.0 }

``to = inf`` (or the string ``"inf"``) marks the unbounded last segment.
"""

from __future__ import annotations

import hashlib
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .distributions import (
    LifeDistribution,
    MRLSpec,
    MRLValidationError,
    Segment,
    catalog,
    from_mrl,
    mean_of,
    mrl_catalog,
)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["SpecError", "DistSpec", "load_spec", "parse_spec"]

MEAN_RTOL = 1e-6


class SpecError(ValueError):
    """Malformed spec file; ``where`` names the offending line or field."""

    def __init__(self, where: str, message: str, kind: str = "parse"):
        self.where = where
        self.kind = kind
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class DistSpec:
    kind: str
    source: str
    digest: str
    name: Optional[str] = None
    params: dict[str, float] = field(default_factory=dict)
    segments: Optional[MRLSpec] = None
    declared_mean: Optional[float] = None

    @property
    def mrl(self) -> Optional[MRLSpec]:
        """The piecewise MRL function, also for builtins that have one."""
        if self.segments is not None:
            return self.segments
        try:
            return mrl_catalog(self.name, **self.params)
        except (ValueError, TypeError):
            return None

    @property
    def label(self) -> str:
        if self.kind == "builtin":
            args = ", ".join(f"{k}={v:g}" for k, v in sorted(self.params.items()))
            return f"{self.name}({args}) (builtin)" if args else f"{self.name} (builtin)"
        return f"{len(self.segments.segments)}-segment MRL (mrl_piecewise)"


def _number(value: Any, where: str) -> float:
    if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpecError(where, f"expected a number, got {value!r}")
    return float(value)


def _decode(text: str, path: Path) -> dict:
    if path.suffix.lower() == ".json":
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"{path}:{exc.lineno}", exc.msg) from None
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise SpecError(str(path), str(exc)) from None


def load_spec(path: str | Path) -> DistSpec:
    """Read and check the structure of a spec file (no numerics)."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise SpecError(str(path), exc.strerror or str(exc)) from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise SpecError(str(path), "file is not valid UTF-8") from None
    doc = _decode(text, path)
    if not isinstance(doc, dict):
        raise SpecError(str(path), "top level must be a table/object")
    digest = hashlib.sha256(raw).hexdigest()

    kind = doc.get("kind")
    declared = doc.get("declared_mean")
    declared = None if declared is None else _number(declared, "declared_mean")

    if kind == "builtin":
        name = doc.get("name")
        if not isinstance(name, str):
            raise SpecError("name", "builtin spec needs a string 'name'")
        params = doc.get("params", {})
        if not isinstance(params, dict):
            raise SpecError("params", "expected a table of numbers")
        params = {str(k): _number(v, f"params.{k}") for k, v in params.items()}
        return DistSpec("builtin", str(path), digest, name=name, params=params, declared_mean=declared)

    if kind == "mrl_piecewise":
        items = doc.get("segments")
        if not isinstance(items, list) or not items:
            raise SpecError("segments", "expected a non-empty array of segment tables")
        segments = []
        for i, item in enumerate(items):
            where = f"segments[{i}]"
            if not isinstance(item, dict):
                raise SpecError(where, "expected a table with from, to, kind, a, b")
            missing = [k for k in ("from", "to", "kind", "a", "b") if k not in item]
            if missing:
                raise SpecError(where, f"missing field(s): {', '.join(missing)}")
            try:
                segments.append(Segment(
                    _number(item["from"], f"{where}.from"),
                    _number(item["to"], f"{where}.to"),
                    str(item["kind"]),
                    _number(item["a"], f"{where}.a"),
                    _number(item["b"], f"{where}.b"),
                ))
            except SpecError:
                raise
            except ValueError as exc:
                raise SpecError(where, str(exc)) from None
        try:
            mrl = MRLSpec(tuple(segments))
        except ValueError as exc:
            raise SpecError("segments", str(exc)) from None
        return DistSpec("mrl_piecewise", str(path), digest, segments=mrl, declared_mean=declared)

    raise SpecError("kind", f"expected 'builtin' or 'mrl_piecewise', got {kind!r}")


def to_distribution(spec: DistSpec) -> LifeDistribution:
    if spec.kind == "builtin":
        try:
            d = catalog(spec.name, **spec.params)
        except TypeError as exc:
            raise SpecError("params", str(exc)) from None
        except ValueError as exc:
            raise SpecError("name" if "unknown" in str(exc) else "params", str(exc)) from None
    else:
        try:
            d = from_mrl(spec.segments)
        except MRLValidationError as exc:
            raise SpecError("segments", str(exc), kind="validation") from None
        except ValueError as exc:
            raise SpecError("segments", str(exc), kind="validation") from None
    if spec.declared_mean is not None:
        computed = mean_of(d)
        if abs(computed - spec.declared_mean) > MEAN_RTOL * abs(computed):
            raise SpecError(
                "declared_mean",
                f"declared {spec.declared_mean:g} but the distribution has mean {computed:.9g}",
                kind="validation",
            )
    return d


def parse_spec(path: str | Path) -> LifeDistribution:
    """Load a spec file and build its distribution.

    Raises:
        SpecError: ``kind == "parse"`` for malformed files,
            ``kind == "validation"`` for invalid MRL functions or a wrong
            declared mean.
    """
    return to_distribution(load_spec(path))
