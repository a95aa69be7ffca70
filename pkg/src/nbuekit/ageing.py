"""MRL validity checks and ageing-class verdicts.

Classification works on a grid: the mean residual life ``e(x)`` is computed
at ``grid_n`` ages, ``e(x) - mean`` (or the increments of ``e``) is reduced
to a sign pattern, and each sign change is refined to a root of the exact
function. Near-zero values count as ties (the class definitions use weak
inequalities) and are absorbed into the neighbouring runs; on a plateau
where ``e`` equals the mean the leftmost root is reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .distributions import (
    HORIZON_SURVIVAL,
    LifeDistribution,
    MRLSpec,
    default_horizon,
    mrl_of,
    mrl_on_grid,
)
from .numerics import DEFAULT_ROOT_TOL, DEFAULT_SIGN_TOL, Bracket, SignPattern, find_root, sign_pattern

__all__ = [
    "AgeingClass",
    "MRLShape",
    "ClassVerdict",
    "MRLShapeVerdict",
    "Violation",
    "MRLValidityReport",
    "validate_mrl",
    "classify_crossing",
    "classify_mrl_shape",
    "resolve_idmrl",
    "DEFAULT_GRID_N",
]

DEFAULT_GRID_N = 4096
_VALIDITY_GRID = 65


class AgeingClass(str, Enum):
    EXPONENTIAL = "EXPONENTIAL"
    NBUE = "NBUE"
    NWUE = "NWUE"
    NWBUE = "NWBUE"
    NBWUE = "NBWUE"
    OTHER = "OTHER"


class MRLShape(str, Enum):
    INCREASING = "INCREASING"
    DECREASING = "DECREASING"
    IDMRL = "IDMRL"
    DIMRL = "DIMRL"
    CONSTANT = "CONSTANT"
    OTHER = "OTHER"


_CROSSING_LABELS = {
    "0": AgeingClass.EXPONENTIAL,
    "-": AgeingClass.NBUE,
    "+": AgeingClass.NWUE,
    "+-": AgeingClass.NWBUE,
    "-+": AgeingClass.NBWUE,
}
_SHAPE_LABELS = {
    "0": MRLShape.CONSTANT,
    "+": MRLShape.INCREASING,
    "-": MRLShape.DECREASING,
    "+-": MRLShape.IDMRL,
    "-+": MRLShape.DIMRL,
}


@dataclass(frozen=True)
class ClassVerdict:
    label: AgeingClass
    change_point: Optional[float]
    mu: float
    horizon: float
    crossings: tuple[float, ...] = ()
    pattern: str = ""
    grid: np.ndarray = field(default=None, repr=False, compare=False)
    values: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        has_point = self.change_point is not None
        if has_point != (self.label in (AgeingClass.NWBUE, AgeingClass.NBWUE)):
            raise ValueError(f"change point must be given exactly for NWBUE/NBWUE, got {self.label}")
        if list(self.crossings) != sorted(self.crossings):
            raise ValueError("crossings must be sorted")
        if has_point and self.change_point not in self.crossings:
            raise ValueError("change point must be one of the crossings")


@dataclass(frozen=True)
class MRLShapeVerdict:
    label: MRLShape
    turning_point: Optional[float] = None
    pattern: str = ""

    def __post_init__(self):
        if (self.turning_point is not None) != (self.label in (MRLShape.IDMRL, MRLShape.DIMRL)):
            raise ValueError(f"turning point must be given exactly for IDMRL/DIMRL, got {self.label}")


@dataclass(frozen=True)
class Violation:
    condition: str
    location: str
    detail: str


@dataclass(frozen=True)
class MRLValidityReport:
    violations: tuple[Violation, ...] = ()

    @property
    def valid(self) -> bool:
        return not self.violations

    def conditions(self) -> set[str]:
        return {v.condition for v in self.violations}


def _where(seg) -> str:
    return f"[{seg.start:g}, {seg.end:g}]"


def validate_mrl(spec: MRLSpec, tol: float = 1e-9) -> MRLValidityReport:
    """Check the necessary conditions for ``spec`` to be an MRL function.

    V1  e > 0 on the interior of the support.
    V2  x + e(x) is nondecreasing, i.e. e' >= -1 (otherwise the implied
        survival function increases somewhere).
    V3  e is continuous at the knots.
    V4  integral of 1/e diverges: the last segment is nondecreasing affine,
        reciprocal with a >= 0, or ends where e reaches 0.
    """
    found: list[Violation] = []
    segs = spec.segments
    last = segs[-1]

    for seg in segs:
        hi = seg.end if math.isfinite(seg.end) else max(2 * seg.start, seg.start + 1) * 1e3
        xs = np.linspace(seg.start, hi, _VALIDITY_GRID)
        terminal = seg is last and math.isfinite(seg.end)
        interior = xs[:-1] if terminal else xs
        values = seg(interior)
        if seg.kind == "affine" and seg.b < 0 and not math.isfinite(seg.end):
            found.append(Violation("V1", _where(seg), f"e reaches 0 at x={-seg.a / seg.b:g}"))
        elif seg.kind == "reciprocal" and seg.a < 0 and not math.isfinite(seg.end):
            found.append(Violation("V1", _where(seg), "e becomes negative for large x"))
        elif np.any(values <= 0):
            bad = interior[np.argmax(values <= 0)]
            found.append(Violation("V1", _where(seg), f"e = {float(seg(bad)):g} <= 0 at x={bad:g}"))

        slopes = seg.slope(xs[:-1] if terminal else xs)
        if np.any(slopes < -1 - tol):
            worst = float(np.min(slopes))
            found.append(Violation(
                "V2", _where(seg),
                f"slope {worst:g} < -1, so x + e(x) decreases and the survival function would increase",
            ))

    for left, right in zip(segs, segs[1:]):
        k = right.start
        l_val, r_val = float(left(k)), float(right(k))
        if abs(l_val - r_val) > tol * max(1.0, abs(l_val)):
            found.append(Violation("V3", f"x={k:g}", f"jump from {l_val:g} to {r_val:g}"))

    if math.isfinite(last.end):
        end_val = float(last(last.end))
        if abs(end_val) > tol * max(1.0, abs(float(last(last.start)))):
            found.append(Violation(
                "V4", f"x={last.end:g}", f"specification ends with e = {end_val:g} > 0; MRL undefined beyond",
            ))
    elif last.kind == "affine" and last.b < 0:
        found.append(Violation("V4", _where(last), "decreasing final segment never terminates at e = 0"))
    elif last.kind == "reciprocal" and last.a < 0:
        found.append(Violation("V4", _where(last), "integral of 1/e does not diverge with a < 0"))

    return MRLValidityReport(tuple(found))


def _horizon_for(d: LifeDistribution, horizon: Optional[float]) -> float:
    if horizon is None:
        return default_horizon(d)
    horizon = float(horizon)
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    # too-short horizons are extended until the survival is negligible
    while horizon < d.support_end and d.survival(horizon) >= HORIZON_SURVIVAL:
        horizon *= 2
    if horizon >= d.support_end:
        horizon = default_horizon(d)
    return horizon


def _refine_crossings(d: LifeDistribution, pattern: SignPattern, mu: float) -> list[float]:
    def gap(x):
        return mrl_of(d, x) - mu

    return [find_root(gap, bracket, DEFAULT_ROOT_TOL) for bracket in pattern.crossings]


def classify_crossing(
    d: LifeDistribution,
    horizon: Optional[float] = None,
    grid_n: int = DEFAULT_GRID_N,
    tol: float = DEFAULT_SIGN_TOL,
) -> ClassVerdict:
    """Ageing class from the sign pattern of ``e(x) - mean``.

    ``0`` -> EXPONENTIAL, ``-`` -> NBUE, ``+`` -> NWUE, ``+-`` -> NWBUE,
    ``-+`` -> NBWUE, anything else -> OTHER. The change point is the root of
    ``e(x) - mean`` in the transition bracket, not a grid point.
    """
    horizon = _horizon_for(d, horizon)
    xs = np.linspace(0.0, horizon, grid_n)
    gaps = mrl_on_grid(d, xs) - d.mean
    pattern = sign_pattern(xs, gaps, tol)
    label = _CROSSING_LABELS.get(pattern.signs, AgeingClass.OTHER)
    roots = sorted(_refine_crossings(d, pattern, d.mean))
    change_point = roots[0] if label in (AgeingClass.NWBUE, AgeingClass.NBWUE) else None
    return ClassVerdict(label, change_point, d.mean, horizon, tuple(roots), pattern.signs, xs, gaps)


def classify_mrl_shape(
    d: LifeDistribution,
    horizon: Optional[float] = None,
    grid_n: int = DEFAULT_GRID_N,
    tol: float = DEFAULT_SIGN_TOL,
) -> MRLShapeVerdict:
    """Monotonicity pattern of ``e`` from the signs of its grid increments.

    The turning point of an IDMRL/DIMRL verdict snaps to a knot of the
    distribution when one lies in the transition bracket; otherwise it is
    the extremum of ``e`` inside the bracket.
    """
    horizon = _horizon_for(d, horizon)
    xs = np.linspace(0.0, horizon, grid_n)
    e = mrl_on_grid(d, xs)
    mids = 0.5 * (xs[1:] + xs[:-1])
    pattern = sign_pattern(mids, np.diff(e), tol)
    label = _SHAPE_LABELS.get(pattern.signs, MRLShape.OTHER)
    if label not in (MRLShape.IDMRL, MRLShape.DIMRL):
        return MRLShapeVerdict(label, None, pattern.signs)

    step = xs[1] - xs[0]
    bracket = pattern.crossings[0]
    lo, hi = bracket.lo - step / 2, bracket.hi + step / 2
    near = [k for k in d.knots if lo - tol <= k <= hi + tol]
    if near:
        centre = 0.5 * (lo + hi)
        turning = min(near, key=lambda k: abs(k - centre))
    else:
        sign = -1.0 if label is MRLShape.IDMRL else 1.0
        res = minimize_scalar(lambda x: sign * mrl_of(d, x), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10})
        turning = float(res.x)
    return MRLShapeVerdict(label, turning, pattern.signs)


def resolve_idmrl(
    d: LifeDistribution,
    shape: MRLShapeVerdict,
    horizon: Optional[float] = None,
    grid_n: int = DEFAULT_GRID_N,
    tol: float = DEFAULT_SIGN_TOL,
) -> ClassVerdict:
    """Ageing class of an IDMRL (DIMRL) distribution from its turning point.

    Past the turning point ``e`` is monotone, so ``e - mean`` changes sign at
    most once. A root ``x*`` there makes the distribution NWBUE(x*)
    (NBWUE(x*)); without one it is NWUE (NBUE).

    Raises:
        ValueError: if ``shape`` is neither IDMRL nor DIMRL.
    """
    if shape.label not in (MRLShape.IDMRL, MRLShape.DIMRL):
        raise ValueError(f"resolve_idmrl needs an IDMRL or DIMRL shape, got {shape.label.value}")
    horizon = _horizon_for(d, horizon)
    tau = float(shape.turning_point)
    increasing_first = shape.label is MRLShape.IDMRL
    if tau >= horizon:
        label = AgeingClass.NWUE if increasing_first else AgeingClass.NBUE
        return ClassVerdict(label, None, d.mean, horizon)

    xs = np.linspace(tau, horizon, grid_n)
    gaps = mrl_on_grid(d, xs) - d.mean
    pattern = sign_pattern(xs, gaps, tol)
    wanted = "+-" if increasing_first else "-+"
    for run, nxt, bracket in zip(pattern.runs, pattern.runs[1:], pattern.crossings):
        if run.symbol + nxt.symbol == wanted:
            root = find_root(lambda x: mrl_of(d, x) - d.mean, bracket, DEFAULT_ROOT_TOL)
            label = AgeingClass.NWBUE if increasing_first else AgeingClass.NBWUE
            return ClassVerdict(label, root, d.mean, horizon, (root,), pattern.signs, xs, gaps)

    signs = set(pattern.signs)
    if increasing_first:
        # e(tau) >= mean; staying below afterwards only happens when tau is 0
        label = AgeingClass.NBUE if signs == {"-"} else AgeingClass.NWUE
    else:
        label = AgeingClass.NWUE if signs == {"+"} else AgeingClass.NBUE
    if signs == {"0"}:
        label = AgeingClass.EXPONENTIAL
    return ClassVerdict(label, None, d.mean, horizon, (), pattern.signs, xs, gaps)
