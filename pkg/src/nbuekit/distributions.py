"""Life distributions, mean residual life and moments.

A :class:`LifeDistribution` wraps a vectorised survival function together
with its mean, the knots where it is not smooth and a certified exponential
tail scale. Distributions come either from the closed-form catalog or from a
piecewise mean residual life function (:class:`MRLSpec`) through the
inversion

    S(x) = e(0) / e(x) * exp(-integral_0^x du / e(u)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from .numerics import (
    DEFAULT_QUAD_TOL,
    QuadResult,
    integrate,
    integrate_cells,
    integrate_power_weighted,
    integrate_semi_infinite,
)

__all__ = [
    "Segment",
    "MRLSpec",
    "FromSurvival",
    "FromMRL",
    "Builtin",
    "LifeDistribution",
    "EquilibriumDensity",
    "SupportExceededError",
    "MRLValidationError",
    "from_mrl",
    "mrl_of",
    "mrl_on_grid",
    "tail_integral",
    "moment",
    "mean_of",
    "default_horizon",
    "catalog",
    "mrl_catalog",
    "CATALOG_NAMES",
]

SEGMENT_KINDS = ("affine", "reciprocal")
SUPPORT_FLOOR = 1e-300
HORIZON_SURVIVAL = 1e-9


class SupportExceededError(ValueError):
    """The survival function has (numerically) vanished at the query age."""


class MRLValidationError(ValueError):
    """An MRL specification failed the validity conditions."""

    def __init__(self, report):
        self.report = report
        details = "; ".join(f"{v.condition} at {v.location}: {v.detail}" for v in report.violations)
        super().__init__(f"invalid MRL function: {details}")


_SERIES_CUTOFF = 1e-4


def _log1p_ratio(u):
    """``log1p(u)/u`` with its value 1 at ``u = 0``."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, u)
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = np.log1p(safe) / safe
    series = 1 - u / 2 + u**2 / 3 - u**3 / 4
    return np.where(small, series, exact)


def _log1p_defect(u):
    """``(u - log1p(u))/u**2`` with its value 1/2 at ``u = 0``."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, u)
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = (safe - np.log1p(safe)) / safe**2
    series = 0.5 - u / 3 + u**2 / 4 - u**3 / 5
    return np.where(small, series, exact)


@dataclass(frozen=True)
class Segment:
    """One analytic piece of an MRL function on ``[start, end)``.

    ``affine`` means ``a + b*x``; ``reciprocal`` means ``a + b/x``.
    """

    start: float
    end: float
    kind: str
    a: float
    b: float

    def __post_init__(self):
        if self.kind not in SEGMENT_KINDS:
            raise ValueError(f"unknown segment kind {self.kind!r}; expected one of {SEGMENT_KINDS}")
        if not self.start < self.end:
            raise ValueError(f"segment needs start < end, got [{self.start}, {self.end}]")
        if self.kind == "reciprocal" and self.start <= 0 and self.b != 0:
            raise ValueError("a reciprocal segment cannot start at x <= 0")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "affine":
            return self.a + self.b * x
        return self.a + self.b / x

    def slope(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "affine":
            return np.full_like(x, self.b)
        return -self.b / x**2

    def inverse_integral(self, x):
        """Closed form of ``integral_start^x du / e(u)`` for ``x`` in the segment.

        Written through ``log1p(u)/u`` and ``(u - log1p(u))/u**2`` so that the
        limits ``b -> 0`` (affine) and ``a -> 0`` (reciprocal) stay accurate.
        """
        x = np.asarray(x, dtype=float)
        s = self.start
        a, b = self.a, self.b
        dx = x - s
        if self.kind == "affine":
            e0 = a + b * s
            return dx / e0 * _log1p_ratio(b * dx / e0)
        # integral of u/(a*u + b) from s to x
        e0 = a * s + b
        w = a * dx / e0
        return s * dx / e0 + b * dx**2 / e0**2 * _log1p_defect(w)

    def to_dict(self) -> dict:
        return {"from": self.start, "to": self.end, "kind": self.kind, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class MRLSpec:
    """Piecewise mean residual life function on ``[0, inf)``.

    Segments must be contiguous and start at 0. The last segment may end at a
    finite age only where the MRL reaches zero (finite right support end).
    """

    segments: tuple[Segment, ...]

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise ValueError("an MRL specification needs at least one segment")
        if segs[0].start != 0:
            raise ValueError(f"first segment must start at 0, got {segs[0].start}")
        for left, right in zip(segs, segs[1:]):
            if not math.isfinite(left.end) or left.end != right.start:
                raise ValueError(
                    f"segments are not contiguous: [{left.start}, {left.end}) then "
                    f"[{right.start}, {right.end})"
                )

    @classmethod
    def from_dicts(cls, items: Sequence[Mapping]) -> "MRLSpec":
        return cls(tuple(
            Segment(float(it["from"]), float(it["to"]), str(it["kind"]), float(it["a"]), float(it["b"]))
            for it in items
        ))

    @classmethod
    def constant(cls, mean: float) -> "MRLSpec":
        return cls((Segment(0.0, math.inf, "affine", float(mean), 0.0),))

    @property
    def knots(self) -> tuple[float, ...]:
        ends = [s.start for s in self.segments[1:]]
        if math.isfinite(self.segments[-1].end):
            ends.append(self.segments[-1].end)
        return tuple(ends)

    @property
    def support_end(self) -> float:
        return self.segments[-1].end

    def _index(self, x: np.ndarray) -> np.ndarray:
        starts = np.array([s.start for s in self.segments])
        return np.clip(np.searchsorted(starts, x, side="right") - 1, 0, len(starts) - 1)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        idx = self._index(x)
        for k, seg in enumerate(self.segments):
            mask = idx == k
            if np.any(mask):
                out[mask] = seg(x[mask])
        return out if out.ndim else float(out)

    def to_dicts(self) -> list[dict]:
        return [s.to_dict() for s in self.segments]


@dataclass(frozen=True)
class FromSurvival:
    pass


@dataclass(frozen=True)
class FromMRL:
    spec: MRLSpec


@dataclass(frozen=True)
class Builtin:
    name: str
    params: tuple[tuple[str, float], ...] = ()


Origin = Union[FromSurvival, FromMRL, Builtin]


@dataclass(frozen=True)
class LifeDistribution:
    """Non-negative lifetime described by its survival function.

    Attributes:
        sf: vectorised survival function, only called on ``[0, support_end]``.
        mean: the mean lifetime (declared analytically).
        tail_rate: scale ``c`` such that the survival function is eventually
            dominated by ``C*exp(-x/c)``.
        knots: ages where ``sf`` is not smooth.
        support_end: right end of the support (``inf`` if unbounded).
        origin: how the distribution was built.
    """

    sf: Callable = field(repr=False)
    mean: float
    tail_rate: float
    knots: tuple[float, ...] = ()
    support_end: float = math.inf
    origin: Origin = FromSurvival()
    name: str = "custom"

    def __post_init__(self):
        if not self.mean > 0:
            raise ValueError(f"mean must be positive, got {self.mean!r}")
        if not self.tail_rate > 0 or not math.isfinite(self.tail_rate):
            raise ValueError(f"tail_rate must be positive and finite, got {self.tail_rate!r}")
        object.__setattr__(self, "knots", tuple(sorted(float(k) for k in self.knots)))
        at_zero = float(np.asarray(self.sf(np.array([0.0])), dtype=float).ravel()[0])
        if abs(at_zero - 1.0) > 1e-9:
            raise ValueError(f"survival function must equal 1 at age 0, got {at_zero!r}")

    def survival(self, x):
        """Survival probability ``P(X > x)``; accepts scalars or arrays."""
        arr = np.asarray(x, dtype=float)
        out = np.ones_like(arr)
        inside = (arr > 0) & (arr < self.support_end)
        if np.any(inside):
            out[inside] = np.clip(np.asarray(self.sf(arr[inside]), dtype=float), 0.0, 1.0)
        out[arr >= self.support_end] = 0.0
        return out if out.ndim else float(out)

    def scaled(self, c: float) -> "LifeDistribution":
        """Distribution of ``c*X``."""
        if not c > 0:
            raise ValueError("scale factor must be positive")
        base = self.sf
        return LifeDistribution(
            sf=lambda x: base(np.asarray(x, dtype=float) / c),
            mean=self.mean * c,
            tail_rate=self.tail_rate * c,
            knots=tuple(k * c for k in self.knots),
            support_end=self.support_end * c,
            origin=self.origin,
            name=f"{self.name}*{c:g}",
        )

    def knots_in(self, lo: float, hi: float = math.inf) -> list[float]:
        return [k for k in self.knots if lo < k < hi]


@dataclass(frozen=True)
class EquilibriumDensity:
    """Density ``S(x)/mean`` of the first derived (equilibrium) distribution."""

    base: LifeDistribution

    def density(self, x):
        return np.asarray(self.base.survival(x)) / self.base.mean

    def total(self, tol: float = DEFAULT_QUAD_TOL) -> float:
        return tail_integral(self.base, 0.0, tol).value / self.base.mean


def tail_integral(d: LifeDistribution, x: float, tol: float = DEFAULT_QUAD_TOL, *, rtol: float = 0.0) -> QuadResult:
    """``integral_x^inf S(t) dt``."""
    x = max(float(x), 0.0)
    if x >= d.support_end:
        return QuadResult(0.0, 0.0, 1)
    if math.isfinite(d.support_end):
        return integrate(d.survival, x, d.support_end, tol, rtol=rtol, points=d.knots_in(x, d.support_end))
    return integrate_semi_infinite(
        d.survival, x, d.tail_rate, tol, rtol=rtol, points=d.knots_in(x),
        scale=max(d.survival(x), 1e-300),
    )


def mrl_of(d: LifeDistribution, x: float, tol: float = DEFAULT_QUAD_TOL) -> float:
    """Mean residual life ``e(x) = integral_x^inf S(t) dt / S(x)``.

    Raises:
        SupportExceededError: if ``S(x) <= 1e-300``.
    """
    sx = d.survival(x)
    if sx <= SUPPORT_FLOOR:
        raise SupportExceededError(f"survival at x={x!r} is {sx!r}; MRL undefined")
    return tail_integral(d, x, tol * sx).value / sx


def mrl_on_grid(d: LifeDistribution, xs: Sequence[float], rtol: float = 1e-12) -> np.ndarray:
    """MRL at every point of an increasing grid.

    Cell integrals of the survival function are computed in one vectorised
    pass and summed from the right, so the cost is one quadrature per cell
    instead of one semi-infinite quadrature per point.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 1 or np.any(np.diff(xs) <= 0):
        raise ValueError("grid must be one-dimensional and strictly increasing")
    sx = d.survival(xs)
    if np.any(sx <= SUPPORT_FLOOR):
        bad = xs[np.argmax(sx <= SUPPORT_FLOOR)]
        raise SupportExceededError(f"survival vanishes at x={bad!r}; MRL undefined")
    cells = integrate_cells(d.survival, xs, 1e-300 if rtol > 0 else 1e-14, rtol=rtol, points=d.knots)
    last = tail_integral(d, xs[-1], rtol * sx[-1] * d.tail_rate + 1e-300).value
    tails = last + np.concatenate([np.cumsum(cells[::-1])[::-1], [0.0]])
    return tails / sx


def moment(d: LifeDistribution, r: float, tol: float = DEFAULT_QUAD_TOL) -> float:
    """Raw moment ``E[X^r] = r * integral_0^inf x^(r-1) S(x) dx`` for ``r > 0``."""
    if not r > 0:
        raise ValueError(f"moment order must be positive, got {r!r}")
    return integrate_power_weighted(
        d.survival, float(r), d.tail_rate, tol, rtol=tol,
        points=d.knots, upper=d.support_end,
    ).value


def mean_of(d: LifeDistribution, tol: float = DEFAULT_QUAD_TOL) -> float:
    """``integral_0^inf S(x) dx`` computed numerically."""
    return tail_integral(d, 0.0, tol).value


def default_horizon(d: LifeDistribution, eps: float = HORIZON_SURVIVAL) -> float:
    """Smallest age with ``S(x) < eps``: doubling search then bisection."""
    hi = max(d.mean, min(d.knots, default=d.mean))
    while d.survival(hi) >= eps:
        hi *= 2.0
        if hi > 1e8 * d.mean:
            raise SupportExceededError("survival does not fall below the horizon threshold")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi or hi - lo <= 1e-12 * hi:
            break
        if d.survival(mid) < eps:
            hi = mid
        else:
            lo = mid
    return hi


def _tail_rate_of(spec: MRLSpec) -> float:
    last = spec.segments[-1]
    head = float(last(last.start))
    if last.kind == "affine":
        if last.b > 0:
            raise ValueError(
                "final MRL segment grows without bound; the tail is not exponentially "
                "dominated and cannot be integrated by truncation"
            )
        return head
    return max(head, last.a)


def from_mrl(spec: MRLSpec, tol: float = 1e-9) -> LifeDistribution:
    """Build the distribution whose mean residual life is ``spec``.

    Raises:
        MRLValidationError: if ``spec`` fails :func:`nbuekit.ageing.validate_mrl`.
    """
    from .ageing import validate_mrl

    report = validate_mrl(spec, tol)
    if not report.valid:
        raise MRLValidationError(report)

    segs = spec.segments
    e0 = float(spec(0.0))
    # cumulative integral of 1/e at each segment start
    offsets = [0.0]
    for seg in segs[:-1]:
        offsets.append(offsets[-1] + float(seg.inverse_integral(seg.end)))
    starts = np.array([s.start for s in segs])

    def sf(x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(starts, x, side="right") - 1, 0, len(segs) - 1)
        out = np.zeros_like(x)
        for k, seg in enumerate(segs):
            mask = idx == k
            if np.any(mask):
                xs = x[mask]
                with np.errstate(divide="ignore", invalid="ignore"):
                    val = e0 / seg(xs) * np.exp(-(offsets[k] + seg.inverse_integral(xs)))
                out[mask] = np.where(np.isfinite(val), val, 0.0)
        return out

    return LifeDistribution(
        sf=sf,
        mean=e0,
        tail_rate=_tail_rate_of(spec),
        knots=spec.knots,
        support_end=spec.support_end,
        origin=FromMRL(spec),
        name="mrl",
    )


# ---------------------------------------------------------------- catalog

def _exponential(mean: float = 1.0) -> LifeDistribution:
    mean = float(mean)
    return LifeDistribution(
        sf=lambda x: np.exp(-x / mean), mean=mean, tail_rate=mean,
        origin=Builtin("exponential", (("mean", mean),)), name=f"exponential(mean={mean:g})",
    )


def _weibull(shape: float = 2.0, scale: float = 1.0) -> LifeDistribution:
    k, s = float(shape), float(scale)
    if k < 1:
        raise ValueError("weibull shape must be >= 1 (heavier tails are not exponentially dominated)")
    return LifeDistribution(
        sf=lambda x: np.exp(-np.power(x / s, k)), mean=s * math.gamma(1 + 1 / k), tail_rate=s,
        origin=Builtin("weibull", (("shape", k), ("scale", s))), name=f"weibull(shape={k:g}, scale={s:g})",
    )


def _uniform(upper: float = 1.0) -> LifeDistribution:
    u = float(upper)
    return LifeDistribution(
        sf=lambda x: 1.0 - x / u, mean=u / 2, tail_rate=u, support_end=u,
        origin=Builtin("uniform", (("upper", u),)), name=f"uniform(upper={u:g})",
    )


def _example_3_1() -> LifeDistribution:
    def sf(x):
        x = np.asarray(x, dtype=float)
        return np.piecewise(x, [x <= 1, (x > 1) & (x <= 28), x > 28], [
            lambda t: 25.0 / (5.0 + t) ** 2,
            lambda t: 75.0 / (2.0 * 54.0**9) * (55.0 - t) ** 8,
            lambda t: 25.0 / (9.0 * 2.0**10) * np.exp((28.0 - t) / 3.0),
        ])
    return LifeDistribution(sf=sf, mean=5.0, tail_rate=3.0, knots=(1.0, 28.0),
                            origin=Builtin("example_3_1"), name="example_3_1")


def _example_3_3() -> LifeDistribution:
    def sf(x):
        x = np.asarray(x, dtype=float)
        return np.piecewise(x, [x <= 2, (x > 2) & (x <= 4), x > 4], [
            lambda t: 4.0 / (t + 2.0) ** 2,
            lambda t: (10.0 - t) / 32.0,
            lambda t: 3.0 / 16.0 * np.exp((4.0 - t) / 3.0),
        ])
    return LifeDistribution(sf=sf, mean=2.0, tail_rate=3.0, knots=(2.0, 4.0),
                            origin=Builtin("example_3_3"), name="example_3_3")


def _example_3_4() -> LifeDistribution:
    def sf(x):
        x = np.asarray(x, dtype=float)
        return np.piecewise(x, [x < 1, (x >= 1) & (x < 3), x >= 3], [
            lambda t: 4.0 / (2.0 + t) ** 2,
            lambda t: 2.0 / 27.0 * (7.0 - t),
            lambda t: 2.0 * t * (3.0 + t) ** 2 / 729.0 * np.exp(3.0 - t),
        ])
    # S(x) ~ x^3 e^-x: dominated by C*exp(-x/2)
    return LifeDistribution(sf=sf, mean=2.0, tail_rate=2.0, knots=(1.0, 3.0),
                            origin=Builtin("example_3_4"), name="example_3_4")


_CATALOG: dict[str, Callable[..., LifeDistribution]] = {
    "exponential": _exponential,
    "weibull": _weibull,
    "uniform": _uniform,
    "example_3_1": _example_3_1,
    "example_3_2": lambda: _weibull(2.0, 1.0),
    "example_3_3": _example_3_3,
    "example_3_4": _example_3_4,
}
CATALOG_NAMES = tuple(_CATALOG)

_MRL_CATALOG: dict[str, Callable[..., MRLSpec]] = {
    "exponential": lambda mean=1.0: MRLSpec.constant(mean),
    "uniform": lambda upper=1.0: MRLSpec((Segment(0.0, float(upper), "affine", upper / 2, -0.5),)),
    "example_3_1": lambda: MRLSpec((
        Segment(0.0, 1.0, "affine", 5.0, 1.0),
        Segment(1.0, 28.0, "affine", 55.0 / 9.0, -1.0 / 9.0),
        Segment(28.0, math.inf, "affine", 3.0, 0.0),
    )),
    "example_3_3": lambda: MRLSpec((
        Segment(0.0, 2.0, "affine", 2.0, 1.0),
        Segment(2.0, 4.0, "affine", 5.0, -0.5),
        Segment(4.0, math.inf, "affine", 3.0, 0.0),
    )),
    "example_3_4": lambda: MRLSpec((
        Segment(0.0, 1.0, "affine", 2.0, 1.0),
        Segment(1.0, 3.0, "affine", 3.5, -0.5),
        Segment(3.0, math.inf, "reciprocal", 1.0, 3.0),
    )),
}


def catalog(name: str, **params: float) -> LifeDistribution:
    """Closed-form distribution by name.

    Available: ``exponential(mean)``, ``weibull(shape, scale)``,
    ``uniform(upper)`` and the worked examples ``example_3_1`` ..
    ``example_3_4`` (``example_3_2`` is the unit-scale Weibull of shape 2).
    """
    try:
        factory = _CATALOG[name]
    except KeyError:
        raise ValueError(f"unknown distribution {name!r}; available: {', '.join(CATALOG_NAMES)}") from None
    return factory(**params)


def mrl_catalog(name: str, **params: float) -> MRLSpec:
    """Piecewise MRL function of a catalog member, where one is known."""
    try:
        factory = _MRL_CATALOG[name]
    except KeyError:
        raise ValueError(f"no MRL form for {name!r}; available: {', '.join(_MRL_CATALOG)}") from None
    return factory(**params)
