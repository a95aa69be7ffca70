"""Deterministic numerical kernel.

Adaptive Gauss-Kronrod quadrature on finite and semi-infinite ranges,
bracketed root finding, sign-pattern scanning of sampled functions and the
gamma function. Integrands are evaluated on numpy arrays of nodes; plain
scalar callables are accepted and evaluated point by point.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "QuadResult",
    "QuadratureError",
    "Bracket",
    "Run",
    "SignPattern",
    "integrate",
    "integrate_cells",
    "integrate_semi_infinite",
    "integrate_power_weighted",
    "find_root",
    "sign_pattern",
    "scan_sign_pattern",
    "gamma_fn",
]

DEFAULT_QUAD_TOL = 1e-10
DEFAULT_ROOT_TOL = 1e-10
DEFAULT_SIGN_TOL = 1e-9
HORIZON_CAP = 400.0

# 15-point Kronrod rule with its embedded 7-point Gauss rule (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes.
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[1::2] = np.concatenate([_WG[:-1], _WG[::-1]])

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadResult:
    value: float
    abs_error_estimate: float
    evaluations: int

    def __post_init__(self):
        if self.abs_error_estimate < 0:
            raise ValueError("abs_error_estimate must be non-negative")
        if self.evaluations < 1:
            raise ValueError("evaluations must be at least 1")

    def __float__(self) -> float:
        return self.value


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance.

    The best estimate found so far is kept on ``result``.
    """

    def __init__(self, message: str, result: QuadResult):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


def _evaluate(f: Callable, x: np.ndarray) -> np.ndarray:
    """Evaluate ``f`` on an array, falling back to a scalar loop."""
    try:
        y = np.asarray(f(x), dtype=float)
    except (TypeError, ValueError):
        y = None
    if y is None or (y.shape != x.shape and y.size != 1):
        flat = np.array([float(f(float(v))) for v in x.ravel()])
        return flat.reshape(x.shape)
    return np.broadcast_to(y, x.shape).astype(float, copy=False)


def _gk15(f: Callable, lo: np.ndarray, hi: np.ndarray):
    """Apply the G7/K15 pair to every interval [lo_i, hi_i] at once."""
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = center[:, None] + half[:, None] * NODES[None, :]
    y = _evaluate(f, x)
    if not np.all(np.isfinite(y)):
        bad = x[~np.isfinite(y)][0]
        raise ValueError(f"integrand is not finite at x={bad!r}")
    kronrod = half * (y @ KRONROD_WEIGHTS)
    gauss = half * (y @ GAUSS_WEIGHTS)
    # floor the estimate at roundoff level of the absolute integrand
    roundoff = 50 * _EPS * np.abs(half) * (np.abs(y) @ KRONROD_WEIGHTS)
    diff = np.abs(kronrod - gauss)
    return kronrod, np.maximum(diff, roundoff), diff <= roundoff


def _split_points(a: float, b: float, points: Iterable[float] | None) -> list[float]:
    inner = sorted({float(p) for p in (points or ()) if a < p < b})
    return [a, *inner, b]


def integrate(
    f: Callable,
    a: float,
    b: float,
    tol: float = DEFAULT_QUAD_TOL,
    *,
    rtol: float = 0.0,
    points: Iterable[float] | None = None,
    limit: int = 2000,
) -> QuadResult:
    """Integrate ``f`` over ``[a, b]`` with adaptive Gauss-Kronrod subdivision.

    The interval is first split at the supplied ``points`` (knots of a
    piecewise integrand). The interval with the largest error estimate is
    bisected until the summed estimate drops below ``max(tol, rtol*|value|)``.

    Raises:
        ValueError: on ``a > b``, ``tol <= 0`` or a non-finite integrand.
        QuadratureError: if ``limit`` subdivisions are exhausted.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if a > b:
        raise ValueError(f"need a <= b, got a={a}, b={b}")
    if a == b:
        _evaluate(f, np.array([float(a)]))
        return QuadResult(0.0, 0.0, 1)

    edges = _split_points(float(a), float(b), points)
    lo = np.array(edges[:-1])
    hi = np.array(edges[1:])
    vals, errs, limited = _gk15(f, lo, hi)
    evaluations = 15 * len(lo)
    heap = [(-e, l, h, v, r) for l, h, v, e, r in zip(lo, hi, vals, errs, limited)]
    heapq.heapify(heap)
    # intervals whose error is pure roundoff gain nothing from bisection
    settled = []
    total = float(np.sum(vals))
    total_err = float(np.sum(errs))

    splits = 0
    while heap and total_err > max(tol, rtol * abs(total)):
        if splits >= limit:
            raise QuadratureError(
                f"no convergence on [{a}, {b}] after {limit} subdivisions "
                f"(estimate {total!r}, error {total_err:.3g})",
                QuadResult(total, total_err, evaluations),
            )
        item = heapq.heappop(heap)
        neg_err, l, h, v, at_floor = item
        if at_floor:
            settled.append(item)
            continue
        m = 0.5 * (l + h)
        if not l < m < h:
            # interval cannot be halved any further in floating point
            raise QuadratureError(
                f"interval [{l}, {h}] exhausted machine precision",
                QuadResult(total, total_err, evaluations),
            )
        new_vals, new_errs, new_limited = _gk15(f, np.array([l, m]), np.array([m, h]))
        evaluations += 30
        splits += 1
        total += float(new_vals.sum()) - v
        total_err += float(new_errs.sum()) + neg_err
        heapq.heappush(heap, (-new_errs[0], l, m, new_vals[0], bool(new_limited[0])))
        heapq.heappush(heap, (-new_errs[1], m, h, new_vals[1], bool(new_limited[1])))

    # re-sum to shed the drift accumulated by incremental updates
    items = heap + settled
    total = math.fsum(item[3] for item in items)
    total_err = math.fsum(-item[0] for item in items)
    return QuadResult(total, total_err, evaluations)


def integrate_cells(
    f: Callable,
    edges: Sequence[float],
    tol: float = DEFAULT_QUAD_TOL,
    *,
    rtol: float = 0.0,
    points: Iterable[float] | None = None,
) -> np.ndarray:
    """Integrals of ``f`` over every cell ``[edges[i], edges[i+1]]``.

    All cells are integrated in one vectorised Gauss-Kronrod pass; cells
    whose error estimate exceeds ``max(tol, rtol*|value|)`` (typically the
    ones holding a knot) are redone adaptively with :func:`integrate`.
    """
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1], edges[1:]
    vals, errs, _ = _gk15(f, lo, hi)
    knots = sorted(float(p) for p in (points or ()))
    for i in np.flatnonzero(errs > np.maximum(tol, rtol * np.abs(vals))):
        vals[i] = integrate(f, lo[i], hi[i], tol, rtol=rtol, points=knots).value
    return vals


def _truncation_horizon(f, a, tail_rate, tol, scale):
    # exponential majorant scale*exp(-(x-a)/rate) has tail mass below tol/10
    horizon = a + tail_rate * max(1.0, math.log(10.0 * scale * tail_rate / tol))
    cap = a + HORIZON_CAP * tail_rate
    horizon = min(horizon, cap)
    # the majorant is only certified up to a constant: also require the
    # integrand itself to have decayed at the horizon
    while horizon < cap:
        fx = float(_evaluate(f, np.array([horizon]))[0])
        if abs(fx) * tail_rate < tol / 10.0:
            break
        horizon = min(horizon + tail_rate * math.log(10.0), cap)
    return horizon


def integrate_semi_infinite(
    f: Callable,
    a: float,
    tail_rate: float,
    tol: float = DEFAULT_QUAD_TOL,
    *,
    rtol: float = 0.0,
    points: Iterable[float] | None = None,
    scale: float = 1.0,
) -> QuadResult:
    """Integrate ``f`` over ``[a, inf)`` for an exponentially dominated integrand.

    ``f`` must be bounded by ``scale * exp(-(x - a) / tail_rate)`` eventually.
    The range is cut where that majorant's remaining mass falls below
    ``tol/10`` (never beyond ``a + 400*tail_rate``) and the finite part is
    handed to :func:`integrate`.
    """
    if not tail_rate > 0 or not math.isfinite(tail_rate):
        raise ValueError(f"tail_rate must be positive and finite, got {tail_rate!r}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    horizon = _truncation_horizon(f, float(a), float(tail_rate), tol, max(scale, _EPS))
    return integrate(f, a, horizon, 0.9 * tol, rtol=rtol, points=points)


def integrate_power_weighted(
    g: Callable,
    r: float,
    tail_rate: float,
    tol: float = DEFAULT_QUAD_TOL,
    *,
    shift: float = 0.0,
    rtol: float = 0.0,
    points: Iterable[float] | None = None,
    upper: float = math.inf,
) -> QuadResult:
    """Compute ``r * integral_0^upper (y + shift)**(r-1) * g(y) dy``.

    With ``shift == 0`` and ``r < 1`` the weight is singular at the origin;
    the first cell ``[0, c]`` is then mapped through ``y = t**(1/r)`` which
    turns it into ``integral_0^(c**r) g(t**(1/r)) dt`` with a bounded
    integrand.
    """
    if r <= 0:
        raise ValueError(f"order must be positive, got {r!r}")
    knots = sorted(float(p) for p in (points or ()) if 0 < p < upper)

    def weighted(y):
        return r * np.power(y + shift, r - 1.0) * _evaluate(g, np.asarray(y, dtype=float))

    def rest(start, tol_part):
        inner = [p for p in knots if p > start]
        if math.isfinite(upper):
            return integrate(weighted, start, upper, tol_part, rtol=rtol, points=inner)
        return integrate_semi_infinite(
            weighted, start, tail_rate, tol_part, rtol=rtol, points=inner,
            scale=max(1.0, r * (start + shift + tail_rate) ** (r - 1.0)),
        )

    if shift > 0 or r >= 1:
        return rest(0.0, tol)

    c = min([1.0, tail_rate, *knots[:1]])
    if math.isfinite(upper):
        c = min(c, upper)

    def mapped(t):
        return _evaluate(g, np.power(np.asarray(t, dtype=float), 1.0 / r))

    mapped_knots = [p**r for p in knots if p < c]
    head = integrate(mapped, 0.0, c**r, tol / 2, rtol=rtol, points=mapped_knots)
    if c >= upper:
        return head
    tail = rest(c, tol / 2)
    return QuadResult(
        head.value + tail.value,
        head.abs_error_estimate + tail.abs_error_estimate,
        head.evaluations + tail.evaluations,
    )


def find_root(f: Callable[[float], float], bracket: Bracket, tol: float = DEFAULT_ROOT_TOL) -> float:
    """Root of ``f`` inside ``bracket``.

    Brent's method (bisection safeguarded secant/inverse quadratic steps),
    so convergence is guaranteed for any sign-change bracket.

    Raises:
        ValueError: if ``f`` has the same strict sign at both ends.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = bracket.lo, bracket.hi
    flo, fhi = float(f(lo)), float(f(hi))
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ValueError(
            f"no sign change in bracket [{lo}, {hi}]: f(lo)={flo!r}, f(hi)={fhi!r}"
        )
    root = brentq(lambda x: float(f(x)), lo, hi, xtol=tol, maxiter=500)
    return min(max(root, lo), hi)


@dataclass(frozen=True)
class Run:
    """A maximal stretch of grid points sharing one sign."""

    sign: int
    start: float
    end: float
    count: int

    @property
    def symbol(self) -> str:
        return {1: "+", 0: "0", -1: "-"}[self.sign]


@dataclass(frozen=True)
class SignPattern:
    runs: tuple[Run, ...]
    crossings: tuple[Bracket, ...]
    threshold: float

    @property
    def signs(self) -> str:
        return "".join(run.symbol for run in self.runs)

    def flipped(self) -> "SignPattern":
        runs = tuple(Run(-r.sign, r.start, r.end, r.count) for r in self.runs)
        return SignPattern(runs, self.crossings, self.threshold)


def sign_pattern(xs: Sequence[float], values: Sequence[float], tol: float = DEFAULT_SIGN_TOL) -> SignPattern:
    """Compress sampled values into a pattern of sign runs.

    Values with ``|v| <= tol * max(1, max|v|)`` count as zero. Zero runs are
    absorbed into their neighbours unless every value is zero; every change
    between a ``+`` and a ``-`` run yields a bracket around the crossing.
    """
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    if xs.shape != values.shape or xs.size < 2:
        raise ValueError("need at least two samples with matching shapes")
    threshold = tol * max(1.0, float(np.max(np.abs(values))))
    signs = np.where(np.abs(values) <= threshold, 0, np.sign(values)).astype(int)

    nonzero = np.flatnonzero(signs)
    if nonzero.size == 0:
        return SignPattern((Run(0, xs[0], xs[-1], xs.size),), (), threshold)

    runs: list[Run] = []
    crossings: list[Bracket] = []
    start = prev = nonzero[0]
    for i in nonzero[1:]:
        if signs[i] != signs[prev]:
            runs.append(Run(int(signs[prev]), xs[start], xs[prev], int(prev - start + 1)))
            crossings.append(Bracket(xs[prev], xs[i]))
            start = i
        prev = i
    runs.append(Run(int(signs[prev]), xs[start], xs[prev], int(prev - start + 1)))
    return SignPattern(tuple(runs), tuple(crossings), threshold)


def scan_sign_pattern(
    f: Callable,
    a: float,
    b: float,
    grid_n: int = 4096,
    tol: float = DEFAULT_SIGN_TOL,
) -> SignPattern:
    """Sample ``f`` on ``grid_n`` equispaced points of ``[a, b]`` and compress
    the signs with :func:`sign_pattern`."""
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    xs = np.linspace(a, b, grid_n)
    return sign_pattern(xs, _evaluate(f, xs), tol)


def gamma_fn(x: float) -> float:
    """Gamma function for real ``x > 0``."""
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise ValueError(f"gamma_fn needs a positive finite argument, got {x!r}")
    return math.gamma(x)
