"""Moment and tail inequalities for NBUE and NWBUE distributions.

Every check returns a :class:`BoundReport`: the computed left-hand side and
one :class:`Bound` entry per right-hand side with its direction, signed
margin and a satisfied flag. A bound counts as satisfied when
``lhs <= value*(1 + 1e-8) + 1e-10`` (dually for lower bounds), so that
quadrature noise cannot flip a verdict at equality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Optional

import numpy as np

from . import numerics
from .distributions import LifeDistribution, moment, tail_integral
from .numerics import DEFAULT_QUAD_TOL, integrate_power_weighted, integrate_semi_infinite

__all__ = [
    "BoundId",
    "Bound",
    "BoundReport",
    "Deficiency",
    "tail_bound_check",
    "nbue_moment_bound",
    "nbue_bounds",
    "check_phi_inequality",
    "nwbue_bound_a",
    "nwbue_bound_b",
    "nwbue_bound_c",
    "nwbue_bounds",
    "deficiency",
]

REL_SLACK = 1e-8
ABS_SLACK = 1e-10


class BoundId(str, Enum):
    NBUE_UPPER = "NBUE_UPPER"
    NBUE_LOWER = "NBUE_LOWER"
    NWBUE_A = "NWBUE_A"
    NWBUE_B = "NWBUE_B"
    NWBUE_C = "NWBUE_C"
    TAIL = "TAIL"
    PHI = "PHI"


@dataclass(frozen=True)
class Bound:
    id: BoundId
    value: float
    direction: str  # "<=" or ">="
    lhs: float
    satisfied: bool
    margin: float
    at: Optional[float] = None

    @classmethod
    def compare(cls, id: BoundId, lhs: float, value: float, direction: str, at: Optional[float] = None) -> "Bound":
        if direction == "<=":
            ok = lhs <= value * (1 + REL_SLACK) + ABS_SLACK
            margin = value - lhs
        elif direction == ">=":
            ok = lhs >= value * (1 - REL_SLACK) - ABS_SLACK
            margin = lhs - value
        else:
            raise ValueError(f"direction must be '<=' or '>=', got {direction!r}")
        return cls(id, float(value), direction, float(lhs), bool(ok), float(margin), at)


@dataclass(frozen=True)
class BoundReport:
    quantity: float
    bounds: tuple[Bound, ...]

    @property
    def all_satisfied(self) -> bool:
        return all(b.satisfied for b in self.bounds)

    def get(self, id: BoundId) -> Bound:
        for b in self.bounds:
            if b.id == id:
                return b
        raise KeyError(id)

    def __contains__(self, id: BoundId) -> bool:
        return any(b.id == id for b in self.bounds)


@dataclass(frozen=True)
class Deficiency:
    """``mean**t * Gamma(t+1) - E[X^t]``; negative values break the NBUE upper bound."""

    t: float
    value: float
    bound: float
    moment: float


def tail_bound_check(d: LifeDistribution, xs: Iterable[float], tol: float = 1e-12) -> BoundReport:
    """Compare ``integral_x^inf S`` with the exponential majorant ``mean*exp(-x/mean)``.

    The majorant is guaranteed only for NBUE distributions. The report's
    ``quantity`` is the total mass ``integral_0^inf S``; each entry carries
    its own left-hand side at ``at = x``.
    """
    mu = d.mean
    entries = []
    for x in xs:
        lhs = tail_integral(d, x, tol).value
        entries.append(Bound.compare(BoundId.TAIL, lhs, mu * math.exp(-x / mu), "<=", at=float(x)))
    total = tail_integral(d, 0.0, tol).value
    return BoundReport(total, tuple(entries))


def nbue_moment_bound(mu: float, r: float) -> float:
    """``Gamma(r+1) * mu**r``: upper bound on ``E[X^r]`` for ``r >= 1``, lower for ``r < 1``."""
    if not mu > 0 or not r > 0:
        raise ValueError(f"need mu > 0 and r > 0, got mu={mu!r}, r={r!r}")
    return numerics.gamma_fn(r + 1) * mu**r


def nbue_bounds(d: LifeDistribution, r: float, tol: float = DEFAULT_QUAD_TOL) -> BoundReport:
    mu_r = moment(d, r, tol)
    value = nbue_moment_bound(d.mean, r)
    if r >= 1:
        entry = Bound.compare(BoundId.NBUE_UPPER, mu_r, value, "<=")
    else:
        entry = Bound.compare(BoundId.NBUE_LOWER, mu_r, value, ">=")
    return BoundReport(mu_r, (entry,))


def check_phi_inequality(
    d: LifeDistribution,
    phi: Callable,
    tol: float = DEFAULT_QUAD_TOL,
) -> BoundReport:
    """``integral phi(y) S(y) dy`` against ``integral phi(y) exp(-y/mean) dy``.

    ``phi`` must be nonnegative and nondecreasing; the inequality then holds
    for every NBUE distribution.
    """
    def weighted_sf(y):
        return np.asarray(phi(y), dtype=float) * d.survival(y)

    def weighted_exp(y):
        return np.asarray(phi(y), dtype=float) * np.exp(-np.asarray(y) / d.mean)

    if math.isfinite(d.support_end):
        lhs = numerics.integrate(weighted_sf, 0.0, d.support_end, tol, rtol=tol,
                                 points=d.knots_in(0.0, d.support_end)).value
    else:
        lhs = integrate_semi_infinite(weighted_sf, 0.0, d.tail_rate, tol, rtol=tol, points=d.knots).value
    rhs = integrate_semi_infinite(weighted_exp, 0.0, d.mean, tol, rtol=tol).value
    return BoundReport(lhs, (Bound.compare(BoundId.PHI, lhs, rhs, "<="),))


def _is_integer(r: float) -> bool:
    return float(r).is_integer()


def _poisson_partial_sum(z: float, n: int) -> float:
    return math.fsum(z**j / math.factorial(j) for j in range(n))


def nwbue_bound_a(mu: float, x0: float, r: float, tol: float = 1e-13) -> float:
    """``r * exp(x0/mu) * integral_x0^inf x^(r-1) exp(-x/mu) dx``.

    Integer orders use the incomplete-gamma closed form
    ``r! mu^r sum_{j<r} (x0/mu)^j / j!``; other orders integrate
    ``r * (y + x0)^(r-1) exp(-y/mu)`` over ``y >= 0``, which keeps the
    ``exp(x0/mu)`` factor out of the arithmetic.
    """
    if not mu > 0 or not r > 0 or x0 < 0:
        raise ValueError(f"need mu > 0, r > 0, x0 >= 0; got mu={mu!r}, r={r!r}, x0={x0!r}")
    if _is_integer(r):
        n = int(r)
        return math.factorial(n) * mu**n * _poisson_partial_sum(x0 / mu, n)
    return integrate_power_weighted(
        lambda y: np.exp(-np.asarray(y) / mu), r, mu, tol, shift=x0, rtol=tol,
    ).value


def nwbue_bound_b(mu: float, x0: float, r: int, literal: bool = False) -> float:
    """``x0^r + mu^r Gamma(r+1) sum_{j=0}^{r-1} (x0/mu)^j / j!`` for integer ``r >= 1``.

    With ``literal=True`` the summand is ``(x0/mu)^r / r!`` for every ``j``,
    the form in which this bound is often misprinted; it is kept only for
    side-by-side reporting.
    """
    if not _is_integer(r) or r < 1:
        raise ValueError(f"bound (b) is defined for integer r >= 1 only, got {r!r}")
    if not mu > 0 or x0 < 0:
        raise ValueError(f"need mu > 0 and x0 >= 0; got mu={mu!r}, x0={x0!r}")
    n = int(r)
    z = x0 / mu
    if literal:
        total = n * z**n / math.factorial(n)
    else:
        total = _poisson_partial_sum(z, n)
    return x0**n + mu**n * numerics.gamma_fn(n + 1) * total


def nwbue_bound_c(mu: float, x0: float, r: float) -> float:
    """``mu^r Gamma(r+1) exp(x0/mu)`` for ``r >= 1``."""
    if r < 1:
        raise ValueError(f"bound (c) needs r >= 1, got {r!r}")
    if not mu > 0 or x0 < 0:
        raise ValueError(f"need mu > 0 and x0 >= 0; got mu={mu!r}, x0={x0!r}")
    return mu**r * numerics.gamma_fn(r + 1) * math.exp(x0 / mu)


def nwbue_bounds(
    d: LifeDistribution,
    x0: float,
    r: float,
    literal_b: bool = False,
    tol: float = DEFAULT_QUAD_TOL,
) -> BoundReport:
    """Moment bounds for an NWBUE distribution with change point ``x0``.

    (a) for every ``r > 0`` (upper for ``r >= 1``, lower below), (b) for
    integer ``r >= 1``, (c) for ``r >= 1``.
    """
    if not r > 0:
        raise ValueError(f"order must be positive, got {r!r}")
    if x0 < 0:
        raise ValueError(f"change point must be nonnegative, got {x0!r}")
    mu = d.mean
    mu_r = moment(d, r, tol)
    entries = [Bound.compare(BoundId.NWBUE_A, mu_r, nwbue_bound_a(mu, x0, r), "<=" if r >= 1 else ">=")]
    if _is_integer(r) and r >= 1:
        entries.append(Bound.compare(BoundId.NWBUE_B, mu_r, nwbue_bound_b(mu, x0, int(r), literal_b), "<="))
    if r >= 1:
        entries.append(Bound.compare(BoundId.NWBUE_C, mu_r, nwbue_bound_c(mu, x0, r), "<="))
    return BoundReport(mu_r, tuple(entries))


def deficiency(d: LifeDistribution, t: float, tol: float = DEFAULT_QUAD_TOL) -> Deficiency:
    if not t > 0:
        raise ValueError(f"t must be positive, got {t!r}")
    bound = nbue_moment_bound(d.mean, t)
    mu_t = moment(d, t, tol)
    return Deficiency(float(t), bound - mu_t, bound, mu_t)
