"""Numerical view of convergence along sequences of NBUE distributions.

For each member ``F_n`` of a sequence the report records its mean, the
error of selected raw moments against the limit, and the sup-distance
between survival functions on a shared grid (a proxy for convergence in
law, adequate because the limits used here are continuous).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .ageing import AgeingClass, ClassVerdict, classify_crossing
from .distributions import LifeDistribution, catalog, default_horizon, moment

__all__ = [
    "Family",
    "SequenceSpec",
    "ConvergenceRow",
    "ConvergenceReport",
    "HypothesisViolation",
    "weibull_shape_sequence",
    "exponential_mean_sequence",
    "custom_sequence",
    "doubling_index_set",
    "run_convergence",
]

NBUE_LABELS = (AgeingClass.NBUE, AgeingClass.EXPONENTIAL)
CDF_GRID_POINTS = 512


class Family(str, Enum):
    WEIBULL_SHAPE = "weibull-shape"
    EXPONENTIAL_MEAN = "exp-mean"
    CUSTOM = "custom"


class HypothesisViolation(ValueError):
    """A sequence member is not NBUE, or the means are unbounded."""

    def __init__(self, n: int, reason: str):
        self.n = n
        super().__init__(f"member n={n}: {reason}")


@dataclass(frozen=True)
class SequenceSpec:
    family: Family
    index_set: tuple[int, ...]
    limit: LifeDistribution
    member: Callable[[int], LifeDistribution] = field(repr=False)

    def __post_init__(self):
        idx = tuple(int(n) for n in self.index_set)
        if not idx:
            raise ValueError("index set must not be empty")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("index set must be strictly increasing")
        object.__setattr__(self, "index_set", idx)


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    mu_n: float
    mean_error: float
    moment_errors: dict[float, float]
    cdf_sup_distance: float


@dataclass(frozen=True)
class ConvergenceReport:
    family: Family
    orders: tuple[float, ...]
    rows: tuple[ConvergenceRow, ...]
    limit_mean: float
    limit_moments: dict[float, float]
    limit_verdict: ClassVerdict

    def column(self, r: float) -> np.ndarray:
        return np.array([row.moment_errors[r] for row in self.rows])


def doubling_index_set(n_max: int) -> tuple[int, ...]:
    """``1, 2, 4, ...`` up to and including ``n_max`` when it is a power of two."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    out, n = [], 1
    while n <= n_max:
        out.append(n)
        n *= 2
    return tuple(out)


def weibull_shape_sequence(index_set: Sequence[int] = doubling_index_set(1024)) -> SequenceSpec:
    """Unit-scale Weibull with shape ``1 + 1/n``; the limit is exponential(1)."""
    return SequenceSpec(
        Family.WEIBULL_SHAPE, tuple(index_set), catalog("exponential", mean=1.0),
        lambda n: catalog("weibull", shape=1.0 + 1.0 / n, scale=1.0),
    )


def exponential_mean_sequence(index_set: Sequence[int] = doubling_index_set(1024)) -> SequenceSpec:
    """Exponential with mean ``1 + 1/n``; the limit is exponential(1)."""
    return SequenceSpec(
        Family.EXPONENTIAL_MEAN, tuple(index_set), catalog("exponential", mean=1.0),
        lambda n: catalog("exponential", mean=1.0 + 1.0 / n),
    )


def custom_sequence(
    members: Sequence[LifeDistribution],
    limit: LifeDistribution,
    index_set: Sequence[int] | None = None,
) -> SequenceSpec:
    members = list(members)
    index_set = tuple(index_set) if index_set is not None else tuple(range(1, len(members) + 1))
    if len(index_set) != len(members):
        raise ValueError("need exactly one index per member")
    lookup = dict(zip(index_set, members))
    return SequenceSpec(Family.CUSTOM, index_set, limit, lookup.__getitem__)


def run_convergence(
    spec: SequenceSpec,
    orders: Sequence[float],
    grid_points: int = CDF_GRID_POINTS,
    check_members: bool = True,
) -> ConvergenceReport:
    """Tabulate means, moment errors and survival sup-distances along ``spec``.

    Raises:
        HypothesisViolation: a member does not classify as NBUE (or
            exponential), or has a non-finite mean.
    """
    orders = tuple(float(r) for r in orders)
    if not orders or any(r <= 0 for r in orders):
        raise ValueError("orders must be a non-empty list of positive numbers")

    limit = spec.limit
    limit_moments = {r: moment(limit, r) for r in orders}
    grid = np.linspace(0.0, default_horizon(limit), grid_points)
    limit_sf = limit.survival(grid)

    rows = []
    for n in spec.index_set:
        d = spec.member(n)
        if not np.isfinite(d.mean):
            raise HypothesisViolation(n, "mean is not finite")
        if check_members:
            verdict = classify_crossing(d)
            if verdict.label not in NBUE_LABELS:
                raise HypothesisViolation(n, f"classified {verdict.label.value}, not NBUE")
        rows.append(ConvergenceRow(
            n=n,
            mu_n=d.mean,
            mean_error=abs(d.mean - limit.mean),
            moment_errors={r: abs(moment(d, r) - limit_moments[r]) for r in orders},
            cdf_sup_distance=float(np.max(np.abs(d.survival(grid) - limit_sf))),
        ))

    return ConvergenceReport(
        spec.family, orders, tuple(rows), limit.mean, limit_moments, classify_crossing(limit),
    )
