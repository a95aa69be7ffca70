import math

import numpy as np
import pytest

from nbuekit.ageing import AgeingClass
from nbuekit.convergence import (
    Family,
    HypothesisViolation,
    SequenceSpec,
    custom_sequence,
    doubling_index_set,
    exponential_mean_sequence,
    run_convergence,
    weibull_shape_sequence,
)
from nbuekit.distributions import catalog


@pytest.fixture(scope="module")
def weibull_report():
    return run_convergence(weibull_shape_sequence(doubling_index_set(1024)), (1.0, 2.0, 3.0))


def test_doubling_index_set():
    assert doubling_index_set(1024) == tuple(2**k for k in range(11))
    assert doubling_index_set(5) == (1, 2, 4)
    with pytest.raises(ValueError):
        doubling_index_set(0)


class TestWeibullShape:
    def test_second_moment_converges(self, weibull_report):
        errs = weibull_report.column(2.0)
        assert weibull_report.rows[-1].n == 1024
        assert errs[-1] < 0.02
        assert np.all(np.diff(errs[-5:]) < 0)

    def test_moment_errors_match_gamma(self, weibull_report):
        for row in weibull_report.rows:
            k = 1 + 1 / row.n
            assert row.moment_errors[2.0] == pytest.approx(abs(math.gamma(1 + 2 / k) - 2), rel=1e-7, abs=1e-12)
        assert weibull_report.column(2.0)[-1] == pytest.approx(0.0035963682, rel=1e-6)

    @pytest.mark.parametrize("r", [1.0, 2.0, 3.0])
    def test_every_column_eventually_decreases(self, weibull_report, r):
        assert np.all(np.diff(weibull_report.column(r)[-5:]) < 0)

    def test_law_and_moments_converge_together(self, weibull_report):
        sup = np.array([row.cdf_sup_distance for row in weibull_report.rows])
        assert np.all(sup >= 0)
        assert np.all(np.diff(sup[-5:]) < 0)
        assert sup[-1] < 1e-3

    def test_limit(self, weibull_report):
        assert weibull_report.limit_verdict.label in (AgeingClass.EXPONENTIAL, AgeingClass.NBUE)
        assert weibull_report.limit_moments[2.0] == pytest.approx(2.0, rel=1e-9)
        assert weibull_report.family is Family.WEIBULL_SHAPE


def test_exponential_mean_sequence():
    report = run_convergence(exponential_mean_sequence(doubling_index_set(256)), (2.0,))
    sup = np.array([row.cdf_sup_distance for row in report.rows])
    assert np.all(np.diff(sup) < 0)
    assert sup[-1] < 2e-3
    assert report.limit_verdict.label is AgeingClass.EXPONENTIAL
    assert [row.n for row in report.rows] == sorted(row.n for row in report.rows)


def test_constant_sequence_has_no_error():
    d = catalog("weibull", shape=2.0)
    report = run_convergence(custom_sequence([d] * 4, d), (0.5, 2.0))
    for row in report.rows:
        assert row.mean_error == 0.0
        assert row.cdf_sup_distance == 0.0
        assert all(err == 0.0 for err in row.moment_errors.values())


def test_non_nbue_member_is_rejected():
    members = [catalog("exponential"), catalog("example_3_1")]
    with pytest.raises(HypothesisViolation) as info:
        run_convergence(custom_sequence(members, catalog("exponential"), index_set=(3, 7)), (2.0,))
    assert info.value.n == 7
    assert "n=7" in str(info.value)


def test_member_check_can_be_skipped():
    members = [catalog("example_3_1")]
    report = run_convergence(custom_sequence(members, catalog("exponential", mean=5.0)), (1.0,), check_members=False)
    assert report.rows[0].mean_error == 0.0


@pytest.mark.parametrize("orders", [(), (0.0,), (-1.0, 2.0)])
def test_orders_must_be_positive(orders):
    with pytest.raises(ValueError):
        run_convergence(exponential_mean_sequence((1, 2)), orders)


@pytest.mark.parametrize("index_set", [(), (2, 1), (1, 1)])
def test_index_set_must_increase(index_set):
    with pytest.raises(ValueError):
        SequenceSpec(Family.CUSTOM, index_set, catalog("exponential"), lambda n: catalog("exponential"))


def test_custom_needs_matching_indices():
    with pytest.raises(ValueError):
        custom_sequence([catalog("exponential")], catalog("exponential"), index_set=(1, 2))
