import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nbuekit.distributions import (
    CATALOG_NAMES,
    Builtin,
    EquilibriumDensity,
    FromMRL,
    LifeDistribution,
    MRLSpec,
    MRLValidationError,
    Segment,
    SupportExceededError,
    catalog,
    default_horizon,
    from_mrl,
    mean_of,
    moment,
    mrl_catalog,
    mrl_of,
    mrl_on_grid,
    tail_integral,
)

PIECEWISE = ("example_3_1", "example_3_3", "example_3_4")


def all_members():
    return [
        catalog("exponential", mean=0.5),
        catalog("exponential", mean=1.0),
        catalog("exponential", mean=2.0),
        catalog("weibull", shape=1.5),
        catalog("weibull", shape=2.0),
        catalog("weibull", shape=3.0, scale=2.0),
        catalog("uniform", upper=1.0),
        *(catalog(n) for n in PIECEWISE),
    ]


MEMBERS = all_members()
IDS = [d.name for d in MEMBERS]


class TestCatalog:
    def test_example_3_1_closed_form_at_knot(self):
        assert catalog("example_3_1").survival(28.0) == pytest.approx(25 / (9 * 2**10), rel=1e-13)

    def test_exponential_starts_at_one(self):
        assert catalog("exponential", mean=1.0).survival(0.0) == 1.0

    def test_example_3_3_closed_form(self):
        assert catalog("example_3_3").survival(4.0) == pytest.approx(3 / 16, rel=1e-14)

    def test_unknown_name_lists_catalog(self):
        with pytest.raises(ValueError, match="example_3_4"):
            catalog("gompertz")

    def test_example_3_2_is_unit_weibull(self):
        d = catalog("example_3_2")
        assert d.mean == pytest.approx(math.sqrt(math.pi) / 2)
        assert d.survival(1.0) == pytest.approx(math.exp(-1))

    def test_weibull_rejects_heavy_tails(self):
        with pytest.raises(ValueError):
            catalog("weibull", shape=0.5)

    @pytest.mark.parametrize("name", CATALOG_NAMES)
    def test_every_name_builds(self, name):
        assert isinstance(catalog(name), LifeDistribution)

    @pytest.mark.parametrize("name", PIECEWISE)
    def test_closed_form_is_continuous_at_knots(self, name):
        d = catalog(name)
        for k in d.knots:
            assert d.survival(k - 1e-12) == pytest.approx(d.survival(k + 1e-12), abs=1e-10)


class TestLifeDistribution:
    def test_survival_outside_support(self):
        d = catalog("uniform", upper=2.0)
        assert d.survival(-1.0) == 1.0
        assert d.survival(2.0) == 0.0
        assert d.survival(5.0) == 0.0
        assert np.allclose(d.survival([0.0, 1.0, 3.0]), [1.0, 0.5, 0.0])

    def test_scalar_in_scalar_out(self):
        assert isinstance(catalog("exponential").survival(1.0), float)

    @pytest.mark.parametrize("kwargs", [dict(mean=0.0, tail_rate=1.0), dict(mean=1.0, tail_rate=0.0),
                                        dict(mean=1.0, tail_rate=math.inf)])
    def test_rejects_bad_fields(self, kwargs):
        with pytest.raises(ValueError):
            LifeDistribution(sf=lambda x: np.exp(-x), **kwargs)

    def test_rejects_survival_not_one_at_zero(self):
        with pytest.raises(ValueError):
            LifeDistribution(sf=lambda x: 0.5 * np.exp(-x), mean=0.5, tail_rate=1.0)

    def test_scaled(self):
        d = catalog("example_3_1").scaled(2.0)
        base = catalog("example_3_1")
        assert d.mean == 10.0
        assert d.knots == (2.0, 56.0)
        assert d.survival(20.0) == pytest.approx(base.survival(10.0))

    @pytest.mark.parametrize("d", MEMBERS, ids=IDS)
    def test_survival_nonincreasing(self, d):
        rng = np.random.default_rng(7)
        pairs = np.sort(rng.uniform(0, default_horizon(d), size=(1000, 2)), axis=1)
        assert np.all(d.survival(pairs[:, 0]) >= d.survival(pairs[:, 1]) - 1e-12)

    @pytest.mark.parametrize("d", MEMBERS, ids=IDS)
    def test_survival_in_unit_interval(self, d):
        xs = np.linspace(0, 2 * default_horizon(d), 500)
        s = d.survival(xs)
        assert np.all((s >= 0) & (s <= 1))


class TestFromMRL:
    def test_example_3_4_value(self):
        assert from_mrl(mrl_catalog("example_3_4")).survival(2.0) == pytest.approx(10 / 27, abs=1e-12)

    def test_example_3_1_at_zero(self):
        assert from_mrl(mrl_catalog("example_3_1")).survival(0.0) == 1.0

    @pytest.mark.parametrize("mu", [0.5, 1.0, 3.0])
    def test_constant_is_exponential(self, mu):
        d = from_mrl(MRLSpec.constant(mu))
        assert d.survival(mu) == pytest.approx(math.exp(-1), rel=1e-14)
        assert d.mean == mu
        assert isinstance(d.origin, FromMRL)

    @pytest.mark.parametrize("name", PIECEWISE)
    def test_matches_closed_form(self, name):
        inverted, closed = from_mrl(mrl_catalog(name)), catalog(name)
        xs = np.linspace(0, default_horizon(closed), 200)
        assert np.max(np.abs(inverted.survival(xs) - closed.survival(xs))) <= 1e-8
        assert inverted.knots == closed.knots

    @pytest.mark.parametrize("name", PIECEWISE + ("exponential",))
    def test_round_trip(self, name):
        spec = mrl_catalog(name)
        d = from_mrl(spec)
        xs = np.linspace(0, default_horizon(d), 200)
        err = max(abs(mrl_of(d, x) - float(spec(x))) for x in xs)
        assert err <= 1e-7

    def test_finite_support(self):
        d = from_mrl(mrl_catalog("uniform", upper=2.0))
        assert d.support_end == 2.0
        assert d.survival(1.0) == pytest.approx(0.5)

    def test_rejects_invalid_spec(self):
        spec = MRLSpec((Segment(0.0, 1.0, "affine", 2.0, -1.5), Segment(1.0, math.inf, "affine", 0.5, 0.0)))
        with pytest.raises(MRLValidationError) as info:
            from_mrl(spec)
        assert "V2" in info.value.report.conditions()

    def test_rejects_unbounded_increasing_tail(self):
        with pytest.raises(ValueError):
            from_mrl(MRLSpec((Segment(0.0, math.inf, "affine", 1.0, 0.5),)))

    @settings(max_examples=30, deadline=None)
    @given(a=st.floats(0.2, 5), b=st.floats(0, 3), k=st.floats(0.2, 4), tail=st.floats(0.2, 5))
    def test_round_trip_random_two_piece(self, a, b, k, tail):
        # increasing then constant at a value reachable without a jump
        level = a + b * k
        spec = MRLSpec((Segment(0.0, k, "affine", a, b), Segment(k, math.inf, "affine", level, 0.0)))
        d = from_mrl(spec)
        for x in np.linspace(0, default_horizon(d), 15):
            assert mrl_of(d, x) == pytest.approx(float(spec(x)), rel=1e-7, abs=1e-7)


class TestMRLSpec:
    def test_must_start_at_zero(self):
        with pytest.raises(ValueError):
            MRLSpec((Segment(1.0, math.inf, "affine", 1.0, 0.0),))

    def test_must_be_contiguous(self):
        with pytest.raises(ValueError):
            MRLSpec((Segment(0.0, 1.0, "affine", 1.0, 0.0), Segment(2.0, math.inf, "affine", 1.0, 0.0)))

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            Segment(0.0, 1.0, "quadratic", 1.0, 0.0)

    def test_dict_round_trip(self):
        spec = mrl_catalog("example_3_4")
        assert MRLSpec.from_dicts(spec.to_dicts()) == spec

    def test_evaluation(self):
        spec = mrl_catalog("example_3_4")
        assert np.allclose(spec([0.0, 1.0, 2.0, 4.0]), [2.0, 3.0, 2.5, 1.75])

    @pytest.mark.parametrize("seg", [
        Segment(0.5, 4.0, "affine", 2.0, 0.7),
        Segment(0.0, 3.0, "affine", 2.0, -0.4),
        Segment(1.0, 9.0, "reciprocal", 1.0, 3.0),
        Segment(1.0, 9.0, "reciprocal", 0.0, 2.0),
        Segment(0.0, 1.0, "affine", 1.0, 5e-324),
        Segment(0.0, 1.0, "affine", 1.0, 1e-9),
        Segment(1.0, 9.0, "reciprocal", 1e-12, 3.0),
    ])
    def test_inverse_integral_closed_form(self, seg):
        from nbuekit.numerics import integrate
        for x in np.linspace(seg.start, min(seg.end, 9.0), 7)[1:]:
            numeric = integrate(lambda u: 1.0 / seg(u), seg.start, x, 1e-13).value
            assert float(seg.inverse_integral(x)) == pytest.approx(numeric, rel=1e-11)


class TestMRLAndMoments:
    def test_exponential_memoryless(self):
        d = catalog("exponential", mean=5.0)
        for x in (0.0, 3.0, 40.0):
            assert mrl_of(d, x) == pytest.approx(5.0, rel=1e-9)

    def test_example_3_1_tail(self):
        assert mrl_of(catalog("example_3_1"), 30.0) == pytest.approx(3.0, rel=1e-9)

    def test_example_3_4_reciprocal(self):
        assert mrl_of(catalog("example_3_4"), 4.0) == pytest.approx(1.75, rel=1e-9)

    def test_support_exceeded(self):
        with pytest.raises(SupportExceededError):
            mrl_of(catalog("uniform"), 1.0)

    def test_grid_matches_pointwise(self):
        d = catalog("example_3_3")
        xs = np.linspace(0, 20, 41)
        grid = mrl_on_grid(d, xs)
        assert np.allclose(grid, [mrl_of(d, x) for x in xs], rtol=1e-9)

    @pytest.mark.parametrize("d, r, expected", [
        (catalog("weibull", shape=2.0), 2, 1.0),
        (catalog("exponential", mean=1.0), 3, 6.0),
        (catalog("example_3_1"), 2, 54.1209606522),
        (catalog("example_3_1"), 3, 811.512117206),
        (catalog("example_3_3"), 2, 12.0035107778),
        (catalog("example_3_3"), 3, 112.478935333),
        (catalog("example_3_4"), 2, 9.00503773729),
        (catalog("example_3_4"), 3, 52.93273653920),
    ])
    def test_moment_oracles(self, d, r, expected):
        # reference values computed independently with mpmath
        assert moment(d, r) == pytest.approx(expected, rel=1e-9)

    def test_example_3_1_published_moment(self):
        assert abs(moment(catalog("example_3_1"), 2, tol=1e-8) - 54.1210) <= 0.05

    @pytest.mark.parametrize("r", [0.3, 0.5, 1.0, 1.5, 2.5, 4.0])
    @pytest.mark.parametrize("mu", [0.5, 2.0])
    def test_exponential_moments(self, r, mu):
        assert moment(catalog("exponential", mean=mu), r) == pytest.approx(math.gamma(r + 1) * mu**r, rel=1e-6)

    @pytest.mark.parametrize("r", [0.5, 1.5, 2.0, 3.0])
    @pytest.mark.parametrize("k", [1.5, 2.0, 3.0])
    def test_weibull_moments(self, r, k):
        assert moment(catalog("weibull", shape=k), r) == pytest.approx(math.gamma(1 + r / k), rel=1e-9)

    def test_moment_needs_positive_order(self):
        with pytest.raises(ValueError):
            moment(catalog("exponential"), 0.0)

    @pytest.mark.parametrize("name, expected", [
        ("example_3_3", 2.0), ("example_3_1", 5.0), ("example_3_2", math.sqrt(math.pi) / 2),
    ])
    def test_mean_of(self, name, expected):
        assert mean_of(catalog(name)) == pytest.approx(expected, rel=1e-9)

    @pytest.mark.parametrize("d", MEMBERS, ids=IDS)
    def test_first_moment_is_mean(self, d):
        assert moment(d, 1) == pytest.approx(mean_of(d), rel=1e-8)
        assert mean_of(d) == pytest.approx(d.mean, rel=1e-8)

    @pytest.mark.parametrize("d", MEMBERS, ids=IDS)
    def test_equilibrium_density_total(self, d):
        eq = EquilibriumDensity(d)
        assert eq.total() == pytest.approx(1.0, abs=1e-8)
        assert np.all(eq.density(np.linspace(0, 10, 50)) >= 0)

    @pytest.mark.parametrize("d", MEMBERS, ids=IDS)
    def test_mrl_at_zero_is_mean(self, d):
        assert mrl_of(d, 0.0) == pytest.approx(d.mean, rel=1e-9)


@pytest.mark.parametrize("d", MEMBERS, ids=IDS)
def test_default_horizon(d):
    h = default_horizon(d)
    assert d.survival(h) < 1e-9
    assert tail_integral(d, h).value < 1e-8 * max(1.0, d.mean)


def test_builtin_origin():
    assert catalog("weibull", shape=3.0).origin == Builtin("weibull", (("shape", 3.0), ("scale", 1.0)))
