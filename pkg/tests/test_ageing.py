import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nbuekit.ageing import (
    AgeingClass,
    ClassVerdict,
    MRLShape,
    MRLShapeVerdict,
    MRLValidityReport,
    Violation,
    classify_crossing,
    classify_mrl_shape,
    resolve_idmrl,
    validate_mrl,
)
from nbuekit.distributions import MRLSpec, Segment, catalog, from_mrl, mrl_catalog, mrl_on_grid

TOL = 1e-9


def dimrl_spec():
    # dips to 1.5 at x=1, climbs back through the mean 2 at x=2, levels off at 2.5
    return MRLSpec((
        Segment(0.0, 1.0, "affine", 2.0, -0.5),
        Segment(1.0, 3.0, "affine", 1.0, 0.5),
        Segment(3.0, math.inf, "affine", 2.5, 0.0),
    ))


class TestValidateMRL:
    @pytest.mark.parametrize("name", ["example_3_1", "example_3_3", "example_3_4", "exponential"])
    def test_accepts_printed_displays(self, name):
        report = validate_mrl(mrl_catalog(name))
        assert report.valid
        assert report.violations == ()

    def test_rejects_steep_drift(self):
        spec = MRLSpec((Segment(0.0, 1.0, "affine", 2.0, -1.5), Segment(1.0, math.inf, "affine", 0.5, 0.0)))
        report = validate_mrl(spec)
        assert not report.valid
        assert "V2" in report.conditions()
        assert any(v.condition == "V2" and v.location == "[0, 1]" for v in report.violations)

    def test_constant_is_valid(self):
        assert validate_mrl(MRLSpec.constant(3.0)).valid

    def test_positivity(self):
        spec = MRLSpec((Segment(0.0, 1.0, "affine", 0.5, -0.9), Segment(1.0, math.inf, "affine", 1.0, 0.0)))
        assert "V1" in validate_mrl(spec).conditions()

    def test_continuity(self):
        spec = MRLSpec((Segment(0.0, 1.0, "affine", 1.0, 0.0), Segment(1.0, math.inf, "affine", 2.0, 0.0)))
        assert validate_mrl(spec).conditions() == {"V3"}

    def test_tail_decreasing_to_infinity(self):
        spec = MRLSpec((Segment(0.0, math.inf, "affine", 1.0, -0.1),))
        assert "V4" in validate_mrl(spec).conditions()

    def test_finite_support_must_end_at_zero(self):
        spec = MRLSpec((Segment(0.0, 1.0, "affine", 1.0, -0.5),))
        assert "V4" in validate_mrl(spec).conditions()

    def test_uniform_is_valid(self):
        assert validate_mrl(mrl_catalog("uniform", upper=2.0)).valid

    def test_reciprocal_tail_with_negative_level(self):
        spec = MRLSpec((Segment(0.0, 1.0, "affine", 1.5, 0.0), Segment(1.0, math.inf, "reciprocal", -0.5, 2.0)))
        assert "V4" in validate_mrl(spec).conditions()

    def test_pure_reciprocal_tail_is_valid(self):
        # e = 1/x still has a divergent integral of 1/e
        spec = MRLSpec((Segment(0.0, 1.0, "affine", 1.0, 0.0), Segment(1.0, math.inf, "reciprocal", 0.0, 1.0)))
        assert validate_mrl(spec).valid

    def test_report_invariant(self):
        assert MRLValidityReport().valid
        assert not MRLValidityReport((Violation("V1", "[0, 1]", "negative"),)).valid

    @settings(max_examples=50, deadline=None)
    @given(slope=st.floats(-3, 2), a=st.floats(3.5, 6))
    def test_drift_condition_tracks_slope(self, slope, a):
        level = a + slope
        spec = MRLSpec((Segment(0.0, 1.0, "affine", a, slope), Segment(1.0, math.inf, "affine", level, 0.0)))
        assert ("V2" in validate_mrl(spec).conditions()) == (slope < -1 - TOL)


class TestClassifyCrossing:
    def test_example_3_1(self):
        v = classify_crossing(catalog("example_3_1"))
        assert v.label is AgeingClass.NWBUE
        assert v.change_point == pytest.approx(10.0, abs=1e-6)
        assert v.pattern == "+-"
        assert v.mu == 5.0

    def test_example_3_3(self):
        v = classify_crossing(catalog("example_3_3"))
        assert v.label is AgeingClass.NWUE
        assert v.change_point is None

    def test_weibull_is_nbue(self):
        assert classify_crossing(catalog("example_3_2")).label is AgeingClass.NBUE

    def test_example_3_4(self):
        v = classify_crossing(catalog("example_3_4"))
        assert v.label is AgeingClass.NWBUE
        assert v.change_point == pytest.approx(3.0, abs=1e-6)

    def test_exponential(self):
        assert classify_crossing(catalog("exponential", mean=2.0)).label is AgeingClass.EXPONENTIAL

    def test_uniform_is_nbue(self):
        assert classify_crossing(catalog("uniform")).label is AgeingClass.NBUE

    def test_dual_class(self):
        v = classify_crossing(from_mrl(dimrl_spec()))
        assert v.label is AgeingClass.NBWUE
        assert v.change_point == pytest.approx(2.0, abs=1e-6)

    def test_short_horizon_is_extended(self):
        d = catalog("example_3_1")
        v = classify_crossing(d, horizon=5.0)
        assert d.survival(v.horizon) < 1e-9
        assert v.change_point == pytest.approx(10.0, abs=1e-6)

    @pytest.mark.parametrize("c", [0.5, 2.0, 3.0])
    def test_scale_equivariance(self, c):
        base = classify_crossing(catalog("example_3_1"))
        scaled = classify_crossing(catalog("example_3_1").scaled(c))
        assert scaled.label is base.label
        assert scaled.change_point == pytest.approx(c * base.change_point, abs=1e-6 * c)

    @pytest.mark.parametrize("d", [catalog("example_3_2"), catalog("weibull", shape=3.0),
                                   catalog("example_3_3"), catalog("uniform")], ids=lambda d: d.name)
    def test_verdict_matches_grid(self, d):
        v = classify_crossing(d)
        e = mrl_on_grid(d, v.grid)
        slack = TOL * max(1.0, float(np.max(np.abs(e - d.mean))))
        if v.label is AgeingClass.NBUE:
            assert np.all(e <= d.mean + slack)
        if v.label is AgeingClass.NWUE:
            assert np.all(e >= d.mean - slack)

    def test_verdict_invariants(self):
        with pytest.raises(ValueError):
            ClassVerdict(AgeingClass.NBUE, 1.0, 1.0, 10.0, (1.0,))
        with pytest.raises(ValueError):
            ClassVerdict(AgeingClass.NWBUE, None, 1.0, 10.0)
        with pytest.raises(ValueError):
            ClassVerdict(AgeingClass.NWBUE, 2.0, 1.0, 10.0, (1.0,))
        with pytest.raises(ValueError):
            ClassVerdict(AgeingClass.OTHER, None, 1.0, 10.0, (3.0, 1.0))


class TestShape:
    def test_example_3_3(self):
        s = classify_mrl_shape(catalog("example_3_3"))
        assert s.label is MRLShape.IDMRL
        assert s.turning_point == pytest.approx(2.0, abs=1e-6)

    def test_exponential_constant(self):
        assert classify_mrl_shape(catalog("exponential")).label is MRLShape.CONSTANT

    def test_example_3_4_golden(self):
        # recorded from the implementation: the MRL peaks at the first knot
        s = classify_mrl_shape(catalog("example_3_4"))
        assert s.label is MRLShape.IDMRL
        assert s.turning_point == pytest.approx(1.0, abs=1e-6)

    def test_weibull_decreasing(self):
        assert classify_mrl_shape(catalog("example_3_2")).label is MRLShape.DECREASING

    def test_dimrl(self):
        s = classify_mrl_shape(from_mrl(dimrl_spec()))
        assert s.label is MRLShape.DIMRL
        assert s.turning_point == pytest.approx(1.0, abs=1e-6)

    def test_smooth_turning_point(self):
        # no knots: the extremum is located by minimisation
        lognormalish = from_mrl(MRLSpec((
            Segment(0.0, 1.0, "affine", 1.0, 1.0),
            Segment(1.0, math.inf, "reciprocal", 1.0, 1.0),
        )))
        s = classify_mrl_shape(lognormalish)
        assert s.label is MRLShape.IDMRL
        assert s.turning_point == pytest.approx(1.0, abs=1e-6)

    def test_invariant(self):
        with pytest.raises(ValueError):
            MRLShapeVerdict(MRLShape.IDMRL, None)
        with pytest.raises(ValueError):
            MRLShapeVerdict(MRLShape.CONSTANT, 1.0)


class TestResolve:
    def test_example_3_3_has_no_crossing(self):
        d = catalog("example_3_3")
        v = resolve_idmrl(d, classify_mrl_shape(d))
        assert v.label is AgeingClass.NWUE
        assert v.change_point is None

    def test_example_3_4(self):
        d = catalog("example_3_4")
        v = resolve_idmrl(d, classify_mrl_shape(d))
        assert v.label is AgeingClass.NWBUE
        assert v.change_point == pytest.approx(3.0, abs=1e-6)

    def test_rejects_non_idmrl_shape(self):
        d = catalog("exponential")
        with pytest.raises(ValueError):
            resolve_idmrl(d, MRLShapeVerdict(MRLShape.CONSTANT))

    def test_dimrl_resolves_to_dual(self):
        d = from_mrl(dimrl_spec())
        v = resolve_idmrl(d, classify_mrl_shape(d))
        assert v.label is AgeingClass.NBWUE
        assert v.change_point == pytest.approx(2.0, abs=1e-6)

    @pytest.mark.parametrize("d", [
        catalog("example_3_1"), catalog("example_3_3"), catalog("example_3_4"),
        from_mrl(mrl_catalog("example_3_1")), from_mrl(dimrl_spec()),
    ], ids=lambda d: d.name)
    def test_agrees_with_crossing(self, d):
        shape = classify_mrl_shape(d)
        assert shape.label in (MRLShape.IDMRL, MRLShape.DIMRL)
        resolved, crossing = resolve_idmrl(d, shape), classify_crossing(d)
        assert resolved.label is crossing.label
        if crossing.change_point is None:
            assert resolved.change_point is None
        else:
            assert resolved.change_point == pytest.approx(crossing.change_point, abs=1e-6)


@settings(max_examples=15, deadline=None)
@given(peak=st.floats(0.5, 3.0), rise=st.floats(0.2, 1.0), fall=st.floats(0.05, 0.9))
def test_random_idmrl_resolution(peak, rise, fall):
    # e rises with slope `rise` to the peak, falls with slope `fall` to a floor, then stays flat
    mu = 1.0
    top = mu + rise * peak
    floor = 0.5
    end = peak + (top - floor) / fall
    d = from_mrl(MRLSpec((
        Segment(0.0, peak, "affine", mu, rise),
        Segment(peak, end, "affine", top + fall * peak, -fall),
        Segment(end, math.inf, "affine", floor, 0.0),
    )))
    shape = classify_mrl_shape(d)
    assert shape.label is MRLShape.IDMRL
    assert shape.turning_point == pytest.approx(peak, abs=1e-6)
    resolved, crossing = resolve_idmrl(d, shape), classify_crossing(d)
    assert resolved.label is crossing.label is AgeingClass.NWBUE
    expected = peak + (top - mu) / fall
    assert crossing.change_point == pytest.approx(expected, abs=1e-6)
    assert resolved.change_point == pytest.approx(expected, abs=1e-6)
