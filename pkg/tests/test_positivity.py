from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spherecurv import curvature_core as cc
from spherecurv import positivity as pos
from spherecurv.errors import NotPositivelyCurvedError
from spherecurv.params import MetricParams

BOUNDARY = MetricParams(0.25, 0.25, 0.325)


def test_round_metric_is_positive():
    assert isinstance(pos.classify(MetricParams(1, 1, 1)), pos.PositiveCurvature)


def test_example_metric_is_mixed_with_binding_index_three():
    v = pos.classify(MetricParams(0.25, 0.25, 0.33))
    assert isinstance(v, pos.MixedCurvature)
    assert v.binding_index == 3
    assert v.margin < 0


def test_outside_cone_lists_failing_constraints():
    v = pos.classify(MetricParams(1.5, 1, 1))
    assert isinstance(v, pos.OutsideCone)
    assert set(v.failing) == {"V1", "H1"}


def test_boundary_point_in_exact_arithmetic():
    t = (Fraction(1, 4), Fraction(1, 4), Fraction(13, 40))
    V, H, L, _ = pos.invariant_values(*t, 3)
    assert (V, H, L) == (Fraction(1, 40), Fraction(121, 40), Fraction(-27, 40))
    # |L3| = 2 (t1 t2 + sqrt(H3 V3)); H3 V3 = (11/40)^2 is a perfect square
    assert H * V == Fraction(11, 40) ** 2
    assert abs(L) == 2 * (t[0] * t[1] + Fraction(11, 40))


def test_boundary_verdict_and_zero_planes():
    v = pos.classify(BOUNDARY)
    assert isinstance(v, pos.Boundary)
    assert v.binding_index == 3
    (fam,) = v.zero_plane_families
    assert fam.Z == pytest.approx(16 / 11, rel=1e-12)
    assert fam.a4 ** 2 == pytest.approx(16 / 27, rel=1e-12)
    planes = fam.plane(np.linspace(0, 2 * np.pi, 64, endpoint=False))
    assert np.max(np.abs(cc.sectional_reduced(BOUNDARY, planes))) < 1e-12


def test_zero_planes_require_boundary():
    with pytest.raises(NotPositivelyCurvedError):
        pos.zero_planes(MetricParams(1, 1, 1))
    assert len(pos.zero_planes(BOUNDARY)) == 1


def test_quad_roots_double_root_on_boundary():
    q = pos.quad_roots(BOUNDARY, 3)
    assert q.double_root
    assert q.positive_roots == pytest.approx((16 / 11,), rel=1e-9)


def test_quad_roots_behaviour_off_boundary():
    assert pos.quad_roots(MetricParams(1, 1, 1), 1).positive_roots == ()
    mixed = pos.quad_roots(MetricParams(0.25, 0.25, 0.33), 3)
    assert len(mixed.positive_roots) == 2
    with pytest.raises(NotPositivelyCurvedError):
        pos.quad_roots(MetricParams(1.5, 1, 1), 1)
    with pytest.raises(ValueError):
        pos.quad_roots(BOUNDARY, 4)


def test_boundary_margin_is_where_the_quadratic_has_a_positive_root():
    # on the cone, the margin is negative exactly when a Z > 0 makes the reduced quadratic vanish
    rng = np.random.default_rng(3)
    checked = 0
    while checked < 50:
        p = MetricParams(*rng.uniform(0.05, 1.3, 3))
        v = pos.classify(p)
        if isinstance(v, pos.OutsideCone):
            continue
        has_root = any(pos.quad_roots(p, i).positive_roots for i in (1, 2, 3))
        assert has_root == isinstance(v, pos.MixedCurvature)
        checked += 1


@settings(max_examples=60, deadline=None)
@given(st.tuples(*[st.floats(0.02, 1.6)] * 3), st.integers(1, 2))
def test_classification_is_cyclically_covariant(t, shift):
    p = MetricParams(*t)
    v, w = pos.classify(p), pos.classify(p.permuted(shift))
    assert v.name == w.name
    if hasattr(v, "binding_index"):
        assert (v.binding_index - 1 - shift) % 3 == w.binding_index - 1


@settings(max_examples=60, deadline=None)
@given(st.tuples(*[st.floats(0.02, 1.6)] * 3))
def test_at_most_one_negative_E_in_cone(t):
    p = MetricParams(*t)
    if isinstance(pos.classify(p), pos.OutsideCone):
        return
    assert sum(e < 0 for e in pos.invariants(p).E) <= 1


def test_surfaces_and_gap():
    t1, t2 = 0.3, 0.6
    top = pos.surface_t3(t1, t2, "V3_zero")
    assert top == pytest.approx(pos.v3_zero_closed_form(t1, t2), abs=1e-9)
    low = pos.surface_t3(t1, t2, "L3_boundary")
    assert low <= top
    assert isinstance(pos.classify(MetricParams(t1, t2, low)), pos.Boundary)
    assert pos.surface_gap(t1, t2) == pytest.approx(top - low)


def test_gap_vanishes_on_the_separating_curve():
    for t1 in (0.1, 0.3, 0.5):
        assert pos.surface_gap(t1, float(pos.separating_curve_t2(t1))) < 1e-6
        assert pos.separating_curve_residual(t1, pos.separating_curve_t2(t1)) == pytest.approx(0, abs=1e-12)


def test_surface_rejects_bad_input():
    with pytest.raises(ValueError):
        pos.surface_t3(0.3, 0.3, "V1_zero")
    with pytest.raises(ValueError):
        pos.surface_t3(1.2, 1.3, "V3_zero")


def test_slice_curve_values():
    assert pos.slice_curve(0.0) == 0.0
    assert pos.slice_curve(0.5) == pytest.approx(2 / 3, abs=1e-15)
    assert pos.slice_curve(0.25) == pytest.approx(0.325, abs=1e-15)
    with pytest.raises(ValueError):
        pos.slice_curve(0.6)


def test_invariant_values_with_fractions_match_floats():
    t = (Fraction(1, 3), Fraction(2, 5), Fraction(7, 6))
    exact = pos.invariant_values(*t, 2)
    approx = pos.invariants(MetricParams(*map(float, t))).at(2)
    assert [float(x) for x in exact] == pytest.approx(list(approx), rel=1e-14)
    assert math.isclose(float(exact[1]), 4 - 3 * 0.4)
