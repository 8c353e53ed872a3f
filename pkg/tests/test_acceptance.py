"""Acceptance criteria, one test per criterion.

The conftest hook prints a PASS/FAIL line per criterion at the end of the run.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from spherecurv import curvature_core as cc
from spherecurv import lie_oracle as lo
from spherecurv import optimizer as opt
from spherecurv import pinching as pin
from spherecurv import positivity as pos
from spherecurv.params import BergerParam, BergerPlane, MetricParams, ReducedPlane

CONFIG = opt.OptimizerConfig(seed=2024)


def _random_in_cone(rng, count, positive=None):
    out = []
    while len(out) < count:
        p = MetricParams(*rng.uniform(0.02, 4 / 3, 3))
        v = pos.classify(p)
        if isinstance(v, pos.OutsideCone):
            continue
        if positive is None or positive == isinstance(v, pos.PositiveCurvature):
            out.append(p)
    return out


def test_criterion_01_round_metric_constancy():
    rng = np.random.default_rng(1)
    round_sp, round_spin = MetricParams(1, 1, 1), BergerParam(1.0, 7)
    sp2, spin = lo.build_basis("sp", 2), lo.build_basis("spin", 9)

    a, b = rng.normal(size=(200, 4)), rng.normal(size=(200, 8))
    b[:, 7] = 0.0  # sp(2) has no U12 direction
    closed = cc.sectional_reduced(round_sp, ReducedPlane(a, b))
    assert np.max(np.abs(closed - 1)) <= 1e-9
    closed = cc.berger_sectional(round_spin, BergerPlane(a, b[:, :6]))
    assert np.max(np.abs(closed - 1)) <= 1e-9

    for params, basis in ((round_sp, sp2), (round_spin, spin)):
        worst = 0.0
        for _ in range(200):
            x, y = rng.normal(size=(2, basis.dim))
            worst = max(worst, abs(lo.oracle_sectional(params, basis.element(x), basis.element(y)) - 1))
        assert worst <= 1e-9


def test_criterion_02_component_table_matches_oracle():
    rng = np.random.default_rng(2)
    basis = lo.build_basis("sp", 3)
    worst = 0.0
    for _ in range(20):
        params = MetricParams(*rng.uniform(0.05, 1.5, 3))
        R = lo.curvature_tensor(params, basis)
        for e in cc.component_table(params, 3):
            worst = max(worst, abs(R[tuple(basis.index(lab) for lab in e.indices)] - e.value))
    assert worst <= 1e-9


@pytest.mark.parametrize("fiber", [3, 7])
def test_criterion_03_berger_positivity_range(fiber):
    positive = [round(0.05 * k, 2) for k in range(1, 27)]
    for t in positive + [1.35, 1.4]:
        low = opt.extremize(BergerParam(t, fiber), CONFIG, which="min").min_value
        if t < 4 / 3:
            assert low > 0, (t, low)
        else:
            assert low < 0, (t, low)


@pytest.mark.parametrize("fiber", [3, 7])
def test_criterion_04_pinching_formulas(fiber):
    for t in np.linspace(0.05, 1.3, 30):
        rep = opt.extremize(BergerParam(t, fiber), CONFIG)
        assert rep.min_value / rep.max_value == pytest.approx(pin.pinching_delta(t), abs=1e-4), t
    assert pin.pinching_delta(0.2) == pytest.approx(0.04, abs=1e-15)
    grid = np.linspace(0.8, 4 / 3, 4001)[:-1]
    diff = max(pin.natural_delta(t) - pin.pinching_delta(t) for t in grid)
    assert 0.003 < diff < 0.008


def test_criterion_05_classifier_vs_sampling():
    rng = np.random.default_rng(5)
    for p in _random_in_cone(rng, 50, positive=True):
        cert = opt.certify_positive(p, CONFIG)
        assert cert.certified_positive, (p, cert.min_value)
    example = MetricParams(0.25, 0.25, 0.33)
    cert = opt.certify_positive(example, CONFIG)
    assert not cert.certified_positive
    assert cc.sectional_reduced(example, cert.plane) < 0
    plane = ReducedPlane([4, 0, 0, 0.7], [0, 4, 0, 0, 0, 0, 0.7, 0])
    value = cc.sectional_reduced(example, plane)
    assert value < 0
    X, Y = lo.embed_reduced_plane(plane, lo.build_basis("sp", 2))
    assert value == pytest.approx(lo.oracle_sectional(example, X, Y), abs=1e-10)


def test_criterion_06_boundary_zero_planes():
    t1, t2, t3 = Fraction(1, 4), Fraction(1, 4), Fraction(13, 40)
    V, H, L, _ = pos.invariant_values(t1, t2, t3, 3)
    root = Fraction(11, 40)
    assert root * root == H * V
    assert abs(L) == 2 * (t1 * t2 + root) == Fraction(27, 40)
    Z = root / (H * t1 * t2)  # sqrt(V/H) / (t1 t2) with sqrt(H V) exact
    assert Z == Fraction(16, 11)

    params = MetricParams(0.25, 0.25, 0.325)
    verdict = pos.classify(params)
    assert isinstance(verdict, pos.Boundary)
    fam = verdict.zero_plane_families[0]
    assert fam.Z == pytest.approx(16 / 11, rel=1e-12)
    theta = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    assert np.max(np.abs(cc.sectional_reduced(params, fam.plane(theta)))) <= 1e-8
    low = opt.extremize(params, CONFIG, which="min").min_value
    assert -1e-6 <= low <= 1e-4


def test_criterion_07_E1_positive():
    g = np.linspace(0, 4 / 3, 61)[1:]
    t1, t2, t3 = np.meshgrid(g, g, g, indexing="ij")
    mask = t1 <= t2
    _, _, _, E = pos.invariant_values(t1[mask], t2[mask], t3[mask], 1)
    assert np.all(E > 0)


def test_criterion_08_figure6_gap():
    g = np.linspace(0, 4 / 3, 202)[1:-1]
    gaps = []
    for a in g:
        for b in g:
            try:
                gaps.append(pos.surface_gap(a, b))
            except ValueError:
                pass
    assert 0.007 < max(gaps) < 0.009
    for a in np.linspace(0.05, 0.7, 10):
        b = float(pos.separating_curve_t2(a))
        assert pos.surface_gap(a, b) < 1e-3


def test_criterion_09_figure7_slice():
    assert pos.slice_curve(0.0) == pytest.approx(0.0, abs=1e-6)
    assert pos.slice_curve(0.5) == pytest.approx(2 / 3, abs=1e-6)
    t = np.linspace(0.01, 0.49, 200)
    assert np.all(pos.slice_curve(t) < 4 * t / 3)
    for s in np.linspace(0.02, 0.48, 20):
        assert isinstance(pos.classify(MetricParams(s, s, pos.slice_curve(s))), pos.Boundary), s


def test_criterion_10_isotropy_reduction():
    rng = np.random.default_rng(10)
    for p in _random_in_cone(rng, 10):
        assert opt.reduction_check(p, CONFIG) <= 1e-5, p
    for t in (0.3, 0.6, 0.9, 1.1, 1.3):
        assert opt.reduction_check(BergerParam(t, 7), CONFIG) <= 1e-5, t


def test_criterion_11_b8_reduction():
    rng = np.random.default_rng(11)
    for p in _random_in_cone(rng, 10):
        free = opt.extremize(p, CONFIG.replace(space="reduced_sp"), which="min").min_value
        fixed = opt.extremize(p, CONFIG.replace(space="reduced_s7"), which="min").min_value
        assert free == pytest.approx(fixed, abs=1e-6), p
        assert not math.isnan(free)
