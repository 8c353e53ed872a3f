"""Positivity criterion for the ``(t1, t2, t3)`` family and its boundary geometry.

Indices ``i, j, k`` always run over cyclic permutations of ``(1, 2, 3)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.optimize import brentq

from .errors import NotPositivelyCurvedError
from .params import MetricParams, ReducedPlane

BOUNDARY_RTOL = 1e-9
ROOT_XTOL = 1e-10
T_MAX = 4.0 / 3.0


def _cyc(i: int) -> tuple[int, int, int]:
    return i, i % 3 + 1, (i + 1) % 3 + 1


def invariant_values(t1, t2, t3, i: int):
    """``(V_i, H_i, L_i, E_i)`` with plain arithmetic, so exact number types survive."""
    t = {1: t1, 2: t2, 3: t3}
    _, j, k = _cyc(i)
    ti, tj, tk = t[i], t[j], t[k]
    V = (tj**2 + tk**2 - 3 * ti**2 + 2 * ti * tj + 2 * ti * tk - 2 * tj * tk) / ti
    H = 4 - 3 * ti
    L = 6 * (tj * tk - tj - tk + ti)
    E = tj**2 * tk**2 + H * V - L**2 / 4
    return V, H, L, E


@dataclass(frozen=True)
class InvariantTriple:
    V: tuple[float, float, float]
    H: tuple[float, float, float]
    L: tuple[float, float, float]
    E: tuple[float, float, float]

    def at(self, i: int) -> tuple[float, float, float, float]:
        return self.V[i - 1], self.H[i - 1], self.L[i - 1], self.E[i - 1]


def invariants(params: MetricParams) -> InvariantTriple:
    vals = [invariant_values(*params.as_tuple(), i) for i in (1, 2, 3)]
    return InvariantTriple(*(tuple(float(v[n]) for v in vals) for n in range(4)))


def boundary_margins(params: MetricParams) -> np.ndarray:
    """``2 (t_j t_k + sqrt(H_i V_i)) - |L_i|`` for ``i = 1, 2, 3``; needs the cone."""
    inv = invariants(params)
    out = np.empty(3)
    for i in (1, 2, 3):
        _, j, k = _cyc(i)
        tj, tk = params.t[j - 1], params.t[k - 1]
        V, H, L, _ = inv.at(i)
        out[i - 1] = 2 * (tj * tk + math.sqrt(max(H * V, 0.0))) - abs(L)
    return out


@dataclass(frozen=True)
class PositiveCurvature:
    name = "PositiveCurvature"


@dataclass(frozen=True)
class MixedCurvature:
    binding_index: int
    margin: float
    violated_constraint: str
    name = "MixedCurvature"


@dataclass(frozen=True)
class OutsideCone:
    failing: tuple[str, ...]
    name = "OutsideCone"


@dataclass(frozen=True)
class QuadRoots:
    """Roots of ``t_j^2 t_k^2 H_i Z^2 + E_i Z + V_i``."""

    index: int
    coefficients: tuple[float, float, float]
    roots: tuple[float, ...]
    double_root: bool
    positive_roots: tuple[float, ...]


@dataclass(frozen=True)
class ZeroPlaneFamily:
    """Circle of zero-curvature planes at a boundary metric.

    ``X = c (cos(th)/t_j X_j + sin(th)/t_k X_k) + h U11`` and
    ``Y = c (-sin(th)/t_j X_j + cos(th)/t_k X_k) + sign h U_{(1+i)1}``
    with ``c = 1/sqrt(1+Z)`` and ``h = sqrt(Z/(1+Z))``.
    """

    binding_index: int
    Z: float
    sign: int
    params: MetricParams = field(repr=False)

    @property
    def a4(self) -> float:
        return math.sqrt(self.Z / (1 + self.Z))

    def plane(self, theta) -> ReducedPlane:
        theta = np.asarray(theta, dtype=float)
        i, j, k = _cyc(self.binding_index)
        tj, tk = self.params.t[j - 1], self.params.t[k - 1]
        c = 1.0 / math.sqrt(1 + self.Z)
        h = self.a4
        a = np.zeros(theta.shape + (4,))
        b = np.zeros(theta.shape + (8,))
        a[..., j - 1] = c * np.cos(theta) / tj
        a[..., k - 1] = c * np.sin(theta) / tk
        a[..., 3] = h
        b[..., j - 1] = -c * np.sin(theta) / tj
        b[..., k - 1] = c * np.cos(theta) / tk
        b[..., 3 + i] = self.sign * h
        return ReducedPlane(a, b)


@dataclass(frozen=True)
class Boundary:
    binding_index: int
    zero_plane_families: tuple[ZeroPlaneFamily, ...]
    name = "Boundary"


Verdict = Union[PositiveCurvature, Boundary, MixedCurvature, OutsideCone]


def _failing_cone(inv: InvariantTriple) -> tuple[str, ...]:
    out = []
    for i in (1, 2, 3):
        V, H, _, _ = inv.at(i)
        if V <= 0:
            out.append(f"V{i}")
        if H <= 0:
            out.append(f"H{i}")
    return tuple(out)


def classify(params: MetricParams, rtol: float = BOUNDARY_RTOL) -> Verdict:
    """Decide whether the metric has positive sectional curvature."""
    inv = invariants(params)
    failing = _failing_cone(inv)
    if failing:
        return OutsideCone(failing)
    margins = boundary_margins(params)
    scale = np.array([max(1.0, abs(inv.L[i])) for i in range(3)])
    rel = margins / scale
    worst = int(np.argmin(rel)) + 1
    if rel[worst - 1] < -rtol:
        return MixedCurvature(worst, float(margins[worst - 1]), f"|L{worst}| < 2(tj tk + sqrt(H{worst} V{worst}))")
    if rel[worst - 1] <= rtol:
        return Boundary(worst, tuple(_families(params, worst)))
    return PositiveCurvature()


def quad_roots(params: MetricParams, i: int, rtol: float = BOUNDARY_RTOL) -> QuadRoots:
    if i not in (1, 2, 3):
        raise ValueError(f"index must be 1, 2 or 3, got {i!r}")
    _, j, k = _cyc(i)
    tj, tk = params.t[j - 1], params.t[k - 1]
    V, H, L, E = invariants(params).at(i)
    qa, qb, qc = tj**2 * tk**2 * H, E, V
    if qa <= 0:
        raise NotPositivelyCurvedError(f"leading coefficient {qa:.3g} <= 0: H{i} is not positive")
    disc = qb * qb - 4 * qa * qc
    if abs(disc) <= rtol * max(qb * qb, 4 * qa * abs(qc)):
        roots: tuple[float, ...] = (-qb / (2 * qa),)
        double = True
    elif disc < 0:
        roots, double = (), False
    else:
        sq = math.sqrt(disc)
        # stable pair of roots
        q = -0.5 * (qb + math.copysign(sq, qb))
        r1 = q / qa
        r2 = qc / q if q != 0 else -r1
        roots, double = tuple(sorted((r1, r2))), False
    return QuadRoots(i, (qa, qb, qc), roots, double, tuple(r for r in roots if r > 0))


def _families(params: MetricParams, i: int) -> list[ZeroPlaneFamily]:
    from .curvature_core import curvature_quadratic

    _, j, k = _cyc(i)
    tj, tk = params.t[j - 1], params.t[k - 1]
    V, H, _, _ = invariants(params).at(i)
    Z = math.sqrt(V / H) / (tj * tk)
    theta = np.linspace(0.0, 2 * np.pi, 8, endpoint=False)
    best = None
    for sign in (1, -1):
        fam = ZeroPlaneFamily(i, Z, sign, params)
        resid = float(np.max(np.abs(curvature_quadratic(params, fam.plane(theta)))))
        if best is None or resid < best[0]:
            best = (resid, fam)
    return [best[1]]


def zero_planes(params: MetricParams) -> list[ZeroPlaneFamily]:
    verdict = classify(params)
    if not isinstance(verdict, Boundary):
        raise NotPositivelyCurvedError(f"zero planes need a boundary metric, got {verdict.name}")
    return list(verdict.zero_plane_families)


# Implicit surfaces over the (t1, t2) plane, solved for t3.

def _v3(t1: float, t2: float, t3: float) -> float:
    return invariant_values(t1, t2, t3, 3)[0]


def _l3_margin(t1: float, t2: float, t3: float) -> float:
    V, H, L, _ = invariant_values(t1, t2, t3, 3)
    return 2 * (t1 * t2 + math.sqrt(max(H * V, 0.0))) - abs(L)


def v3_zero_closed_form(t1: float, t2: float) -> float:
    """Largest root ``t3`` of ``V_3 = 0`` (a quadratic in ``t3``)."""
    s = t1 + t2
    return (s + math.sqrt(s * s + 3 * (t1 - t2) ** 2)) / 3


def _brent(f, lo: float, hi: float) -> float:
    return brentq(f, lo, hi, xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps)


def surface_t3(t1: float, t2: float, which: str) -> float:
    """Height ``t3`` of one of the two faces bounding the region where ``t3`` is largest.

    ``"V3_zero"`` is the face ``V_3 = 0``.  ``"L3_boundary"`` is the face where
    ``|L_3| = 2(t1 t2 + sqrt(H_3 V_3))``, found by walking down from the ``V_3 = 0``
    face; where the inequality already holds on that face the two coincide.
    """
    if which not in ("V3_zero", "L3_boundary"):
        raise ValueError(f"unknown surface {which!r}; expected 'V3_zero' or 'L3_boundary'")
    if not (t1 > 0 and t2 > 0):
        raise ValueError("t1 and t2 must be positive")
    # V3 * t3 is a concave quadratic in t3, positive at t3 = max(t1, t2)
    lo = max(t1, t2)
    hi = lo + 0.25
    while _v3(t1, t2, hi) > 0:
        hi += 0.25
    top = _brent(lambda t3: _v3(t1, t2, t3), lo, hi)
    if top >= T_MAX:
        raise ValueError(f"V3 = 0 lies at t3 = {top:.6g} >= 4/3 over ({t1}, {t2})")
    if which == "V3_zero":
        return top
    f = lambda t3: _l3_margin(t1, t2, t3)  # noqa: E731
    if f(top) >= 0:
        return top
    step = 1e-3
    lo = top - step
    while f(lo) < 0:
        step *= 2
        lo = top - step
        if lo <= 0:
            raise ValueError(f"no boundary point below the V3 = 0 face over ({t1}, {t2})")
    return _brent(f, lo, top)


def surface_gap(t1: float, t2: float) -> float:
    """Height of the slice between the ``V3 = 0`` face and the boundary face below it."""
    return surface_t3(t1, t2, "V3_zero") - surface_t3(t1, t2, "L3_boundary")


def slice_curve(t1):
    """Boundary curve in the slice ``t1 = t2``, as ``t3`` over ``[0, 1/2]``."""
    t1 = np.asarray(t1, dtype=float)
    if np.any((t1 < 0) | (t1 > 0.5)):
        raise ValueError("slice_curve is defined for 0 <= t1 <= 1/2")
    out = t1 * (4 * t1**3 - 12 * t1**2 - 4 + 9 * t1) / (3 * (2 * t1 - 2 * t1**2 - 1))
    return out[()] if out.ndim == 0 else out


def separating_curve_residual(t1, t2):
    return 4 * np.asarray(t1) * t2 - 4 * np.asarray(t1) - 4 * np.asarray(t2) + 3


def separating_curve_t2(t1):
    """Solve the separating curve for ``t2``."""
    t1 = np.asarray(t1, dtype=float)
    return (4 * t1 - 3) / (4 * t1 - 4)
