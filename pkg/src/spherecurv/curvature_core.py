"""Closed-form curvature polynomials for isotropy-reduced 2-planes.

All evaluators broadcast over leading batch dimensions of the plane arrays.
Vertical coordinates are not normalised, so ``|X_i|^2 = t_i`` in the metric.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePlaneError
from .params import BergerParam, BergerPlane, MetricParams, ReducedPlane

GRAM_TOL = 1e-12


def _invariants(t: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Arrays ``V, H, L`` indexed by ``i - 1``."""
    V, H, L = np.empty(3), np.empty(3), np.empty(3)
    for i in range(3):
        ti, tj, tk = t[i], t[(i + 1) % 3], t[(i + 2) % 3]
        V[i] = (tj**2 + tk**2 - 3 * ti**2 + 2 * ti * tj + 2 * ti * tk - 2 * tj * tk) / ti
        H[i] = 4 - 3 * ti
        L[i] = 6 * (tj * tk - tj - tk + ti)
    return V, H, L


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # (a2 b3 - a3 b2, a3 b1 - a1 b3, a1 b2 - a2 b1)
    return np.cross(a[..., :3], b[..., :3])


def curvature_quadratic(params: MetricParams, p: ReducedPlane) -> np.ndarray | float:
    """Unnormalised curvature ``<R(X,Y)X,Y>`` of a reduced plane."""
    t = params.t
    V, H, L = _invariants(t)
    a, b = p.a, p.b
    a4 = a[..., 3]
    b4, bU, b8 = b[..., 3], b[..., 4:7], b[..., 7]
    cr = _cross(a, b)
    t2a2 = np.sum((t * a[..., :3]) ** 2, axis=-1)
    out = (
        np.sum(V * cr**2, axis=-1)
        + np.sum(L * cr * bU, axis=-1) * a4
        + np.sum(H * bU**2, axis=-1) * a4**2
        + np.sum(t**2 * (b4[..., None] * a[..., :3] - b[..., :3] * a4[..., None]) ** 2, axis=-1)
        + np.sum(bU**2, axis=-1) * t2a2
        + b8**2 * (t2a2 + a4**2)
    )
    return out[()] if out.ndim == 0 else out


def _norms_reduced(params: MetricParams, p: ReducedPlane):
    t = params.t
    a, b = p.a, p.b
    xx = np.sum(t * a[..., :3] ** 2, axis=-1) + a[..., 3] ** 2
    yy = np.sum(t * b[..., :3] ** 2, axis=-1) + np.sum(b[..., 3:] ** 2, axis=-1)
    xy = np.sum(t * a[..., :3] * b[..., :3], axis=-1) + a[..., 3] * b[..., 3]
    return xx, yy, xy


def gram(params: MetricParams, p: ReducedPlane) -> np.ndarray | float:
    """Metric Gram determinant ``|X|^2 |Y|^2 - <X,Y>^2``."""
    xx, yy, xy = _norms_reduced(params, p)
    out = xx * yy - xy**2
    return out[()] if np.ndim(out) == 0 else out


def _divide(num, xx, yy, xy):
    g = xx * yy - xy**2
    bad = g <= GRAM_TOL * xx * yy
    if np.any(bad):
        raise DegeneratePlaneError(
            f"{int(np.count_nonzero(bad))} plane(s) with Gram determinant below tolerance"
        )
    out = num / g
    return out[()] if np.ndim(out) == 0 else out


def sectional_reduced(params: MetricParams, p: ReducedPlane) -> np.ndarray | float:
    return _divide(curvature_quadratic(params, p), *_norms_reduced(params, p))


def berger_numerator(param: BergerParam, p: BergerPlane) -> np.ndarray | float:
    """``<R(X,Y)X,Y>`` for the Berger metric on a plane in Berger normal form."""
    t = param.t
    A, B = p.A, p.B
    a4 = p.a[..., 3]
    b4, b5, b6 = p.b[..., 3], p.b[..., 4], p.b[..., 5]
    cr = _cross(A, B)
    AA = np.sum(A * A, axis=-1)
    BB = np.sum(B * B, axis=-1)
    AB = np.sum(A * B, axis=-1)
    common = (
        t * np.sum(cr**2, axis=-1)
        + (4 - 3 * t) * a4**2 * b5**2
        + 6 * t * (t - 1) * cr[..., 0] * a4 * b5
        + t**2 * (b4**2 * AA + a4**2 * BB - 2 * a4 * b4 * AB + b5**2 * AA)
    )
    if param.fiber_dim == 3:
        out = common + b6**2 * (t**2 * AA + a4**2)
    else:
        out = common + b6**2 * (t * AA + t**2 * a4**2)
    return out[()] if np.ndim(out) == 0 else out


def _norms_berger(param: BergerParam, p: BergerPlane):
    t = param.t
    A, B = p.A, p.B
    a4 = p.a[..., 3]
    b4, b5, b6 = p.b[..., 3], p.b[..., 4], p.b[..., 5]
    w6 = 1.0 if param.fiber_dim == 3 else t  # U12 is horizontal, X4 is vertical
    xx = t * np.sum(A * A, axis=-1) + a4**2
    yy = t * np.sum(B * B, axis=-1) + b4**2 + b5**2 + w6 * b6**2
    xy = t * np.sum(A * B, axis=-1) + a4 * b4
    return xx, yy, xy


def berger_gram(param: BergerParam, p: BergerPlane) -> np.ndarray | float:
    xx, yy, xy = _norms_berger(param, p)
    out = xx * yy - xy**2
    return out[()] if np.ndim(out) == 0 else out


def berger_sectional(param: BergerParam, p: BergerPlane) -> np.ndarray | float:
    return _divide(berger_numerator(param, p), *_norms_berger(param, p))


def berger_F(t: float, r, s, x=1.0, y=1.0):
    """Two-variable reduction of the Berger sectional curvature (with ``A.B = 0``)."""
    r, s = np.asarray(r, float), np.asarray(s, float)
    num = t * x**2 * y**2 + (4 - 3 * t) * r**2 * s**2 + 6 * t * (t - 1) * x * y * r * s
    num = num + t**2 * (x**2 * s**2 + y**2 * r**2)
    out = num / ((t * x**2 + r**2) * (t * y**2 + s**2))
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class ComponentEntry:
    """One curvature component ``R(e1, e2, e3, e4)`` with its tabulated value.

    ``indices`` holds basis labels: ``("X", i)`` or ``("U", r, p)``.
    """

    indices: tuple
    value: float
    pattern: str


def _sign(perm: tuple[int, int, int]) -> int:
    return 1 if perm in ((1, 2, 3), (2, 3, 1), (3, 1, 2)) else -1


def component_table(params: MetricParams, n: int = 3) -> list[ComponentEntry]:
    """All tabulated curvature components, instantiated over the index ranges.

    Signs refer to the package's orientation of ``U_{1p}``; entries holding a
    single ``U_{1p}`` among the ``U`` legs change sign under the opposite orientation,
    and the ``R(U_1p, U_ap, U_bq, U_gq)`` entry is ``2 sigma (1 - t_a)``.
    For ``n = 2`` only entries with a single horizontal slot are produced.
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    t = dict(zip((1, 2, 3), params.t))
    Vv, Hv, Lv = _invariants(params.t)
    V = dict(zip((1, 2, 3), Vv))
    H = dict(zip((1, 2, 3), Hv))
    L = dict(zip((1, 2, 3), Lv))
    slots = [1] if n == 2 else [1, n - 1]
    pairs = [(p, q) for p in slots for q in slots if p != q]
    X = lambda i: ("X", i)  # noqa: E731
    U = lambda r, p: ("U", r, p)  # noqa: E731
    Ua = lambda al, p: ("U", al + 1, p)  # noqa: E731  U_{alpha p} is U_{(alpha+1) p}

    out: list[ComponentEntry] = []

    def add(pattern, idx, value):
        out.append(ComponentEntry(tuple(idx), float(value), pattern))

    for i, j, k in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
        add("R(Xi,Xj,Xi,Xj)=Vk", (X(i), X(j), X(i), X(j)), V[k])
    for p in slots:
        for al, be, ga in itertools.permutations((1, 2, 3)):
            s = _sign((al, be, ga))
            ta, tb, tg = t[al], t[be], t[ga]
            add("R(U1p,Ugp,U1p,Ugp)=Hg", (U(1, p), Ua(ga, p), U(1, p), Ua(ga, p)), H[ga])
            add("R(Uap,Ubp,Uap,Ubp)=Hg", (Ua(al, p), Ua(be, p), Ua(al, p), Ua(be, p)), H[ga])
            add("R(U1p,Uap,Ubp,Ugp)=-s(tb+tg-2ta)", (U(1, p), Ua(al, p), Ua(be, p), Ua(ga, p)),
                -s * (tb + tg - 2 * ta))
            add("R(U1p,Xa,U1p,Xa)=ta^2", (U(1, p), X(al), U(1, p), X(al)), ta**2)
            add("R(Ubp,Xa,Ubp,Xa)=ta^2", (Ua(be, p), X(al), Ua(be, p), X(al)), ta**2)
            add("R(Uap,Ubp,Xa,Xb)=-Lg/3", (Ua(al, p), Ua(be, p), X(al), X(be)), -L[ga] / 3)
            add("R(Uap,Xa,Ubp,Xb)=-Lg/6", (Ua(al, p), X(al), Ua(be, p), X(be)), -L[ga] / 6)
            add("R(Uap,Xb,Xa,Ubp)=-Lg/6", (Ua(al, p), X(be), X(al), Ua(be, p)), -L[ga] / 6)
            add("R(U1p,Uap,Xb,Xg)=sLa/3", (U(1, p), Ua(al, p), X(be), X(ga)), s * L[al] / 3)
            add("R(U1p,Xg,Uap,Xb)=-sLa/6", (U(1, p), X(ga), Ua(al, p), X(be)), -s * L[al] / 6)
    for p, q in pairs:
        for r in range(1, 5):
            add("R(Urp,Urq,Urp,Urq)=1", (U(r, p), U(r, q), U(r, p), U(r, q)), 1.0)
            for s_ in range(1, 5):
                if s_ != r:
                    add("R(Urp,Usq,Urp,Usq)=1", (U(r, p), U(s_, q), U(r, p), U(s_, q)), 1.0)
        for al, be, ga in itertools.permutations((1, 2, 3)):
            s = _sign((al, be, ga))
            ta, tb, tg = t[al], t[be], t[ga]
            add("R(U1p,Uap,U1q,Uaq)=2(1-ta)", (U(1, p), Ua(al, p), U(1, q), Ua(al, q)), 2 * (1 - ta))
            add("R(Ubp,Ugp,Ubq,Ugq)=2(1-ta)", (Ua(be, p), Ua(ga, p), Ua(be, q), Ua(ga, q)), 2 * (1 - ta))
            add("R(U1p,Uap,Ubq,Ugq)=-2s(1-ta)", (U(1, p), Ua(al, p), Ua(be, q), Ua(ga, q)), -2 * s * (1 - ta))
            add("R(U1p,U1q,Uap,Uaq)=1-ta", (U(1, p), U(1, q), Ua(al, p), Ua(al, q)), 1 - ta)
            add("R(U1p,Uaq,U1q,Uap)=1-ta", (U(1, p), Ua(al, q), U(1, q), Ua(al, p)), 1 - ta)
            add("R(Ubp,Ubq,Ugp,Ugq)=1-ta", (Ua(be, p), Ua(be, q), Ua(ga, p), Ua(ga, q)), 1 - ta)
            add("R(Uap,Ubq,Uaq,Ubp)=1-tg", (Ua(al, p), Ua(be, q), Ua(al, q), Ua(be, p)), 1 - tg)
            add("R(U1p,Uaq,Ubp,Ugq)=s(1-tb)", (U(1, p), Ua(al, q), Ua(be, p), Ua(ga, q)), s * (1 - tb))
    return out


def restr_normalize(params: MetricParams, p: ReducedPlane) -> ReducedPlane:
    """Gram-Schmidt in the form with weights ``t_i^2`` on vertical slots and 1 elsewhere.

    The result spans the same plane, has unit length in that form, and is
    orthogonal in it.  The ``b8`` slot carries weight 1.
    """
    a, b = p.a, p.b
    if a.ndim != 1:
        raise ValueError("restr_normalize expects a single plane")
    t2 = params.t**2
    wb = np.concatenate([t2, np.ones(5)])
    a_full = np.concatenate([a, np.zeros(4)])

    def ip(u, v):
        return float(u @ (wb * v))

    na = ip(a_full, a_full)
    if na <= GRAM_TOL * max(1.0, float(a @ a)):
        raise DegeneratePlaneError("first vector has zero weighted length")
    a_new = a / np.sqrt(na)
    a_full = a_full / np.sqrt(na)
    b_new = b - ip(a_full, b) * a_full
    nb = ip(b_new, b_new)
    if nb <= GRAM_TOL * max(1.0, ip(b, b)):
        raise DegeneratePlaneError("plane is degenerate in the weighted form")
    return ReducedPlane(a_new, b_new / np.sqrt(nb))
