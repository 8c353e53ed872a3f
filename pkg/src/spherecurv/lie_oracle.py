"""Curvature of invariant metrics computed from Lie algebra structure constants.

This is the ground truth that every closed-form expression in the package is
checked against.  Two algebras are supported:

* ``sp(n)``: quaternionic ``n x n`` anti-Hermitian matrices stored as real
  arrays of shape ``(n, n, 4)`` with components ``(1, i, j, k)``.  The sphere is
  ``Sp(n)/Sp(n-1)`` with ``Sp(n-1)`` in the lower-right block.
* ``spin(9)`` realised as ``so(9)``: real ``9 x 9`` skew matrices.  The sphere
  is ``Spin(9)/Spin(7)``.

Tangent vectors are normalised so the metric with all fibre parameters equal
to 1 is the round metric of curvature 1.  For ``sp(n)`` that means the
vertical vectors carry ``i, j, k`` (not ``sqrt(2) i``) in the corner entry, and
``U_{1s}`` carries ``-1`` in row 1; for ``spin(9)`` the vertical vectors are
half the sums of elementary matrices and ``U_i = 2 E_{i9}``.
"""
from __future__ import annotations

import functools
import re
from dataclasses import dataclass, field
import numpy as np

from .errors import DegeneratePlaneError, TangentSpanError
from .params import BergerParam, BergerPlane, MetricParams, ReducedPlane

SPAN_TOL = 1e-10
GRAM_TOL = 1e-12

# (q p)_c = QMUL[a, b, c] q_a p_b
QMUL = np.zeros((4, 4, 4))
for (_a, _b), (_c, _s) in {
    (0, 0): (0, 1), (0, 1): (1, 1), (0, 2): (2, 1), (0, 3): (3, 1),
    (1, 0): (1, 1), (1, 1): (0, -1), (1, 2): (3, 1), (1, 3): (2, -1),
    (2, 0): (2, 1), (2, 1): (3, -1), (2, 2): (0, -1), (2, 3): (1, 1),
    (3, 0): (3, 1), (3, 1): (2, 1), (3, 2): (1, -1), (3, 3): (0, -1),
}.items():
    QMUL[_a, _b, _c] = _s
QMUL.setflags(write=False)
_RE_QQ = np.diag([1.0, -1.0, -1.0, -1.0])  # Re(q p) = q^T _RE_QQ p


def _matmul(kind: str, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if kind == "sp":
        return np.einsum("...ija,...jkb,abc->...ikc", A, B, QMUL)
    return A @ B


def _commutator(kind: str, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return _matmul(kind, A, B) - _matmul(kind, B, A)


def _g0(kind: str, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    # -1/2 Re tr(AB), batched over leading axes
    if kind == "sp":
        return -0.5 * np.einsum("...ija,...jib,ab->...", A, B, _RE_QQ)
    return -0.5 * np.einsum("...ij,...ji->...", A, B)


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """An element of ``sp(n)`` or ``spin(9)``."""

    kind: str
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        if self.kind == "sp":
            if entries.ndim != 3 or entries.shape[0] != entries.shape[1] or entries.shape[2] != 4:
                raise ValueError(f"sp(n) entries must have shape (n, n, 4), got {entries.shape}")
        elif self.kind == "spin":
            if entries.shape != (9, 9):
                raise ValueError(f"spin(9) entries must have shape (9, 9), got {entries.shape}")
        else:
            raise ValueError(f"unknown algebra kind {self.kind!r}")
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def _check(self, other: "AlgebraElement") -> None:
        if not isinstance(other, AlgebraElement):
            raise TypeError(f"expected AlgebraElement, got {type(other).__name__}")
        if other.kind != self.kind or other.entries.shape != self.entries.shape:
            raise ValueError(
                f"algebra mismatch: {self.kind}{self.entries.shape} vs {other.kind}{other.entries.shape}"
            )

    def __add__(self, other):
        self._check(other)
        return AlgebraElement(self.kind, self.entries + other.entries)

    def __sub__(self, other):
        self._check(other)
        return AlgebraElement(self.kind, self.entries - other.entries)

    def __neg__(self):
        return AlgebraElement(self.kind, -self.entries)

    def __mul__(self, scalar):
        return AlgebraElement(self.kind, float(scalar) * self.entries)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return AlgebraElement(self.kind, self.entries / float(scalar))

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def conjugate_transpose(self) -> "AlgebraElement":
        if self.kind == "sp":
            conj = self.entries.transpose(1, 0, 2).copy()
            conj[..., 1:] *= -1
            return AlgebraElement("sp", conj)
        return AlgebraElement("spin", self.entries.T.copy())

    def is_valid(self, atol: float = 1e-12) -> bool:
        """Anti-Hermitian (sp) or skew-symmetric (spin) up to ``atol``."""
        return bool(np.allclose(self.conjugate_transpose().entries, -self.entries, atol=atol))

    def allclose(self, other: "AlgebraElement", atol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.allclose(self.entries, other.entries, atol=atol))


def zero(kind: str, n: int = 9) -> AlgebraElement:
    if kind == "sp":
        return AlgebraElement("sp", np.zeros((n, n, 4)))
    return AlgebraElement("spin", np.zeros((9, 9)))


def bracket(A: AlgebraElement, B: AlgebraElement) -> AlgebraElement:
    """Matrix commutator ``AB - BA``."""
    A._check(B)
    return AlgebraElement(A.kind, _commutator(A.kind, A.entries, B.entries))


def g0_inner(A: AlgebraElement, B: AlgebraElement) -> float:
    """Biinvariant inner product ``-1/2 Re tr(AB)``."""
    A._check(B)
    return float(_g0(A.kind, A.entries, B.entries))


def elementary(i: int, j: int) -> AlgebraElement:
    """Skew matrix ``E_ij`` of ``so(9)`` (1-based): +1 at (i, j), -1 at (j, i)."""
    e = np.zeros((9, 9))
    e[i - 1, j - 1] = 1.0
    e[j - 1, i - 1] = -1.0
    return AlgebraElement("spin", e)


def _spin_combo(expr: str) -> AlgebraElement:
    """Parse a signed sum such as ``"2E25-E38+E47"`` into a skew matrix."""
    out = zero("spin")
    for sign, coeff, i, j in re.findall(r"([+-]?)(\d*)E(\d)(\d)", expr):
        c = float(coeff or 1) * (-1.0 if sign == "-" else 1.0)
        out = out + c * elementary(int(i), int(j))
    return out


# Spin(7) inside Spin(9), listed as the spans k1, k2, k3, k4.
_SPIN7 = (
    "E24+E68", "E28+E46", "E26-E48",
    "E23+E67", "E27+E36", "E34+E78", "E38+E47", "E37-E48",
    "E27-E45", "E23+E58", "E24-E57", "E28+E35", "E56-E78", "2E25-E38+E47",
    "E12+E56", "E16+E25", "E13+E57", "E17+E35", "E14+E58", "E18+E45", "E15-E48",
)
_SPIN_VERTICAL = (
    "E15+E26+E37+E48", "E17+E28-E35-E46", "E13-E24-E57+E68", "E16-E25-E38+E47",
    "E18-E27+E36-E45", "E12+E34-E56-E78", "E14+E23-E58-E67",
)


@dataclass(frozen=True, eq=False)
class ReductiveBasis:
    """Isotropy, vertical and horizontal parts of a reductive decomposition.

    ``labels`` names the tangent basis in order: ``("X", r)`` for vertical
    vectors and ``("U", r, s)`` (sp) or ``("U", i)`` (spin) for horizontal ones.
    """

    kind: str
    n: int
    isotropy_part: tuple
    vertical_part: tuple
    horizontal_part: tuple
    labels: tuple
    _index: dict = field(repr=False, default_factory=dict)

    def __post_init__(self):
        self._index.update({lab: i for i, lab in enumerate(self.labels)})

    @property
    def tangent(self) -> tuple:
        return self.vertical_part + self.horizontal_part

    @property
    def dim(self) -> int:
        return len(self.vertical_part) + len(self.horizontal_part)

    @property
    def fiber_dim(self) -> int:
        return len(self.vertical_part)

    def index(self, label: tuple) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"{label!r} is not a tangent basis label for {self.kind}({self.n})") from None

    def vector(self, label: tuple) -> AlgebraElement:
        return self.tangent[self.index(label)]

    @functools.cached_property
    def _stack(self) -> np.ndarray:
        out = np.stack([e.entries for e in self.tangent])
        out.setflags(write=False)
        return out

    @functools.cached_property
    def _norms(self) -> np.ndarray:
        s = self._stack
        out = _g0(self.kind, s, s)
        out.setflags(write=False)
        return out

    def _project(self, Z: np.ndarray) -> np.ndarray:
        # tangent coordinates of Z[..., matrix]; the tangent basis is g0-orthogonal
        s = self._stack
        extra = Z.ndim - s.ndim + 1
        Zb = Z.reshape(Z.shape[:extra] + (1,) + Z.shape[extra:])
        return _g0(self.kind, Zb, s) / self._norms

    def coordinates(self, A: AlgebraElement, tol: float = SPAN_TOL) -> np.ndarray:
        """Coefficients of ``A`` in the tangent basis; raises if ``A`` leaves the span."""
        if A.kind != self.kind or A.entries.shape != self._stack.shape[1:]:
            raise ValueError(f"element of {A.kind}{A.entries.shape} does not belong to {self.kind}({self.n})")
        c = self._project(A.entries)
        residual = A.entries - np.tensordot(c, self._stack, axes=1)
        if np.linalg.norm(residual) > tol * max(1.0, A.norm()):
            raise TangentSpanError(
                f"element has a component of norm {np.linalg.norm(residual):.3e} outside the tangent span"
            )
        return c

    def element(self, coords) -> AlgebraElement:
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (self.dim,):
            raise ValueError(f"expected {self.dim} coordinates, got shape {coords.shape}")
        return AlgebraElement(self.kind, np.tensordot(coords, self._stack, axes=1))

    @functools.cached_property
    def structure(self) -> tuple[np.ndarray, np.ndarray]:
        """``C[a,b,c]``: tangent part of ``[e_a, e_b]``; ``T[a,b,c,d]``: of ``[e_a, [e_b, e_c]]``.

        The inner bracket in ``T`` is the full one, isotropy part included.
        """
        s = self._stack
        full = _commutator(self.kind, s[:, None], s[None, :])
        C = self._project(full)
        T = self._project(_commutator(self.kind, s[:, None, None], full[None]))
        C.setflags(write=False)
        T.setflags(write=False)
        return C, T

    def weights(self, params) -> np.ndarray:
        """Diagonal of the metric in tangent coordinates."""
        if isinstance(params, MetricParams):
            if self.kind != "sp":
                raise ValueError("(t1, t2, t3) metrics live on Sp(n)/Sp(n-1)")
            vert = params.t
        elif isinstance(params, BergerParam):
            if (params.fiber_dim == 3) != (self.kind == "sp"):
                raise ValueError(f"fiber dimension {params.fiber_dim} does not match {self.kind} basis")
            vert = np.full(self.fiber_dim, params.t)
        else:
            raise TypeError(f"unsupported metric parameters {type(params).__name__}")
        return np.concatenate([vert, np.ones(len(self.horizontal_part))])


def _sp_basis(n: int) -> ReductiveBasis:
    def unit(i, j, comp, value):
        e = np.zeros((n, n, 4))
        e[i, j, comp] = value
        return e

    vertical = tuple(AlgebraElement("sp", unit(0, 0, r, 1.0)) for r in (1, 2, 3))
    horizontal, labels = [], [("X", 1), ("X", 2), ("X", 3)]
    for s in range(1, n):
        for r in range(1, 5):
            if r == 1:
                e = unit(0, s, 0, -1.0) + unit(s, 0, 0, 1.0)
            else:
                e = unit(0, s, r - 1, 1.0) + unit(s, 0, r - 1, 1.0)
            horizontal.append(AlgebraElement("sp", e))
            labels.append(("U", r, s))
    isotropy = []
    for p in range(1, n):
        for comp in (1, 2, 3):
            isotropy.append(AlgebraElement("sp", unit(p, p, comp, 1.0)))
        for q in range(p + 1, n):
            isotropy.append(AlgebraElement("sp", unit(p, q, 0, 1.0) + unit(q, p, 0, -1.0)))
            for comp in (1, 2, 3):
                isotropy.append(AlgebraElement("sp", unit(p, q, comp, 1.0) + unit(q, p, comp, 1.0)))
    return ReductiveBasis("sp", n, tuple(isotropy), vertical, tuple(horizontal), tuple(labels))


def _spin_basis() -> ReductiveBasis:
    isotropy = tuple(_spin_combo(e) for e in _SPIN7)
    vertical = tuple(0.5 * _spin_combo(e) for e in _SPIN_VERTICAL)
    horizontal = tuple(2.0 * elementary(i, 9) for i in range(1, 9))
    labels = tuple([("X", i) for i in range(1, 8)] + [("U", i) for i in range(1, 9)])
    return ReductiveBasis("spin", 9, isotropy, vertical, horizontal, labels)


@functools.lru_cache(maxsize=None)
def build_basis(kind: str, n: int = 2) -> ReductiveBasis:
    """Reductive basis for ``Sp(n)/Sp(n-1)`` (``kind="sp"``, n >= 2) or ``Spin(9)/Spin(7)``."""
    if kind == "sp":
        if int(n) != n or n < 2:
            raise ValueError(f"sp(n) needs n >= 2, got {n!r}")
        return _sp_basis(int(n))
    if kind == "spin":
        if n not in (2, 9):  # 2 is the default argument, accepted for convenience
            raise ValueError(f"spin basis is only defined for n = 9, got {n!r}")
        return _spin_basis()
    raise ValueError(f"unknown algebra kind {kind!r}")


def basis_for(params, n: int = 2) -> ReductiveBasis:
    if isinstance(params, BergerParam) and params.fiber_dim == 7:
        return build_basis("spin", 9)
    return build_basis("sp", n)


def _basis_of(A: AlgebraElement) -> ReductiveBasis:
    return build_basis(A.kind, A.n)


def metric_inner(params, A: AlgebraElement, B: AlgebraElement) -> float:
    """Invariant metric on the tangent complement."""
    A._check(B)
    basis = _basis_of(A)
    w = basis.weights(params)
    return float(basis.coordinates(A) @ (w * basis.coordinates(B)))


def _curvature_coords(basis: ReductiveBasis, w: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    """<R(X,Y)X,Y> by the reductive homogeneous formula, brackets taken on matrices."""
    s = basis._stack
    kind = basis.kind
    X = np.tensordot(x, s, axes=1)
    Y = np.tensordot(y, s, axes=1)
    G = np.diag(w)

    def ip(u, v):
        return float(u @ G @ v)

    XY = _commutator(kind, X, Y)
    XY_m = basis._project(XY)
    X_XY = basis._project(_commutator(kind, X, XY))
    Y_YX = basis._project(_commutator(kind, Y, -XY))

    # 2<U(P,Q), e_c> = <[e_c,P]_m, Q> + <P, [e_c,Q]_m>, solved for U in the metric
    ad_x = basis._project(_commutator(kind, s, X[None]))
    ad_y = basis._project(_commutator(kind, s, Y[None]))

    def U(p, q, ad_p, ad_q):
        rhs = 0.5 * (ad_p @ G @ q + ad_q @ G @ p)
        return np.linalg.solve(G, rhs)

    Uxy = U(x, y, ad_x, ad_y)
    Uxx = U(x, x, ad_x, ad_x)
    Uyy = U(y, y, ad_y, ad_y)
    return (
        -0.75 * ip(XY_m, XY_m)
        - 0.5 * ip(X_XY, y)
        - 0.5 * ip(Y_YX, x)
        + ip(Uxy, Uxy)
        - ip(Uxx, Uyy)
    )


def invariant_curvature(params, X: AlgebraElement, Y: AlgebraElement) -> float:
    """``<R(X,Y)X,Y>`` for the invariant metric given by ``params``."""
    X._check(Y)
    basis = _basis_of(X)
    w = basis.weights(params)
    return _curvature_coords(basis, w, basis.coordinates(X), basis.coordinates(Y))


def oracle_sectional(params, X: AlgebraElement, Y: AlgebraElement) -> float:
    X._check(Y)
    basis = _basis_of(X)
    w = basis.weights(params)
    x, y = basis.coordinates(X), basis.coordinates(Y)
    xx, yy, xy = x @ (w * x), y @ (w * y), x @ (w * y)
    gram = xx * yy - xy * xy
    if gram <= GRAM_TOL * xx * yy:
        raise DegeneratePlaneError(f"Gram determinant {gram:.3e} too small")
    return _curvature_coords(basis, w, x, y) / gram


def curvature_tensor(params, basis: ReductiveBasis | None = None) -> np.ndarray:
    """Full curvature tensor ``R[a,b,c,d] = <R(e_a,e_b)e_c,e_d>`` in tangent coordinates.

    The biquadratic form ``<R(X,Y)X,Y>`` is assembled from the structure
    constants and then polarised, so ``R[a,b,a,b]`` is the unnormalised
    sectional curvature of the coordinate plane ``(e_a, e_b)``.
    """
    if basis is None:
        basis = basis_for(params)
    w = basis.weights(params)
    g = np.diag(w)
    gi = np.diag(1.0 / w)
    C, T = basis.structure
    Tg = np.einsum("abce,ef->abcf", T, g)
    # coefficient tensors K[a,b,c,d] of x_a y_b x_c y_d
    K = -0.75 * np.einsum("abe,ef,cdf->abcd", C, g, C)
    K += -0.5 * np.einsum("abcf->acbf", Tg)
    K += -0.5 * np.einsum("abcf->cafb", Tg)
    W = 0.5 * np.einsum("cae,ef->caf", C, g)
    S = W + W.transpose(0, 2, 1)
    K += np.einsum("pab,pq,qcd->abcd", S, gi, S)
    K -= np.einsum("pac,pq,qbd->abcd", S, gi, S)
    Q = 0.25 * (K + K.transpose(2, 1, 0, 3) + K.transpose(0, 3, 2, 1) + K.transpose(2, 3, 0, 1))
    return (2.0 / 3.0) * (Q - Q.transpose(0, 1, 3, 2))


def tensor_curvature(R: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Evaluate ``R(x, y, x, y)``; ``x`` and ``y`` may carry leading batch axes."""
    d = R.shape[0]
    P = (x[..., :, None] * y[..., None, :]).reshape(x.shape[:-1] + (d * d,))
    out = np.sum((P @ R.reshape(d * d, d * d)) * P, axis=-1)
    return out[()] if np.ndim(out) == 0 else out


def plane_coordinates(plane, basis: ReductiveBasis) -> tuple[np.ndarray, np.ndarray]:
    """Tangent coordinates of the two spanning vectors of a reduced or Berger plane."""
    x = np.zeros(basis.dim)
    y = np.zeros(basis.dim)
    a, b = np.asarray(plane.a, float), np.asarray(plane.b, float)
    if a.ndim != 1:
        raise ValueError("embedding expects a single plane, not a batch")
    if isinstance(plane, ReducedPlane):
        if basis.kind != "sp":
            raise ValueError("reduced (t1,t2,t3) planes embed in sp(n) only")
        x_slots = [("X", 1), ("X", 2), ("X", 3), ("U", 1, 1)]
        y_slots = x_slots + [("U", 2, 1), ("U", 3, 1), ("U", 4, 1), ("U", 1, 2)]
    elif isinstance(plane, BergerPlane):
        if basis.kind == "sp":
            x_slots = [("X", 1), ("X", 2), ("X", 3), ("U", 1, 1)]
            y_slots = x_slots + [("U", 2, 1), ("U", 1, 2)]
        else:
            x_slots = [("X", 1), ("X", 2), ("X", 3), ("U", 1)]
            y_slots = x_slots + [("U", 5), ("X", 4)]
    else:
        raise TypeError(f"cannot embed {type(plane).__name__}")
    for coeff, lab in zip(a, x_slots):
        x[basis.index(lab)] += coeff
    for coeff, lab in zip(b, y_slots):
        if coeff == 0.0:
            continue
        if lab not in basis.labels:
            raise ValueError(f"coefficient on {lab} needs a larger sphere than {basis.kind}({basis.n})")
        y[basis.index(lab)] += coeff
    return x, y


def embed_reduced_plane(plane, basis: ReductiveBasis) -> tuple[AlgebraElement, AlgebraElement]:
    x, y = plane_coordinates(plane, basis)
    return basis.element(x), basis.element(y)


def random_element(kind: str, n: int, rng: np.random.Generator) -> AlgebraElement:
    """Random element of the full algebra (not only the tangent part)."""
    if kind == "sp":
        M = rng.normal(size=(n, n, 4))
        A = AlgebraElement("sp", M)
        return 0.5 * (A - A.conjugate_transpose())
    M = rng.normal(size=(9, 9))
    return AlgebraElement("spin", 0.5 * (M - M.T))
