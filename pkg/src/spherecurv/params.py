"""Metric parameters and isotropy-reduced 2-planes.

The homogeneous metrics on ``S^(4n-1) = Sp(n)/Sp(n-1)`` are described by the
squared lengths ``(t1, t2, t3)`` of the three vertical basis vectors; the
horizontal space keeps its round metric.  The Berger metric ``g_t`` is the
diagonal case, either on ``S^(4n-1)`` (three dimensional fibres) or on
``S^15 = Spin(9)/Spin(7)`` (seven dimensional fibres).

A reduced plane is stored as two coefficient arrays.  Both arrays may carry
leading batch dimensions, which every evaluator in :mod:`curvature_core`
broadcasts over.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MetricParams:
    t1: float
    t2: float
    t3: float

    def __post_init__(self):
        for name in ("t1", "t2", "t3"):
            value = float(getattr(self, name))
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be a positive real, got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def t(self) -> np.ndarray:
        return np.array([self.t1, self.t2, self.t3])

    def cyclic(self, i: int) -> tuple[float, float, float]:
        """Return ``(t_i, t_j, t_k)`` for the cyclic triple starting at ``i`` (1-based)."""
        t = self.t
        return t[i - 1], t[i % 3], t[(i + 1) % 3]

    def permuted(self, shift: int = 1) -> "MetricParams":
        t = np.roll(self.t, -shift)
        return MetricParams(*t)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.t1, self.t2, self.t3)


@dataclass(frozen=True)
class BergerParam:
    """Round metric scaled by ``t`` along the Hopf fibres of dimension 3 or 7."""

    t: float
    fiber_dim: int = 3

    def __post_init__(self):
        t = float(self.t)
        if not np.isfinite(t) or t <= 0:
            raise ValueError(f"t must be a positive real, got {t!r}")
        if self.fiber_dim not in (3, 7):
            raise ValueError(f"fiber_dim must be 3 or 7, got {self.fiber_dim!r}")
        object.__setattr__(self, "t", t)

    def as_metric(self) -> MetricParams:
        if self.fiber_dim != 3:
            raise ValueError("only the 3-dimensional fibre family embeds in the (t1,t2,t3) family")
        return MetricParams(self.t, self.t, self.t)


@dataclass(frozen=True)
class ReducedPlane:
    """Plane spanned by

    ``X = a1 X1 + a2 X2 + a3 X3 + a4 U11`` and
    ``Y = b1 X1 + b2 X2 + b3 X3 + b4 U11 + b5 U21 + b6 U31 + b7 U41 + b8 U12``.
    """

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.shape[-1:] != (4,) or b.shape[-1:] != (8,):
            raise ValueError(f"expected a[...,4] and b[...,8], got {a.shape} and {b.shape}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class BergerPlane:
    """Plane in the normal form used for Berger metrics.

    ``X = a1 X1 + a2 X2 + a3 X3 + a4 W1`` and
    ``Y = b1 X1 + b2 X2 + b3 X3 + b4 W1 + b5 W2 + b6 W3``

    where for 3-dimensional fibres ``(W1, W2, W3) = (U11, U21, U12)`` and for
    7-dimensional fibres ``(W1, W2, W3) = (U1, U5, X4)``; the last slot is the
    extra direction orthogonal to everything in ``X``.
    """

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.shape[-1:] != (4,) or b.shape[-1:] != (6,):
            raise ValueError(f"expected a[...,4] and b[...,6], got {a.shape} and {b.shape}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def A(self) -> np.ndarray:
        return self.a[..., :3]

    @property
    def B(self) -> np.ndarray:
        return self.b[..., :3]
