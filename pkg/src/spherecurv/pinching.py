"""Extremal sectional curvatures and pinching of the Berger metrics ``g_t``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotPositivelyCurvedError

T_MAX = 4.0 / 3.0


def alpha(t):
    """Curvature of the critical planes with ``r = s``."""
    t = np.asarray(t, dtype=float)
    out = (16 * t**2 - 8 * t + 4) / (11 * t + 1)
    return out[()] if out.ndim == 0 else out


def _check(t: float) -> float:
    t = float(t)
    if not (0 < t < T_MAX):
        raise NotPositivelyCurvedError(f"g_t is positively curved only for 0 < t < 4/3, got t = {t}")
    return t


def _max_regime(t: float) -> str:
    if t <= 1 / 3:
        return "vertical"
    if t <= 1:
        return "horizontal"
    return "alpha-plane"


def _min_regime(t: float) -> str:
    if t <= 4 / 5:
        return "vertizontal"
    if t <= 1:
        return "alpha-plane"
    return "horizontal"


_VALUE = {
    "vertical": lambda t: 1 / t,
    "horizontal": lambda t: 4 - 3 * t,
    "vertizontal": lambda t: t,
    "alpha-plane": lambda t: float(alpha(t)),
}


def extrema(t: float) -> tuple[float, float]:
    """``(max_sec, min_sec)`` of ``g_t``."""
    t = _check(t)
    return _VALUE[_max_regime(t)](t), _VALUE[_min_regime(t)](t)


def pinching_delta(t: float) -> float:
    t = _check(t)
    if t <= 1 / 3:
        return t * t
    if t <= 4 / 5:
        return t / (4 - 3 * t)
    if t <= 1:
        return float(alpha(t)) / (4 - 3 * t)
    return (4 - 3 * t) / float(alpha(t))


def natural_delta(t: float) -> float:
    """Pinching computed from vertical, vertizontal and horizontal planes only."""
    t = _check(t)
    vals = (1 / t, t, 4 - 3 * t, 1.0)
    return min(vals) / max(vals)


@dataclass(frozen=True)
class CriticalPlane:
    """Critical point ``(r, s)`` of ``F`` in the normalisation ``x = y = 1``."""

    r: float
    s: float
    F: float
    family: str


def critical_planes(t: float) -> list[CriticalPlane]:
    """Nontrivial critical points of ``F(r, s)``.

    The ``r = s`` family sits at ``r^2 = (4t + 1)/7``.
    """
    t = float(t)
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    out = []
    if t < 0.5:
        r = math.sqrt(1 - 2 * t)
        for sgn in (1, -1):
            out.append(CriticalPlane(sgn * r, -sgn * r, 4 * (1 - t), "r=-s"))
    r = math.sqrt((4 * t + 1) / 7)
    for sgn in (1, -1):
        out.append(CriticalPlane(sgn * r, sgn * r, float(alpha(t)), "r=s"))
    return out


def critical_berger_plane(c: CriticalPlane):
    """Embed a critical point as a Berger-normal-form plane with ``A.B = 0``.

    ``A = e2``, ``B = e3`` so that ``(A x B) . e1 = |A||B| = 1``.
    """
    from .params import BergerPlane

    return BergerPlane(np.array([0.0, 1.0, 0.0, c.r]), np.array([0.0, 0.0, 1.0, 0.0, c.s, 0.0]))


@dataclass(frozen=True)
class PinchingReport:
    t: float
    max_sec: float
    min_sec: float
    delta: float
    max_regime: str
    min_regime: str
    natural_delta: float
    critical: tuple[CriticalPlane, ...]


def pinching_report(t: float) -> PinchingReport:
    t = _check(t)
    mx, mn = extrema(t)
    return PinchingReport(
        t=t,
        max_sec=mx,
        min_sec=mn,
        delta=pinching_delta(t),
        max_regime=_max_regime(t),
        min_regime=_min_regime(t),
        natural_delta=natural_delta(t),
        critical=tuple(critical_planes(t)),
    )
