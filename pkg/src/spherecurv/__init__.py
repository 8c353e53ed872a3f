"""Sectional curvature of homogeneous metrics on spheres built from sp(n) and spin(9)."""
from __future__ import annotations

from .errors import DegeneratePlaneError, NotPositivelyCurvedError, OptimizationError, TangentSpanError
from .params import BergerParam, BergerPlane, MetricParams, ReducedPlane
from .curvature_core import berger_sectional, component_table, curvature_quadratic, sectional_reduced
from .positivity import classify, invariants, quad_roots, zero_planes
from .pinching import extrema, pinching_delta, pinching_report
from .optimizer import OptimizerConfig, certify_positive, extremize, reduction_check

__all__ = [
    "BergerParam",
    "BergerPlane",
    "DegeneratePlaneError",
    "MetricParams",
    "NotPositivelyCurvedError",
    "OptimizationError",
    "OptimizerConfig",
    "ReducedPlane",
    "TangentSpanError",
    "berger_sectional",
    "certify_positive",
    "classify",
    "component_table",
    "curvature_quadratic",
    "extrema",
    "extremize",
    "invariants",
    "pinching_delta",
    "pinching_report",
    "quad_roots",
    "reduction_check",
    "sectional_reduced",
    "zero_planes",
]
