"""Multi-start extremization of sectional curvature over 2-planes.

A search space fixes how a plane is parameterised:

``reduced_s7``       ``(a1..a4, b1..b7)`` of the reduced form with ``b8 = 0``
``reduced_sp``       ``(a1..a4, b1..b8)``, the reduced form with ``b8`` free
``reduced_berger3``  Berger normal form on ``S^(4n-1)``
``reduced_berger7``  Berger normal form on ``S^15``
``full_tangent``     two arbitrary tangent vectors, evaluated with the curvature
                     tensor built by :mod:`lie_oracle`

The objective is the sectional curvature quotient, which is invariant under
rescaling either vector, so the coefficients are unconstrained.  Results are
deterministic for a given seed: starting points come from one seeded
generator, restarts are independent, and the merge breaks ties by restart
index.
"""
from __future__ import annotations

import dataclasses
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import OptimizeWarning, minimize

from . import curvature_core as cc
from . import lie_oracle as lo
from .errors import OptimizationError
from .params import BergerParam, BergerPlane, MetricParams, ReducedPlane

SPACES = ("reduced_s7", "reduced_sp", "reduced_berger3", "reduced_berger7", "full_tangent")
GRAM_TOL = 1e-12
FD_STEP = 1e-6


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int | None = None  # None: 64 for reduced spaces, 256 for full_tangent
    seed: int = 0
    max_iterations: int = 2000
    gtol: float = 1e-9
    xtol: float = 1e-12
    curvature_tol: float = 1e-8
    samples: int = 100_000
    screen: int = 4096
    jobs: int = 1
    space: str | None = None
    n: int = 2

    def __post_init__(self):
        if self.restarts is not None and self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        for name in ("gtol", "xtol", "curvature_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iterations < 1 or self.samples < 1 or self.screen < 1 or self.jobs < 1:
            raise ValueError("iteration, sample and job counts must be positive")
        if self.space is not None and self.space not in SPACES:
            raise ValueError(f"unknown search space {self.space!r}; expected one of {SPACES}")
        if self.n < 2:
            raise ValueError("n must be at least 2")

    def replace(self, **changes) -> "OptimizerConfig":
        return dataclasses.replace(self, **changes)


def default_space(metric) -> str:
    if isinstance(metric, BergerParam):
        return f"reduced_berger{metric.fiber_dim}"
    return "reduced_s7"


class Problem:
    """Sectional curvature as a function of a flat coefficient vector."""

    def __init__(self, metric, space: str, n: int = 2):
        self.metric = metric
        self.space = space
        if space in ("reduced_s7", "reduced_sp"):
            if isinstance(metric, BergerParam):
                metric = metric.as_metric()
            if not isinstance(metric, MetricParams):
                raise ValueError(f"{space} needs (t1, t2, t3) parameters")
            self._params = metric
            self.nb = 7 if space == "reduced_s7" else 8
            self.dim = 4 + self.nb
            self._w = np.concatenate([metric.t, np.ones(self.nb - 3)])
        elif space in ("reduced_berger3", "reduced_berger7"):
            fd = int(space[-1])
            if not (isinstance(metric, BergerParam) and metric.fiber_dim == fd):
                raise ValueError(f"{space} needs a Berger parameter with fiber dimension {fd}")
            self.nb = 6
            self.dim = 10
            w6 = 1.0 if fd == 3 else metric.t
            self._w = np.array([metric.t] * 3 + [1.0, 1.0, w6])
        elif space == "full_tangent":
            self.basis = lo.basis_for(metric, n)
            self._R = lo.curvature_tensor(metric, self.basis)
            self._w = self.basis.weights(metric)
            self.nb = self.basis.dim
            self.dim = 2 * self.basis.dim
        else:
            raise ValueError(f"unknown search space {space!r}")

    # coefficient layout: first vector occupies the first 4 slots (or all slots
    # for full_tangent) of the second vector's coordinate system
    def _xy(self, Z):
        if self.space == "full_tangent":
            return Z[..., : self.nb], Z[..., self.nb:]
        x = np.zeros(Z.shape[:-1] + (self.nb,))
        x[..., :4] = Z[..., :4]
        return x, Z[..., 4:]

    def plane(self, z):
        z = np.asarray(z, dtype=float)
        if self.space == "full_tangent":
            return z[..., : self.nb].copy(), z[..., self.nb:].copy()
        if self.space == "reduced_s7":
            b = np.concatenate([z[..., 4:], np.zeros(z.shape[:-1] + (1,))], axis=-1)
            return ReducedPlane(z[..., :4], b)
        if self.space == "reduced_sp":
            return ReducedPlane(z[..., :4], z[..., 4:])
        return BergerPlane(z[..., :4], z[..., 4:])

    def numerator(self, Z):
        if self.space == "full_tangent":
            x, y = self._xy(Z)
            return lo.tensor_curvature(self._R, x, y)
        p = self.plane(Z)
        if self.space.startswith("reduced_berger"):
            return cc.berger_numerator(self.metric, p)
        return cc.curvature_quadratic(self._params, p)

    def _norms(self, Z):
        x, y = self._xy(Z)
        w = self._w
        return np.sum(w * x * x, -1), np.sum(w * y * y, -1), np.sum(w * x * y, -1)

    def values(self, Z):
        """Sectional curvature for a batch; degenerate planes give ``nan``."""
        Z = np.asarray(Z, dtype=float)
        xx, yy, xy = self._norms(Z)
        g = xx * yy - xy * xy
        num = self.numerator(Z)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(g > GRAM_TOL * xx * yy, num / g, np.nan)
        return out

    def value(self, z) -> float:
        return float(self.values(np.asarray(z, dtype=float)[None])[0])

    def value_and_grad(self, z) -> tuple[float, np.ndarray]:
        z = np.asarray(z, dtype=float)
        if self.space == "full_tangent":
            x, y = self._xy(z)
            w = self._w
            xx, yy, xy = self._norms(z)
            g = xx * yy - xy * xy
            if not g > GRAM_TOL * xx * yy:
                return np.nan, np.zeros_like(z)
            # A[a, b] = R(e_a, e_b, x, y)
            A = np.tensordot(self._R @ y, x, axes=([2], [0]))
            sec = float(x @ A @ y) / g
            dk_x, dk_y = 2 * (A @ y), 2 * (x @ A)
            dg_x = 2 * yy * w * x - 2 * xy * w * y
            dg_y = 2 * xx * w * y - 2 * xy * w * x
            return sec, np.concatenate([(dk_x - sec * dg_x) / g, (dk_y - sec * dg_y) / g])
        h = FD_STEP * np.maximum(np.abs(z), 1.0)
        E = np.diag(h)
        vals = self.values(np.concatenate([z[None], z + E, z - E]))
        return float(vals[0]), (vals[1 : self.dim + 1] - vals[self.dim + 1 :]) / (2 * h)

    def gradient(self, z) -> np.ndarray:
        return self.value_and_grad(z)[1]

    def normalize(self, z) -> np.ndarray:
        """Rescale to unit vectors with the second orthogonal to the first."""
        z = np.array(z, dtype=float)
        x, y = self._xy(z)
        w = self._w
        xn = x / np.sqrt(np.sum(w * x * x))
        y = y - np.sum(w * xn * y) * xn
        y = y / np.sqrt(np.sum(w * y * y))
        if self.space == "full_tangent":
            return np.concatenate([xn, y])
        return np.concatenate([xn[:4], y])

    def sample(self, rng: np.random.Generator, m: int) -> np.ndarray:
        return rng.normal(size=(m, self.dim))


@dataclass(frozen=True)
class RestartResult:
    index: int
    value: float
    z: np.ndarray
    converged: bool


def _objective(problem: Problem, sign: float):
    # The quotient is constant along rescalings of either vector and along
    # Y -> Y + cX; the penalty vanishes on orthonormal pairs and removes
    # those flat directions without moving the extremal values.
    w = problem._w

    def penalty(z):
        x, y = problem._xy(z)
        xx, yy, xy = np.sum(w * x * x), np.sum(w * y * y), np.sum(w * x * y)
        val = (xx - 1) ** 2 + (yy - 1) ** 2 + xy**2
        gx = 4 * (xx - 1) * w * x + 2 * xy * w * y
        gy = 4 * (yy - 1) * w * y + 2 * xy * w * x
        if problem.space == "full_tangent":
            return val, np.concatenate([gx, gy])
        return val, np.concatenate([gx[:4], gy])

    def fg(z):
        v, gr = problem.value_and_grad(z)
        pv, pg = penalty(z)
        if not np.isfinite(v):
            return 1e6 + pv, pg
        gr = np.nan_to_num(gr, nan=0.0, posinf=0.0, neginf=0.0)
        return sign * v + pv, sign * gr + pg

    return fg


def _run_restart(args) -> RestartResult:
    problem, index, z0, sign, cfg = args
    fg = _objective(problem, sign)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", (OptimizeWarning, RuntimeWarning))
        res = minimize(fg, z0, jac=True, method="BFGS",
                       options={"gtol": cfg.gtol, "maxiter": cfg.max_iterations})
        z = res.x
        converged = bool(res.success) or float(np.max(np.abs(fg(z)[1]))) <= 1e-6
        if not converged:
            z = problem.normalize(z)
            nm = minimize(lambda u: fg(u)[0], z, method="Nelder-Mead",
                          options={"xatol": cfg.xtol, "fatol": cfg.xtol,
                                   "maxiter": 10 * cfg.max_iterations, "adaptive": True})
            if nm.fun <= fg(z)[0]:
                z = nm.x
            converged = bool(nm.success)
    z = problem.normalize(z)
    return RestartResult(index, problem.value(z), z, converged)


def _run_all(tasks, jobs: int) -> list[RestartResult]:
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_run_restart, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [_run_restart(t) for t in tasks]


def _starts(problem: Problem, rng, restarts: int, screen: int, sign: float) -> np.ndarray:
    Z = problem.sample(rng, screen)
    vals = sign * problem.values(Z)
    vals = np.where(np.isfinite(vals), vals, np.inf)
    n_best = max(1, restarts // 2)
    order = np.argsort(vals, kind="stable")
    best = Z[order[:n_best]]
    rest = problem.sample(rng, restarts - n_best)
    return np.concatenate([best, rest])


def _best(results: list[RestartResult], sign: float) -> RestartResult | None:
    # keyed on (value, index) so the merge does not depend on completion order
    finite = [r for r in results if np.isfinite(r.value)]
    return min(finite, key=lambda r: (sign * r.value, r.index), default=None)


@dataclass(frozen=True)
class ExtremumReport:
    space: str
    min_value: float | None
    max_value: float | None
    argmin: object = field(repr=False)
    argmax: object = field(repr=False)
    min_converged: tuple[bool, ...]
    max_converged: tuple[bool, ...]
    wall_clock: float
    restarts: int


def _resolve(metric, config: OptimizerConfig | None):
    config = config or OptimizerConfig()
    space = config.space or default_space(metric)
    restarts = config.restarts or (256 if space == "full_tangent" else 64)
    return config, space, restarts


def _optimize(problem: Problem, config: OptimizerConfig, restarts: int, sign: float, rng,
              starts: np.ndarray | None = None):
    if starts is None:
        starts = _starts(problem, rng, restarts, config.screen, sign)
    tasks = [(problem, i, z0, sign, config) for i, z0 in enumerate(starts)]
    results = _run_all(tasks, config.jobs)
    flags = tuple(r.converged for r in results)
    good = [r for r in results if r.converged]
    if not good:
        raise OptimizationError(f"all {len(results)} restarts failed to converge in {problem.space}")
    return _best(good, sign), flags


def extremize(metric, config: OptimizerConfig | None = None, which: str = "both") -> ExtremumReport:
    """Minimum and maximum sectional curvature over the configured search space."""
    if which not in ("both", "min", "max"):
        raise ValueError(f"which must be 'both', 'min' or 'max', got {which!r}")
    config, space, restarts = _resolve(metric, config)
    problem = Problem(metric, space, config.n)
    rng = np.random.default_rng(config.seed)
    t0 = time.perf_counter()
    lo_res = hi_res = None
    lo_flags: tuple[bool, ...] = ()
    hi_flags: tuple[bool, ...] = ()
    if which in ("both", "min"):
        lo_res, lo_flags = _optimize(problem, config, restarts, 1.0, rng)
    if which in ("both", "max"):
        hi_res, hi_flags = _optimize(problem, config, restarts, -1.0, rng)
    return ExtremumReport(
        space=space,
        min_value=None if lo_res is None else lo_res.value,
        max_value=None if hi_res is None else hi_res.value,
        argmin=None if lo_res is None else problem.plane(lo_res.z),
        argmax=None if hi_res is None else problem.plane(hi_res.z),
        min_converged=lo_flags,
        max_converged=hi_flags,
        wall_clock=time.perf_counter() - t0,
        restarts=restarts,
    )


@dataclass(frozen=True)
class Certificate:
    """Outcome of an empirical positivity check; not a proof."""

    certified_positive: bool
    min_value: float
    plane: object = field(repr=False)
    samples: int


def certify_positive(metric, config: OptimizerConfig | None = None) -> Certificate:
    """Sample planes, refine the worst ones, and report a negative plane if found."""
    config, space, restarts = _resolve(metric, config)
    problem = Problem(metric, space, config.n)
    rng = np.random.default_rng(config.seed)
    worst = None
    chunk = 20_000
    done = 0
    keep = max(1, restarts // 2)
    while done < config.samples:
        m = min(chunk, config.samples - done)
        Z = problem.sample(rng, m)
        vals = problem.values(Z)
        vals = np.where(np.isfinite(vals), vals, np.inf)
        idx = np.argsort(vals, kind="stable")[:keep]
        cand = (vals[idx], Z[idx])
        if worst is None:
            worst = cand
        else:
            v = np.concatenate([worst[0], cand[0]])
            z = np.concatenate([worst[1], cand[1]])
            o = np.argsort(v, kind="stable")[:keep]
            worst = (v[o], z[o])
        done += m
    starts = np.concatenate([worst[1], problem.sample(rng, restarts - keep)])
    best, _ = _optimize(problem, config, restarts, 1.0, rng, starts=starts)
    plane = problem.plane(best.z)
    return Certificate(bool(best.value >= -config.curvature_tol), best.value, plane, config.samples)


def reduction_check(metric, config: OptimizerConfig | None = None) -> float:
    """Gap between the minimum over all tangent planes and over the reduced form."""
    config = config or OptimizerConfig()
    reduced_cfg = config.replace(space=default_space(metric), restarts=config.restarts)
    full_cfg = config.replace(space="full_tangent", restarts=config.restarts)
    lo_red = extremize(metric, reduced_cfg, which="min").min_value
    lo_full = extremize(metric, full_cfg, which="min").min_value
    return abs(lo_full - lo_red)
