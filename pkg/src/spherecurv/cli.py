"""Command line interface: classification, pinching, figure sweeps, verification.

Exit codes: 0 success, 2 usage or parameter error, 3 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from . import curvature_core as cc
from . import lie_oracle as lo
from . import optimizer as opt
from . import pinching as pin
from . import positivity as pos
from .errors import NotPositivelyCurvedError, OptimizationError
from .params import BergerParam, BergerPlane, MetricParams, ReducedPlane

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 2, 3
FIGURES = ("figure1", "figure4", "figure5", "figure6", "figure7", "figure8")
SUITES = ("components", "oracle", "reduction", "theoremA", "theoremB")


class UsageError(Exception):
    pass


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if x is None:
        return ""
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def render(rows: list[dict], columns: list[str], style: str) -> str:
    """Render uniform rows as csv, json or an aligned text table."""
    if style == "json":
        return json.dumps([_jsonable({c: r.get(c) for c in columns}) for r in rows], indent=2) + "\n"
    if style == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(r.get(c)) for c in columns])
        return buf.getvalue()
    cells = [[fmt(r.get(c)) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(wd) for c, wd in zip(columns, widths)).rstrip()]
    lines += ["  ".join(v.ljust(wd) for v, wd in zip(row, widths)).rstrip() for row in cells]
    return "\n".join(lines) + "\n"


# configuration -------------------------------------------------------------

_CONFIG_TYPES = {f.name: f.type for f in fields(opt.OptimizerConfig)}


def _parse_config_file(path: str) -> dict:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def _coerce(key: str, value: str):
    if key not in _CONFIG_TYPES:
        raise UsageError(f"unknown config key {key!r}")
    kind = str(_CONFIG_TYPES[key])
    try:
        if key == "space":
            return value or None
        if "int" in kind:
            return int(value)
        return float(value)
    except ValueError:
        raise UsageError(f"bad value for {key}: {value!r}") from None


def build_config(args) -> opt.OptimizerConfig:
    values = {}
    if args.config:
        for k, v in _parse_config_file(args.config).items():
            values[k] = _coerce(k, v)
    for name in ("seed", "jobs", "restarts", "samples"):
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    try:
        return opt.OptimizerConfig(**values)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


# classify ------------------------------------------------------------------

def cmd_classify(args, config) -> tuple[int, str]:
    params = MetricParams(args.t1, args.t2, args.t3)
    verdict = pos.classify(params)
    inv = pos.invariants(params)
    row = {"t1": params.t1, "t2": params.t2, "t3": params.t3, "verdict": verdict.name,
           "binding_index": getattr(verdict, "binding_index", None)}
    for name in ("V", "H", "L", "E"):
        for i in (1, 2, 3):
            row[f"{name}{i}"] = getattr(inv, name)[i - 1]
    row["failing"] = " ".join(getattr(verdict, "failing", ())) or None
    fam = verdict.zero_plane_families[0] if isinstance(verdict, pos.Boundary) else None
    row["Z"] = fam.Z if fam else None
    row["zero_plane_sign"] = fam.sign if fam else None
    columns = list(row)
    if args.format != "text":
        return EXIT_OK, render([row], columns, args.format)
    lines = [f"verdict: {verdict.name}"]
    if row["binding_index"] is not None:
        lines.append(f"binding index: {row['binding_index']}")
    if row["failing"]:
        lines.append(f"failing: {row['failing']}")
    if fam:
        lines.append(f"zero planes: Z = {fmt(fam.Z)}, a4 = {fmt(fam.a4)}, sign = {fam.sign:+d}")
    inv_rows = [{"i": i, "V": inv.V[i - 1], "H": inv.H[i - 1], "L": inv.L[i - 1], "E": inv.E[i - 1]}
                for i in (1, 2, 3)]
    return EXIT_OK, "\n".join(lines) + "\n" + render(inv_rows, ["i", "V", "H", "L", "E"], "text")


# pinch ---------------------------------------------------------------------

def cmd_pinch(args, config) -> tuple[int, str]:
    rep = pin.pinching_report(args.t)
    row = {"t": rep.t, "fiber_dim": args.fiber, "max_sec": rep.max_sec, "min_sec": rep.min_sec,
           "delta": rep.delta, "max_regime": rep.max_regime, "min_regime": rep.min_regime,
           "natural_delta": rep.natural_delta}
    code = EXIT_OK
    if args.verify:
        report = opt.extremize(BergerParam(args.t, args.fiber), config)
        row["optimizer_max"] = report.max_value
        row["optimizer_min"] = report.min_value
        diff = max(abs(report.max_value - rep.max_sec), abs(report.min_value - rep.min_sec))
        row["max_abs_diff"] = diff
        row["verified"] = diff < 1e-4
        if not row["verified"]:
            code = EXIT_VERIFY
    columns = list(row)
    if args.format != "text":
        return code, render([row], columns, args.format)
    out = [f"{c}: {fmt(row[c])}" for c in columns]
    for c in rep.critical:
        out.append(f"critical plane ({c.family}): r = {fmt(c.r)}, s = {fmt(c.s)}, F = {fmt(c.F)}")
    return code, "\n".join(out) + "\n"


# sweeps --------------------------------------------------------------------

def _open_grid(lo_: float, hi: float, n: int) -> np.ndarray:
    return np.linspace(lo_, hi, n + 2)[1:-1]


def _surface_row(pt):
    t1, t2 = pt
    row = {"t1": t1, "t2": t2}
    try:
        v = pos.surface_t3(t1, t2, "V3_zero")
        b = pos.surface_t3(t1, t2, "L3_boundary")
    except ValueError:
        v = b = math.nan
    row.update(V3_zero=v, L3_boundary=b, gap=v - b,
               separating_residual=float(pos.separating_curve_residual(t1, t2)))
    return row


def _map(fn, items, jobs: int):
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, items, chunksize=max(1, len(items) // (8 * jobs))))
    return [fn(x) for x in items]


def _classify_row(pt):
    t1, t2, t3 = pt
    v = pos.classify(MetricParams(t1, t2, t3))
    return {"t1": t1, "t2": t2, "t3": t3, "verdict": v.name, "in_cone": not isinstance(v, pos.OutsideCone),
            "positive": isinstance(v, pos.PositiveCurvature)}


def sweep_rows(figure: str, points: int | None, jobs: int = 1) -> tuple[list[dict], list[str]]:
    if figure == "figure1":
        n = points or 500
        rows = []
        for t in _open_grid(0.0, 4.0 / 3.0, n):
            d, nd = pin.pinching_delta(t), pin.natural_delta(t)
            rows.append({"t": t, "delta": d, "natural_delta": nd, "difference": nd - d})
        return rows, ["t", "delta", "natural_delta", "difference"]
    if figure == "figure4":
        n = points or 100
        pts = [(a, b, 1.0 - a - b) for a in _open_grid(0, 1, n) for b in _open_grid(0, 1, n) if a + b < 1]
        return _map(_classify_row, pts, jobs), ["t1", "t2", "t3", "verdict", "in_cone", "positive"]
    if figure in ("figure5", "figure6"):
        n = points or 200
        g = _open_grid(0.0, 4.0 / 3.0, n)
        rows = _map(_surface_row, [(a, b) for a in g for b in g], jobs)
        cols = ["t1", "t2", "V3_zero", "L3_boundary"] if figure == "figure5" else ["t1", "t2", "gap", "separating_residual"]
        return rows, cols
    if figure in ("figure7", "figure8"):
        n = points or 200
        t = np.linspace(0.0, 0.5, n)
        s = pos.slice_curve(t)
        v = 4.0 * t / 3.0
        if figure == "figure7":
            return [{"t1": a, "boundary_t3": b, "V3_zero_t3": c} for a, b, c in zip(t, s, v)], \
                ["t1", "boundary_t3", "V3_zero_t3"]
        return [{"t1": a, "difference": c - b} for a, b, c in zip(t, s, v)], ["t1", "difference"]
    raise UsageError(f"unknown figure {figure!r}")


def cmd_sweep(args, config) -> tuple[int, str]:
    if args.points is not None and args.points < 2:
        raise UsageError("--points must be at least 2")
    rows, cols = sweep_rows(args.figure, args.points, config.jobs)
    style = "csv" if args.format == "text" else args.format
    return EXIT_OK, render(rows, cols, style)


# verification suites -------------------------------------------------------

@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def _random_cone_metrics(rng, count: int, positive: bool | None = None) -> list[MetricParams]:
    out = []
    while len(out) < count:
        p = MetricParams(*rng.uniform(0.05, 4.0 / 3.0, 3))
        v = pos.classify(p)
        if isinstance(v, pos.OutsideCone):
            continue
        if positive is None or positive == isinstance(v, pos.PositiveCurvature):
            out.append(p)
    return out


def verify_components(config) -> list[Check]:
    rng = np.random.default_rng(config.seed)
    basis = lo.build_basis("sp", 3)
    worst, count = 0.0, 0
    for _ in range(20):
        params = MetricParams(*rng.uniform(0.1, 1.4, 3))
        R = lo.curvature_tensor(params, basis)
        for entry in cc.component_table(params, 3):
            got = R[tuple(basis.index(lab) for lab in entry.indices)]
            worst = max(worst, abs(got - entry.value))
            count += 1
    return [Check("components", worst <= 1e-9, f"{count} entries, max deviation {worst:.3e}")]


def verify_oracle(config) -> list[Check]:
    rng = np.random.default_rng(config.seed)
    basis = lo.build_basis("sp", 3)
    worst = 0.0
    for _ in range(100):
        params = MetricParams(*rng.uniform(0.1, 1.4, 3))
        plane = ReducedPlane(rng.normal(size=4), rng.normal(size=8))
        X, Y = lo.embed_reduced_plane(plane, basis)
        worst = max(worst, abs(cc.sectional_reduced(params, plane) - lo.oracle_sectional(params, X, Y)))
    checks = [Check("oracle/reduced", worst <= 1e-9, f"max deviation {worst:.3e} over 100 planes")]
    worst = 0.0
    for fd, b in ((3, lo.build_basis("sp", 3)), (7, lo.build_basis("spin", 9))):
        for _ in range(50):
            param = BergerParam(rng.uniform(0.1, 1.4), fd)
            plane = BergerPlane(rng.normal(size=4), rng.normal(size=6))
            X, Y = lo.embed_reduced_plane(plane, b)
            worst = max(worst, abs(cc.berger_sectional(param, plane) - lo.oracle_sectional(param, X, Y)))
    checks.append(Check("oracle/berger", worst <= 1e-9, f"max deviation {worst:.3e} over 100 planes"))
    return checks


def verify_reduction(config) -> list[Check]:
    rng = np.random.default_rng(config.seed)
    checks = []
    for p in _random_cone_metrics(rng, 3):
        gap = opt.reduction_check(p, config)
        checks.append(Check(f"reduction {p.as_tuple()}", gap <= 1e-5, f"gap {gap:.3e}"))
    for t in (0.6, 1.2):
        gap = opt.reduction_check(BergerParam(t, 7), config)
        checks.append(Check(f"reduction spin t={t}", gap <= 1e-5, f"gap {gap:.3e}"))
    return checks


def verify_berger_range(config) -> list[Check]:
    checks = []
    for fd in (3, 7):
        bad = []
        for t in np.round(np.arange(0.05, 1.401, 0.05), 10):
            lo_val = opt.extremize(BergerParam(t, fd), config, which="min").min_value
            if (lo_val > 0) != (t < 4.0 / 3.0):
                bad.append(float(t))
        checks.append(Check(f"theoremA fiber {fd}", not bad, f"mismatches at t = {bad}" if bad else "sign pattern matches 0 < t < 4/3"))
    return checks


def verify_classifier(config) -> list[Check]:
    rng = np.random.default_rng(config.seed)
    checks = []
    for p in _random_cone_metrics(rng, 8, positive=True):
        cert = opt.certify_positive(p, config)
        checks.append(Check(f"theoremB positive {p.as_tuple()}", cert.certified_positive, f"min {cert.min_value:.3e}"))
    for p in _random_cone_metrics(rng, 4, positive=False):
        cert = opt.certify_positive(p, config)
        checks.append(Check(f"theoremB mixed {p.as_tuple()}", not cert.certified_positive, f"min {cert.min_value:.3e}"))
    return checks


_SUITES = {
    "components": verify_components,
    "oracle": verify_oracle,
    "reduction": verify_reduction,
    "theoremA": verify_berger_range,
    "theoremB": verify_classifier,
}


def cmd_verify(args, config) -> tuple[int, str]:
    checks = _SUITES[args.suite](config)
    rows = [{"check": c.name, "passed": c.passed, "detail": c.detail} for c in checks]
    code = EXIT_OK if all(c.passed for c in checks) else EXIT_VERIFY
    if args.format != "text":
        return code, render(rows, ["check", "passed", "detail"], args.format)
    lines = [f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}" for c in checks]
    return code, "\n".join(lines) + "\n"


# entry point ---------------------------------------------------------------

def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"must be a positive real: {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "csv", "json"), default="text")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int)
    common.add_argument("--restarts", type=int)
    common.add_argument("--samples", type=int)
    common.add_argument("--out", help="write output to this path instead of stdout")
    common.add_argument("--config", help="key=value file with optimizer defaults")

    parser = argparse.ArgumentParser(prog="spherecurv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="apply the positivity criterion to (t1, t2, t3)")
    for name in ("t1", "t2", "t3"):
        p.add_argument(name, type=_positive_float)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("pinch", parents=[common], help="extremal curvatures and pinching of g_t")
    p.add_argument("t", type=_positive_float)
    p.add_argument("--fiber", type=int, choices=(3, 7), default=3)
    p.add_argument("--verify", action="store_true", help="compare with the optimizer")
    p.set_defaults(func=cmd_pinch)

    p = sub.add_parser("sweep", parents=[common], help="emit figure data as a grid")
    p.add_argument("figure", choices=FIGURES)
    p.add_argument("--points", type=int, help="grid points per axis")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("suite", choices=SUITES)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = build_config(args)
        code, text = args.func(args, config)
    except (UsageError, NotPositivelyCurvedError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OptimizationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
