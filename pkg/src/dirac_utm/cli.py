"""Command-line scenario runner.

``dirac-utm run <cfg>``
    Reference solve, representation evaluation on the query grid, and the
    files ``solution.csv``, ``errors.csv`` and ``report.txt``.
``dirac-utm convergence <cfg> --levels N``
    Reference self-convergence and panel-doubling study in ``convergence.csv``.

Exit status is 1 for configuration errors and 2 for solver errors.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import ScenarioConfig, load_config
from .errors import ConfigError, SolverError
from .massive.closure import fixed_point_traces
from .massive.evaluate import MassiveEvaluator
from .massive.terms import structural_dependency_check
from .massless import MASSLESS_DEPENDENCIES, massless_field
from .model import Component, Region
from .reference import ReferenceSolution, solve_reference

log = logging.getLogger("dirac_utm")

FMT = ".17g"
CONTINUITY_TIMES = 20
RECOVERY_T = 1e-6
RECOVERY_POINTS = 50


def _f(v: float) -> str:
    return format(float(v), FMT)


# ---------------------------------------------------------------------------
# evaluation

class Solver:
    """Evaluate one configured scenario on arbitrary (region, component, x, t) batches."""

    def __init__(self, cfg: ScenarioConfig, ref: ReferenceSolution, variant: str = None,
                 traces=None):
        self.cfg = cfg
        self.scenario = cfg.scenario
        self.ref = ref
        self.variant = variant or cfg.variant
        self.massless = self.scenario.massless
        if not self.massless and (self.scenario.m1 == 0 or self.scenario.m2 == 0):
            raise ConfigError("one massless and one massive region is not supported by the "
                              "representation evaluator", field="masses")
        if not self.massless:
            spec = cfg.quadrature
            if self.variant != "corrected":
                # the printed lists do not decay, so the tail test cannot pass
                spec = dataclasses.replace(spec, adaptive=False)
            traces = ref.traces if traces is None else traces
            self.evaluator = MassiveEvaluator(self.scenario, traces, self.variant, spec)

    def __call__(self, region, component, x, t, diagnostics=False):
        x = np.asarray(x, dtype=float)
        if self.massless:
            vals = np.asarray(massless_field(self.scenario, x, t, region, component), dtype=complex)
            return vals * np.ones(x.shape), {}
        ev = self.evaluator.evaluate(region, component, x, t, diagnostics=diagnostics)
        return ev.values, ev.per_term


def _batches(cfg: ScenarioConfig):
    for t in cfg.query.t:
        for region in Region:
            for comp in Component:
                yield region, comp, t


def evaluate_grid(solver: Solver, threads: int = 1, diagnostics: bool = False):
    """Representation values on the configured grid, keyed by (region, component, t)."""
    cfg = solver.cfg
    batches = list(_batches(cfg))

    def work(b):
        region, comp, t = b
        return solver(region, comp, cfg.query.positions(region), t, diagnostics)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, batches))
    else:
        results = [work(b) for b in batches]
    return {b: r for b, r in zip(batches, results)}


def run_reference(cfg: ScenarioConfig, dx: float = None, extra_times=()) -> ReferenceSolution:
    dx = cfg.reference_dx if dx is None else dx
    times = sorted(set(cfg.query.t) | set(extra_times))
    return solve_reference(cfg.scenario, dx, snapshot_times=times)


# ---------------------------------------------------------------------------
# report checks

def continuity_check(solver: Solver):
    T = solver.scenario.geometry.T
    ts = np.linspace(T / CONTINUITY_TIMES, T, CONTINUITY_TIMES)
    worst = {}
    for comp in Component:
        diffs = [abs(solver(Region.LEFT, comp, [0.0], t)[0][0] - solver(Region.RIGHT, comp, [0.0], t)[0][0])
                 for t in ts]
        worst[comp] = max(diffs)
    return worst


def recovery_check(solver: Solver):
    worst = 0.0
    for region in Region:
        x = solver.cfg.query.positions(region)
        xs = np.linspace(x[0], x[-1], RECOVERY_POINTS + 2)[1:-1]
        for comp in Component:
            got = solver(region, comp, xs, RECOVERY_T)[0]
            want = solver.scenario.initial_profile(region, comp)(xs)
            worst = max(worst, float(np.max(np.abs(got - want))))
    return worst


def dependency_lines(solver: Solver):
    lines = []
    geo = solver.scenario.geometry
    for region in Region:
        for comp in Component:
            if solver.massless:
                slots = sorted(MASSLESS_DEPENDENCIES[(region, comp)])
                lines.append(f"  {region.name.lower()} psi{int(comp)}: {', '.join(slots)}")
            else:
                rep = structural_dependency_check(comp, region, geo.kind, solver.variant)
                lines.append(f"  {region.name.lower()} psi{int(comp)}: {', '.join(sorted(rep['slots']))}"
                             f"  (interface traces: {', '.join(sorted(rep['traces'])) or 'none'})")
    return lines


def grid_errors(cfg, ref, values):
    rows = []
    for (region, comp, t), (vals, _) in values.items():
        x = cfg.query.positions(region)
        err = np.abs(vals - ref.field(x, t, region, comp))
        rows += [(region, comp, xv, t, e) for xv, e in zip(x, err)]
    errs = np.array([r[-1] for r in rows])
    return rows, float(errs.max()), float(np.sqrt(np.mean(errs ** 2)))


# ---------------------------------------------------------------------------
# commands

def _names(region, comp):
    return region.name.lower(), f"psi{int(comp)}"


def write_solution(path, cfg, ref, values):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["region", "component", "x", "t", "re", "im", "method"])
        for (region, comp, t), (vals, _) in values.items():
            x = cfg.query.positions(region)
            refv = ref.field(x, t, region, comp)
            for method, arr in (("utm", vals), ("reference", refv)):
                for xv, v in zip(x, arr):
                    w.writerow([*_names(region, comp), _f(xv), _f(t), _f(v.real), _f(v.imag), method])


def write_errors(path, rows, linf, l2):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "region", "component", "x", "t", "abs_error"])
        for region, comp, xv, t, e in rows:
            w.writerow(["point", *_names(region, comp), _f(xv), _f(t), _f(e)])
        w.writerow(["linf", "all", "all", "", "", _f(linf)])
        w.writerow(["l2", "all", "all", "", "", _f(l2)])


def write_diagnostics(path, cfg, values):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["region", "component", "x", "t", "term", "re", "im"])
        for (region, comp, t), (_, per) in values.items():
            x = cfg.query.positions(region)
            for name, arr in per.items():
                for xv, v in zip(x, arr):
                    w.writerow([*_names(region, comp), _f(xv), _f(t), name, _f(v.real), _f(v.imag)])


def write_traces(out: Path, ref: ReferenceSolution):
    rows = list(ref.traces.rows)
    with open(out / "traces.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"{r}_{p}" for r in rows for p in ("re", "im")])
        for n, t in enumerate(ref.traces.times):
            w.writerow([_f(t)] + [_f(f(ref.traces.rows[r][n])) for r in rows
                                  for f in (np.real, np.imag)])
    with open(out / "mesh.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "t", "region", "re_psi1", "im_psi1", "re_psi2", "im_psi2"])
        for step in sorted(ref.snapshots):
            p1, p2 = ref.snapshots[step]
            t = step * ref.dx
            for i, xv in enumerate(ref.x):
                region = "left" if i < ref.i0 else ("right" if i > ref.i0 else "interface")
                w.writerow([_f(xv), _f(t), region, _f(p1[i].real), _f(p1[i].imag),
                            _f(p2[i].real), _f(p2[i].imag)])


def cmd_run(cfg: ScenarioConfig, out: Path, threads: int = 1, dump_traces: bool = False,
            diagnostics: bool = False, fixed_point: bool = False) -> dict:
    t0 = time.perf_counter()
    out.mkdir(parents=True, exist_ok=True)
    ref = run_reference(cfg)
    traces = None
    if fixed_point and not cfg.scenario.massless:
        closure = fixed_point_traces(cfg.scenario)
        traces = closure.traces
    solver = Solver(cfg, ref, traces=traces)
    values = evaluate_grid(solver, threads, diagnostics)
    rows, linf, l2 = grid_errors(cfg, ref, values)
    write_solution(out / "solution.csv", cfg, ref, values)
    write_errors(out / "errors.csv", rows, linf, l2)
    if diagnostics and not solver.massless:
        write_diagnostics(out / "terms.csv", cfg, values)
    if dump_traces:
        write_traces(out, ref)

    sc = cfg.scenario
    geo = sc.geometry
    lines = [
        "dirac-utm run report",
        f"geometry: {geo.kind.value}, T={geo.T}" + (f", L={geo.L}" if geo.finite else ""),
        f"masses: m1={sc.m1}, m2={sc.m2}",
        f"solver: {'massless transport' if solver.massless else 'massive representation'}"
        + ("" if solver.massless else f", term lists: {solver.variant}"),
        f"reference dx: {cfg.reference_dx}",
        "traces: " + ("experimental fixed point, updates "
                      + ", ".join(f"{c:.2e}" for c in closure.changes) if traces is not None
                      else "reference mesh"),
        "",
        f"grid error vs reference: linf={linf:.3e}, l2={l2:.3e} over {len(rows)} points",
        "",
        "corner compatibility mismatch:",
    ]
    lines += [f"  {k}: {v:.3e}" for k, v in sc.compatibility_mismatch().items()]
    cont = continuity_check(solver)
    lines += ["", f"interface continuity on {CONTINUITY_TIMES} times:"]
    lines += [f"  psi{int(c)}: max |left - right| = {v:.3e}" for c, v in cont.items()]
    lines += ["", f"initial-data recovery at t={RECOVERY_T:g}, {RECOVERY_POINTS} points per region: "
                  f"max error {recovery_check(solver):.3e}"]
    lines += ["", f"reference conservation residual: {ref.conservation_residual():.3e} (dx={ref.dx})"]
    lines += ["", "data slots read by each formula:"] + dependency_lines(solver)
    if not solver.massless:
        others = [v for v in ("corrected", "printed", "printed_minimal") if v != solver.variant]
        if not geo.finite:
            others = [v for v in others if v != "printed_minimal"]
        lines += ["", "other term lists (reported, not gated):"]
        for variant in others:
            _, dev, _ = grid_errors(cfg, ref, evaluate_grid(Solver(cfg, ref, variant), threads))
            lines.append(f"  {variant}: linf vs reference = {dev:.3e}")
    lines += ["", f"wall time: {time.perf_counter() - t0:.2f} s"]
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    return {"linf": linf, "l2": l2, "continuity": cont}


def _order(a, b):
    return float(np.log2(a / b)) if a > 0 and b > 0 else float("nan")


def cmd_convergence(cfg: ScenarioConfig, out: Path, levels: int, threads: int) -> list:
    """Reference levels from ``dx * 2**(levels-1)`` down to the configured dx."""
    if levels < 3:
        raise ConfigError("convergence needs at least 3 levels", field="levels")
    out.mkdir(parents=True, exist_ok=True)
    geo = cfg.scenario.geometry
    dxs = [cfg.reference_dx * 2.0 ** (levels - 1 - i) for i in range(levels)]
    coarsest = dxs[0]
    lengths = {"T": geo.T, **({"L": geo.L} if geo.finite else {})}
    lengths.update({f"query.t[{i}]": t for i, t in enumerate(cfg.query.t)})
    for name, length in lengths.items():
        if abs(round(length / coarsest) * coarsest - length) > 1e-12 * max(1.0, length):
            raise ConfigError(f"coarsest level spacing {coarsest} does not tile {name}={length}",
                              field="reference.dx")
    refs = [solve_reference(cfg.scenario, coarsest, snapshot_times=cfg.query.t)]
    # every level shares the coarsest mesh extent so nodes nest
    refs += [solve_reference(cfg.scenario, dx, snapshot_times=cfg.query.t, x_max=refs[0].x[-1])
             for dx in dxs[1:]]
    # compare on the coarsest mesh nodes at the final time
    coarse = refs[0]
    finals = []
    for r in refs:
        stride = round(coarse.dx / r.dx)
        p1, p2 = r.snapshot(geo.T)
        c = slice(r.i0 - stride * coarse.i0, r.i0 + stride * coarse.i0 + 1, stride)
        finals.append(np.concatenate([p1[c], p2[c]]))
    diffs = [float(np.max(np.abs(finals[i] - finals[i + 1]))) for i in range(levels - 1)]
    resid = [r.conservation_residual() for r in refs]

    finest = refs[-1]
    solver = Solver(cfg, finest)
    rows = []
    if solver.massless:
        utm = [grid_errors(cfg, r, evaluate_grid(Solver(cfg, r), threads))[1] for r in refs]
        panels = [""] * levels
    else:
        k_max = max(float(solver.evaluator.evaluate(Region.LEFT, Component.PSI1, [0.0], geo.T).k_max), 1.0)
        utm, panels = [], []
        for i in range(levels):
            p = 8 * 2 ** i
            spec = dataclasses.replace(solver.evaluator.spec, k_max=k_max, panels=p, adaptive=False)
            s = Solver(cfg, finest)
            s.evaluator = MassiveEvaluator(cfg.scenario, finest.traces, s.variant, spec)
            utm.append(grid_errors(cfg, finest, evaluate_grid(s, threads))[1])
            panels.append(p)
    for i, dx in enumerate(dxs):
        rows.append({
            "level": i,
            "dx": _f(dx),
            "self_diff": _f(diffs[i]) if i < levels - 1 else "",
            "self_order": _f(_order(diffs[i - 1], diffs[i])) if 0 < i < levels - 1 else "",
            "conservation_residual": _f(resid[i]),
            "conservation_order": _f(_order(resid[i - 1], resid[i])) if i > 0 else "",
            "panels": panels[i],
            "utm_error": _f(utm[i]),
        })
    with open(out / "convergence.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    return rows


# ---------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dirac-utm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="JSON scenario file")
        p.add_argument("--erratum-fixes", action="store_true",
                       help="use the corrected term lists for the massive formulas")
        p.add_argument("--threads", type=int, default=1, help="worker threads for grid evaluation")
        p.add_argument("--output", help="output directory (overrides the config)")

    run = sub.add_parser("run", help="solve, compare against the reference, write CSV and report")
    common(run)
    run.add_argument("--dump-traces", action="store_true",
                     help="also write traces.csv and mesh.csv from the reference solve")
    run.add_argument("--fixed-point-traces", action="store_true",
                     help="experimental: close the traces by fixed-point iteration instead of the mesh")
    run.add_argument("--diagnostics", action="store_true",
                     help="also write per-integral partial sums to terms.csv")
    conv = sub.add_parser("convergence", help="reference and quadrature convergence study")
    common(conv)
    conv.add_argument("--levels", type=int, default=3, help="number of refinement levels (>= 3)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.erratum_fixes:
            cfg = dataclasses.replace(cfg, erratum_fixes=True)
        if args.threads < 1:
            raise ConfigError("must be at least 1", field="threads")
        out = Path(args.output or cfg.output_dir)
        if args.command == "run":
            res = cmd_run(cfg, out, args.threads, args.dump_traces, args.diagnostics,
                          args.fixed_point_traces)
            print(f"linf={res['linf']:.3e} l2={res['l2']:.3e}; wrote {out}")
        else:
            cmd_convergence(cfg, out, args.levels, args.threads)
            print(f"wrote {out / 'convergence.csv'}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
