"""Command-line front end: ``twowayaoi {analyze,optimize,simulate,sweep,grid}``.

Exit codes: 0 success, 1 usage or configuration error, 2 infeasible problem.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .fading import empirical_success_pair
from .model import (
    DomainError, PowerProfile, SuccessPair, SystemParams, asymptotic_success, weighted_sum_aoi,
)
from .optimizer import (
    InfeasibleError, aoi_from_objective, grid_axis, grid_objective, grid_search_oracle,
    theorem1_optimize,
)
from .scenario import PRESETS, ConfigError, Scenario, load_file, resolve
from .simulator import MIN_ROUNDS_FOR_CHECK, SlotSimConfig, interdeparture_consistency, run_simulation

OUTPUT_DIR_ENV = "TWOWAYAOI_OUTPUT_DIR"
INFEASIBLE_MARK = "infeasible"
EMPIRICAL_NOTE = ("empirical columns are Monte Carlo estimates of the exact success probability "
                  "with 95% normal-approximation half-widths; no closed-form exact curve is produced")

SWEEP_COLUMNS = [
    "p_a", "p_b", "p_r",
    "f_a_asym", "f_b_asym", "weighted_aoi_asym",
    "f_a_emp", "ci_a_emp", "f_b_emp", "ci_b_emp", "weighted_aoi_emp",
    "weighted_aoi_sim",
]
GRID_COLUMNS = ["kind", "p_a", "p_b", "f_a", "f_b", "weighted_aoi"]
OPTIMIZE_COLUMNS = [
    "kind", "provenance", "p_a", "p_b", "p_r", "objective", "weighted_aoi", "selected",
    "second_derivative", "interval_lower", "interval_upper",
    "gap_p_a", "gap_p_b", "gap_objective",
]


@dataclass
class Report:
    """Rows for CSV plus the structured record written as JSON."""

    columns: list[str]
    rows: list[dict]
    record: Any
    comments: list[str] = field(default_factory=list)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            return INFEASIBLE_MARK
        return f"{float(value):.9g}"
    return str(value)


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(f"{float(value):.9g}") if math.isfinite(value) else None
    return value


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_jsonable(report.record), indent=2) + "\n"
    buf = io.StringIO()
    for line in report.comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(report.columns)
    for row in report.rows:
        writer.writerow([_fmt(row.get(c)) for c in report.columns])
    return buf.getvalue()


def point_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(1)[0])


def _aoi_or_none(params: SystemParams, pair: SuccessPair):
    # F = 1 is a legitimate AoI input (gamma_th = 0) even though the
    # asymptotic validity flag is strict.
    ok = 0 < pair.f_a <= 1 and 0 < pair.f_b <= 1
    return weighted_sum_aoi(params, pair) if ok else None


def _mark(summary, attr):
    return getattr(summary, attr) if summary is not None else math.inf


def cmd_analyze(sc: Scenario) -> Report:
    params, powers = sc.params, sc.powers
    asym = asymptotic_success(params, powers)
    emp = empirical_success_pair(params, powers, sc.sim.n_samples, sc.sim.seed, sc.workers)
    aoi_asym = _aoi_or_none(params, asym)
    aoi_emp = _aoi_or_none(params, emp)
    row = {
        "p_a": powers.p_a, "p_b": powers.p_b, "p_r": powers.p_r, "gamma_th": params.gamma_th,
        "f_a_asym": asym.f_a, "f_b_asym": asym.f_b, "asym_valid": asym.valid,
        "aoi_a_asym": _mark(aoi_asym, "aoi_a"), "aoi_b_asym": _mark(aoi_asym, "aoi_b"),
        "weighted_aoi_asym": _mark(aoi_asym, "weighted"),
        "f_a_emp": emp.f_a, "ci_a_emp": emp.ci_halfwidth_a,
        "f_b_emp": emp.f_b, "ci_b_emp": emp.ci_halfwidth_b,
        "aoi_a_emp": _mark(aoi_emp, "aoi_a"), "aoi_b_emp": _mark(aoi_emp, "aoi_b"),
        "weighted_aoi_emp": _mark(aoi_emp, "weighted"),
        "n_samples": sc.sim.n_samples, "seed": sc.sim.seed,
    }
    return Report(list(row), [row], row, [EMPIRICAL_NOTE])


def cmd_optimize(sc: Scenario) -> Report:
    params = sc.params
    result = theorem1_optimize(params, sc.min_success)
    certs = {c.solve_for: c.value for c in result.certificates}
    rows = []
    for i, (cand, direction) in enumerate(zip(result.candidates, ("B", "A"))):
        interval = result.intervals[direction]
        rows.append({
            "kind": f"candidate-solve-{direction}", "provenance": cand.provenance,
            "p_a": cand.p_a, "p_b": cand.p_b, "p_r": params.peak_r,
            "objective": cand.objective, "weighted_aoi": aoi_from_objective(cand.objective),
            "selected": i == result.selected, "second_derivative": certs.get(direction),
            "interval_lower": interval.lower, "interval_upper": interval.upper,
        })
    record = {
        "p_a_star": result.p_a_star, "p_b_star": result.p_b_star, "p_r_star": result.p_r_star,
        "aoi_star": result.aoi_star, "objective_star": result.objective_star,
        "tie_break": "on equal objective the candidate with P_A at its peak is selected",
        "candidates": rows,
        "min_success": sc.min_success,
    }
    if sc.oracle_step is not None:
        oracle = grid_search_oracle(params, sc.oracle_step, sc.min_success, sc.workers)
        gaps = {
            "gap_p_a": abs(oracle.p_a - result.p_a_star),
            "gap_p_b": abs(oracle.p_b - result.p_b_star),
            "gap_objective": oracle.objective - result.objective_star,
        }
        rows.append({
            "kind": "oracle", "provenance": f"grid step {sc.oracle_step:g}",
            "p_a": oracle.p_a, "p_b": oracle.p_b, "p_r": params.peak_r,
            "objective": oracle.objective, "weighted_aoi": aoi_from_objective(oracle.objective),
            **gaps,
        })
        record["oracle"] = {"step": sc.oracle_step, "p_a": oracle.p_a, "p_b": oracle.p_b,
                            "objective": oracle.objective, **gaps}
    comments = [
        f"optimum p_a={_fmt(result.p_a_star)} p_b={_fmt(result.p_b_star)} "
        f"p_r={_fmt(result.p_r_star)} weighted_aoi={_fmt(result.aoi_star)}",
        record["tie_break"],
    ]
    return Report(OPTIMIZE_COLUMNS, rows, record, comments)


def _consistency_rtol(n_slots: int) -> float:
    return 0.005 if n_slots >= PRESETS["full"]["n_slots"] else 0.03


def cmd_simulate(sc: Scenario) -> Report:
    params, powers = sc.params, sc.powers
    config = SlotSimConfig(params, powers, sc.sim.n_slots, sc.sim.seed)
    stats = run_simulation(config)
    asym = _aoi_or_none(params, asymptotic_success(params, powers))
    emp_pair = SuccessPair(stats.empirical_f_a, stats.empirical_f_b, kind="empirical")
    from_emp = _aoi_or_none(params, emp_pair)
    if stats.n_rounds >= MIN_ROUNDS_FOR_CHECK:
        consistent = interdeparture_consistency(stats, aoi_rtol=_consistency_rtol(sc.sim.n_slots)).passed
    else:
        consistent = None
    row = {
        "p_a": powers.p_a, "p_b": powers.p_b, "p_r": powers.p_r,
        "n_slots": sc.sim.n_slots, "n_rounds": stats.n_rounds, "seed": sc.sim.seed,
        "mean_aoi_a": stats.mean_aoi_a, "mean_aoi_b": stats.mean_aoi_b,
        "weighted_aoi_sim": stats.weighted_aoi(params),
        "empirical_f_a": stats.empirical_f_a, "empirical_f_b": stats.empirical_f_b,
        "mean_interdep_a": stats.mean_interdep_a, "mean_interdep_b": stats.mean_interdep_b,
        "second_moment_interdep_a": stats.second_moment_interdep_a,
        "second_moment_interdep_b": stats.second_moment_interdep_b,
        "weighted_aoi_from_empirical_f": _mark(from_emp, "weighted"),
        "weighted_aoi_asym": _mark(asym, "weighted"),
        "renewal_consistent": consistent,
    }
    return Report(list(row), [row], row)


def _sweep_point(sc: Scenario, index: int, p_var: float) -> dict:
    params, sw = sc.params, sc.sweep
    p_a, p_b = (sw.fixed, p_var) if sw.vary == "B" else (p_var, sw.fixed)
    powers = PowerProfile(p_a, p_b, params.peak_r)
    seed = point_seed(sc.sim.seed, index)
    asym = asymptotic_success(params, powers)
    aoi_asym = _aoi_or_none(params, asym)
    emp = empirical_success_pair(params, powers, sc.sim.n_samples, seed)
    aoi_emp = _aoi_or_none(params, emp)
    stats = run_simulation(SlotSimConfig(params, powers, sc.sim.n_slots, seed))
    return {
        "p_a": p_a, "p_b": p_b, "p_r": params.peak_r,
        "f_a_asym": asym.f_a if 0 < asym.f_a <= 1 else math.inf,
        "f_b_asym": asym.f_b if 0 < asym.f_b <= 1 else math.inf,
        "weighted_aoi_asym": _mark(aoi_asym, "weighted"),
        "f_a_emp": emp.f_a, "ci_a_emp": emp.ci_halfwidth_a,
        "f_b_emp": emp.f_b, "ci_b_emp": emp.ci_halfwidth_b,
        "weighted_aoi_emp": _mark(aoi_emp, "weighted"),
        "weighted_aoi_sim": stats.weighted_aoi(params),
    }


def cmd_sweep(sc: Scenario) -> Report:
    points = sc.sweep.points()
    jobs = list(enumerate(points))
    if sc.workers > 1:
        with ThreadPoolExecutor(max_workers=sc.workers) as pool:
            rows = list(pool.map(lambda j: _sweep_point(sc, *j), jobs))
    else:
        rows = [_sweep_point(sc, *j) for j in jobs]
    key = "p_b" if sc.sweep.vary == "B" else "p_a"
    rows.sort(key=lambda r: r[key])
    comments = [
        EMPIRICAL_NOTE,
        "asymptotic columns read 'infeasible' where the high-SNR probability leaves (0, 1)",
    ]
    return Report(SWEEP_COLUMNS, rows, rows, comments)


def cmd_grid(sc: Scenario) -> Report:
    params, step = sc.params, sc.grid.step
    axis_a = grid_axis(step, params.peak_a)
    axis_b = grid_axis(step, params.peak_b)
    values = grid_objective(params, axis_a, axis_b, sc.min_success)
    rows = []
    for i, j in zip(*np.nonzero(np.isfinite(values))):
        p_a, p_b = float(axis_a[i]), float(axis_b[j])
        f = asymptotic_success(params, PowerProfile(p_a, p_b, params.peak_r))
        rows.append({"kind": "point", "p_a": p_a, "p_b": p_b, "f_a": f.f_a, "f_b": f.f_b,
                     "weighted_aoi": aoi_from_objective(float(values[i, j]))})
    try:
        best = grid_search_oracle(params, step, sc.min_success)
        f = asymptotic_success(params, PowerProfile(best.p_a, best.p_b, params.peak_r))
        argmin = {"kind": "argmin", "p_a": best.p_a, "p_b": best.p_b, "f_a": f.f_a, "f_b": f.f_b,
                  "weighted_aoi": aoi_from_objective(best.objective)}
    except InfeasibleError:
        argmin = {"kind": "argmin", "weighted_aoi": math.inf}
    comments = [f"asymptotic weighted AoI, relay at peak, success probabilities in "
                f"({sc.min_success:g}, 1); last row is the grid argmin"]
    return Report(GRID_COLUMNS, rows + [argmin], {"points": rows, "argmin": argmin}, comments)


COMMAND_FUNCS = {
    "analyze": cmd_analyze,
    "optimize": cmd_optimize,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "grid": cmd_grid,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("scenario")
    g.add_argument("--config", metavar="PATH", help="JSON scenario file")
    g.add_argument("--preset", choices=sorted(PRESETS), help="named simulation-size preset")
    g.add_argument("--seed", type=int)
    g.add_argument("--slots", type=int, help="simulated slots (even)")
    g.add_argument("--samples", type=int, help="Monte Carlo channel draws")
    g.add_argument("--workers", type=int)
    g.add_argument("--out", metavar="PATH")
    g.add_argument("--format", choices=("csv", "json"))
    g.add_argument("--print-config", action="store_true", help="echo the resolved scenario to stderr")
    p = common.add_argument_group("system parameters")
    p.add_argument("--gamma-th-db", type=float)
    p.add_argument("--gamma-th", type=float, help="linear SNR threshold")
    for name in ("sigma2-a", "sigma2-b", "sigma2-r", "weight-a", "peak-a", "peak-b", "peak-r"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--min-success", type=float, help="lower bound on both success probabilities")

    powers = argparse.ArgumentParser(add_help=False)
    for name in ("p-a", "p-b", "p-r"):
        powers.add_argument(f"--{name}", type=float)

    parser = _Parser(prog="twowayaoi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("analyze", parents=[common, powers], help="asymptotic vs empirical AoI at one point")
    opt = sub.add_parser("optimize", parents=[common], help="optimal power allocation")
    opt.add_argument("--oracle", type=float, metavar="STEP", help="cross-check on a brute-force grid")
    sub.add_parser("simulate", parents=[common, powers], help="slot-level AoI simulation")
    sw = sub.add_parser("sweep", parents=[common], help="1-D power sweep")
    sw.add_argument("--vary", choices=("A", "B"))
    sw.add_argument("--fixed-power", type=float)
    sw.add_argument("--start", type=float)
    sw.add_argument("--stop", type=float)
    sw.add_argument("--step", type=float)
    gr = sub.add_parser("grid", parents=[common], help="2-D asymptotic AoI surface")
    gr.add_argument("--grid-step", type=float)
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    def pick(mapping):
        return {k: getattr(args, attr) for k, attr in mapping.items()
                if getattr(args, attr, None) is not None}

    out: dict = {}
    params = pick({
        "gamma_th_db": "gamma_th_db", "gamma_th": "gamma_th",
        "sigma2_a": "sigma2_a", "sigma2_b": "sigma2_b", "sigma2_r": "sigma2_r",
        "weight_a": "weight_a", "peak_a": "peak_a", "peak_b": "peak_b", "peak_r": "peak_r",
    })
    if params:
        out["params"] = params
    powers = pick({"p_a": "p_a", "p_b": "p_b", "p_r": "p_r"})
    if powers:
        out["powers"] = powers
    sweep = pick({"vary": "vary", "fixed": "fixed_power", "start": "start", "stop": "stop", "step": "step"})
    if sweep:
        out["sweep"] = sweep
    if getattr(args, "grid_step", None) is not None:
        out["grid"] = {"step": args.grid_step}
    sim = pick({"n_slots": "slots", "n_samples": "samples", "seed": "seed"})
    if sim:
        out["simulation"] = sim
    output = pick({"path": "out", "format": "format"})
    if output:
        out["output"] = output
    out.update(pick({"min_success": "min_success", "workers": "workers", "oracle_step": "oracle"}))
    return out


def _destination(sc: Scenario, command: str) -> Optional[str]:
    if sc.out:
        return sc.out
    directory = os.environ.get(OUTPUT_DIR_ENV)
    if directory:
        return os.path.join(directory, f"{command}.{sc.format}")
    return None


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        file_data = load_file(args.config) if args.config else None
        sc = resolve(args.command, file_data, _overrides(args), preset=args.preset)
        if args.print_config:
            json.dump(_jsonable(sc.to_dict()), sys.stderr, indent=2)
            sys.stderr.write("\n")
        report = COMMAND_FUNCS[args.command](sc)
    except (ConfigError, DomainError) as exc:
        print(f"twowayaoi: error: {exc}", file=sys.stderr)
        return 1
    except InfeasibleError as exc:
        print(f"twowayaoi: infeasible: {exc}", file=sys.stderr)
        for name, interval in exc.intervals.items():
            print(f"  solve for P_{name}: feasible interval ({interval.lower:.9g}, "
                  f"{interval.upper:.9g})", file=sys.stderr)
        return 2

    text = render(report, sc.format)
    dest = _destination(sc, args.command)
    if dest is None:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader went away (e.g. piped into head); silence the flush at exit
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    else:
        directory = os.path.dirname(dest)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(dest, "w", newline="") as fh:
            fh.write(text)
        print(f"wrote {dest}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
