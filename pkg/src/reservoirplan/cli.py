"""Command-line front end: planning, evaluation, comparison, sweeps, LP debug.

Every output file embeds the run manifest (the inputs that determine the run),
so identical manifests yield bitwise-identical files; wall-clock duration is
recorded only in the separate manifest.json, keeping the data files
reproducible. Exit codes: 0 optimal, 1 usage/IO error, 2 infeasible,
3 unbounded, 4 iteration limit.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import formulation, lp, simulation
from .model import Plan, Scenario, ScenarioValidationError, validate_scenario
from .scenarios import (ScenarioParseError, expand_sweep, load_sweep_config,
                        resolve_scenario)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_UNBOUNDED = 3
EXIT_ITERATION_LIMIT = 4

_STATUS_EXIT = {
    lp.OPTIMAL: EXIT_OK,
    lp.INFEASIBLE: EXIT_INFEASIBLE,
    lp.UNBOUNDED: EXIT_UNBOUNDED,
    lp.ITERATION_LIMIT: EXIT_ITERATION_LIMIT,
}


@dataclasses.dataclass
class RunManifest:
    """Inputs that determine a run, recorded verbatim into every output."""

    command: str
    scenario: str
    method: str | None = None
    seed: int | None = None
    reps: int | None = None
    tolerance_overrides: dict = dataclasses.field(default_factory=dict)
    outputs: list[str] = dataclasses.field(default_factory=list)
    duration_s: float | None = None

    def embedded(self) -> dict:
        """Deterministic fields embedded into data files (duration excluded)."""
        fields = {
            "command": self.command,
            "scenario": self.scenario,
            "method": self.method,
            "seed": self.seed,
            "reps": self.reps,
        }
        for key, value in sorted(self.tolerance_overrides.items()):
            fields[key] = value
        fields["outputs"] = ";".join(self.outputs)
        return {k: v for k, v in fields.items() if v is not None}

    def write(self, out_dir: Path) -> None:
        record = dict(self.embedded())
        record["duration_s"] = self.duration_s
        path = out_dir / "manifest.json"
        path.write_text(json.dumps(record, indent=2) + "\n")


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, manifest: RunManifest, header: list[str],
               rows: list[list]) -> None:
    lines = [f"# {key}={value}" for key, value in manifest.embedded().items()]
    lines.append(",".join(header))
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, manifest: RunManifest, payload: dict) -> None:
    document = {"manifest": manifest.embedded(), **payload}
    path.write_text(json.dumps(document, indent=2) + "\n")


def _fail(message: str, manifest: RunManifest | None = None) -> int:
    if manifest is not None:
        print(f"manifest: {json.dumps(manifest.embedded())}", file=sys.stderr)
    print(f"error: {message}", file=sys.stderr)
    return EXIT_USAGE


def _load_scenario_arg(args, manifest: RunManifest) -> Scenario:
    scenario = resolve_scenario(args.scenario)
    if getattr(args, "big_f", None) is not None:
        manifest.tolerance_overrides["big_f"] = args.big_f
        scenario = dataclasses.replace(
            scenario,
            overflow_penalty={key: float(args.big_f)
                              for key in scenario.overflow_penalty})
    if getattr(args, "physical_sim", False):
        scenario = dataclasses.replace(scenario, physical_sim=True)
    report = validate_scenario(scenario)
    if not report.ok:
        raise ScenarioValidationError(report)
    return scenario


def _solve_method(scenario: Scenario, method: str):
    builder = (formulation.build_proposed if method == "proposed"
               else formulation.build_deterministic)
    problem, vm = builder(scenario)
    solution = lp.solve(problem)
    return problem, vm, solution


def _plan_payload(plan: Plan, scenario: Scenario) -> dict:
    transfers = []
    for t in scenario.periods():
        for link in scenario.sorted_links():
            transfers.append({
                "t": t, "from": link.source, "to": link.target,
                "q": float(plan.transfers[t - 1, link.source - 1,
                                          link.target - 1]),
            })
    releases = []
    for t in scenario.periods():
        for n in scenario.ids():
            releases.append({
                "t": t, "n": n,
                "g": float(plan.releases[t - 1, n - 1]),
                "x": float(plan.predicted_inflows[t - 1, n - 1]),
                "v": float(plan.volumes[t - 1, n - 1]),
            })
    return {
        "objective": plan.objective,
        "horizon": scenario.horizon,
        "reservoirs": scenario.num_reservoirs,
        "transfers": transfers,
        "releases": releases,
    }


def load_plan_json(path: str | Path) -> Plan:
    """Read a plan written by `plan`/`compare` back into arrays."""
    doc = json.loads(Path(path).read_text())
    t_count = int(doc["horizon"])
    n_count = int(doc["reservoirs"])
    transfers = np.zeros((t_count, n_count, n_count))
    for entry in doc["transfers"]:
        transfers[entry["t"] - 1, entry["from"] - 1, entry["to"] - 1] = entry["q"]
    releases = np.zeros((t_count, n_count))
    predicted = np.zeros((t_count, n_count))
    volumes = np.zeros((t_count, n_count))
    for entry in doc["releases"]:
        releases[entry["t"] - 1, entry["n"] - 1] = entry["g"]
        predicted[entry["t"] - 1, entry["n"] - 1] = entry["x"]
        volumes[entry["t"] - 1, entry["n"] - 1] = entry["v"]
    return Plan(transfers=transfers, releases=releases,
                predicted_inflows=predicted, volumes=volumes,
                objective=float(doc["objective"]))


def _write_plan_files(plan: Plan, scenario: Scenario, manifest: RunManifest,
                      out_dir: Path, prefix: str = "plan") -> None:
    releases_path = out_dir / f"{prefix}_releases.csv"
    transfers_path = out_dir / f"{prefix}_transfers.csv"
    json_path = out_dir / f"{prefix}.json"
    manifest.outputs = [str(releases_path), str(transfers_path), str(json_path)]

    release_rows = [[t, n,
                     float(plan.releases[t - 1, n - 1]),
                     float(plan.predicted_inflows[t - 1, n - 1]),
                     float(plan.volumes[t - 1, n - 1])]
                    for t in scenario.periods() for n in scenario.ids()]
    transfer_rows = [[t, link.source, link.target,
                      float(plan.transfers[t - 1, link.source - 1,
                                           link.target - 1])]
                     for t in scenario.periods()
                     for link in scenario.sorted_links()]
    _write_csv(releases_path, manifest, ["t", "n", "g", "x", "v"], release_rows)
    _write_csv(transfers_path, manifest, ["t", "from", "to", "q"], transfer_rows)
    _write_json(json_path, manifest, _plan_payload(plan, scenario))


def cmd_plan(args) -> int:
    started = time.perf_counter()
    manifest = RunManifest(command="plan", scenario=args.scenario,
                           method=args.method)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        scenario = _load_scenario_arg(args, manifest)
    except (ScenarioParseError, ScenarioValidationError) as exc:
        return _fail(str(exc), manifest)

    problem, vm, solution = _solve_method(scenario, args.method)
    if args.dump_lp:
        Path(args.dump_lp).write_text(lp.to_mps(problem))
    if not solution.is_optimal:
        print(f"manifest: {json.dumps(manifest.embedded())}", file=sys.stderr)
        print(f"error: solver returned {solution.status} "
              f"after {solution.iterations} iterations", file=sys.stderr)
        return _STATUS_EXIT[solution.status]

    plan = formulation.extract_plan(solution, vm, scenario)
    _write_plan_files(plan, scenario, manifest, out_dir)
    manifest.duration_s = time.perf_counter() - started
    manifest.write(out_dir)
    print(f"status=optimal objective={plan.objective!r} "
          f"iterations={solution.iterations}")
    return EXIT_OK


def _report_rows(report: simulation.SimulationReport) -> list[list]:
    rows = [[rep,
             float(report.release_profit[rep]),
             float(report.transfer_cost[rep]),
             float(report.risk_cost[rep]),
             float(report.total_profit[rep])]
            for rep in range(report.replications)]
    rows.append(["mean",
                 float(report.release_profit.mean()),
                 float(report.transfer_cost.mean()),
                 report.mean_risk, report.mean_total])
    rows.append(["std",
                 simulation._sample_std(report.release_profit),
                 simulation._sample_std(report.transfer_cost),
                 report.std_risk, report.std_total])
    return rows


def _report_payload(report: simulation.SimulationReport) -> dict:
    return {
        "replications": report.replications,
        "per_replication": [
            {"rep": rep,
             "release": float(report.release_profit[rep]),
             "transfer": float(report.transfer_cost[rep]),
             "risk": float(report.risk_cost[rep]),
             "total": float(report.total_profit[rep])}
            for rep in range(report.replications)
        ],
        "aggregates": {
            "mean_total": report.mean_total,
            "std_total": report.std_total,
            "mean_risk": report.mean_risk,
            "std_risk": report.std_risk,
        },
    }


def cmd_evaluate(args) -> int:
    started = time.perf_counter()
    manifest = RunManifest(command="evaluate", scenario=args.scenario,
                           seed=args.seed, reps=args.reps)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        scenario = _load_scenario_arg(args, manifest)
        plan = load_plan_json(args.plan)
        plan.check_dimensions(scenario)
    except (ScenarioParseError, ScenarioValidationError, ValueError,
            OSError, KeyError) as exc:
        return _fail(f"{exc}", manifest)

    report = simulation.run_monte_carlo(plan, scenario, reps=args.reps,
                                        seed=args.seed)
    if args.format == "json":
        path = out_dir / "evaluation.json"
        manifest.outputs = [str(path)]
        _write_json(path, manifest, _report_payload(report))
    else:
        path = out_dir / "evaluation.csv"
        manifest.outputs = [str(path)]
        _write_csv(path, manifest, ["rep", "release", "transfer", "risk", "total"],
                   _report_rows(report))
    manifest.duration_s = time.perf_counter() - started
    manifest.write(out_dir)
    print(f"mean_total={report.mean_total!r} std_total={report.std_total!r} "
          f"mean_risk={report.mean_risk!r}")
    return EXIT_OK


def compare_methods(scenario: Scenario, reps: int, seed: int):
    """Plan both methods and evaluate them on the same sampled inflows.

    Returns (proposed_report, deterministic_report, plans) or raises
    RuntimeError carrying the failing solver status.
    """
    reports = {}
    plans = {}
    for method in ("proposed", "deterministic"):
        _, vm, solution = _solve_method(scenario, method)
        if not solution.is_optimal:
            raise _SolveFailure(method, solution.status, solution.iterations)
        plan = formulation.extract_plan(solution, vm, scenario)
        plans[method] = plan
        reports[method] = simulation.run_monte_carlo(plan, scenario, reps=reps,
                                                     seed=seed)
    return reports["proposed"], reports["deterministic"], plans


class _SolveFailure(Exception):
    def __init__(self, method: str, status: str, iterations: int):
        super().__init__(f"{method} solve returned {status}")
        self.status = status


def cmd_compare(args) -> int:
    started = time.perf_counter()
    manifest = RunManifest(command="compare", scenario=args.scenario,
                           seed=args.seed, reps=args.reps)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        scenario = _load_scenario_arg(args, manifest)
    except (ScenarioParseError, ScenarioValidationError) as exc:
        return _fail(str(exc), manifest)

    try:
        proposed, deterministic, plans = compare_methods(
            scenario, args.reps, args.seed)
    except _SolveFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _STATUS_EXIT[exc.status]

    diff = proposed.total_profit - deterministic.total_profit
    mean_diff = float(diff.mean())
    se_diff = (simulation._sample_std(diff) / np.sqrt(diff.size)
               if diff.size > 1 else 0.0)

    path = out_dir / "compare.csv"
    manifest.outputs = [str(path)]
    rows = [
        ["proposed", proposed.mean_total, proposed.std_total,
         proposed.mean_risk, proposed.std_risk],
        ["deterministic", deterministic.mean_total, deterministic.std_total,
         deterministic.mean_risk, deterministic.std_risk],
        # For the paired row, the std column holds the standard error of the
        # mean paired difference.
        ["paired_difference", mean_diff, float(se_diff), "", ""],
    ]
    _write_csv(path, manifest,
               ["label", "mean_total", "std_total", "mean_risk", "std_risk"],
               rows)
    for method, plan in plans.items():
        plan_manifest = dataclasses.replace(manifest, method=method)
        _write_plan_files(plan, scenario, plan_manifest, out_dir,
                          prefix=f"plan_{method}")
    manifest.duration_s = time.perf_counter() - started
    manifest.write(out_dir)
    print(f"proposed_mean={proposed.mean_total!r} "
          f"deterministic_mean={deterministic.mean_total!r} "
          f"paired_diff={mean_diff!r} se={float(se_diff)!r}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    started = time.perf_counter()
    try:
        config = load_sweep_config(args.config)
        variants = expand_sweep(config)
    except (ScenarioParseError, ScenarioValidationError, ValueError) as exc:
        return _fail(str(exc))
    manifest = RunManifest(command="sweep", scenario=config.scenario,
                           seed=config.seed, reps=config.reps,
                           tolerance_overrides={"parameter": config.parameter,
                                                "grid": list(config.grid)})
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    for value, scenario in zip(config.grid, variants):
        try:
            proposed, deterministic, _ = compare_methods(
                scenario, config.reps, config.seed)
        except _SolveFailure as exc:
            print(f"error: grid value {value:g}: {exc}", file=sys.stderr)
            return _STATUS_EXIT[exc.status]
        rows.append([float(value), "proposed",
                     proposed.mean_total, proposed.std_total])
        rows.append([float(value), "deterministic",
                     deterministic.mean_total, deterministic.std_total])

    path = out_dir / "sweep.csv"
    manifest.outputs = [str(path)]
    _write_csv(path, manifest, ["value", "method", "mean_total", "std_total"],
               rows)
    manifest.duration_s = time.perf_counter() - started
    manifest.write(out_dir)
    print(f"wrote {path} ({len(rows)} rows)")
    return EXIT_OK


def cmd_solve_lp(args) -> int:
    try:
        problem = lp.from_mps(Path(args.lp_file).read_text())
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    solution = lp.solve(problem)
    print(f"status={solution.status}")
    print(f"iterations={solution.iterations}")
    if solution.is_optimal:
        print(f"objective={solution.objective!r}")
        for name, value in zip(problem.variable_names, solution.values):
            if abs(value) > 1e-9:
                print(f"{name}={value!r}")
    return _STATUS_EXIT[solution.status]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reservoirplan",
        description="Risk-aware demand-supply planning for reservoir networks")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p, method=False, reps=True):
        p.add_argument("--scenario", required=True,
                       help="scenario file path or builtin:<name>")
        if method:
            p.add_argument("--method", choices=("proposed", "deterministic"),
                           default="proposed")
        if reps:
            p.add_argument("--reps", type=int, default=100,
                           help="Monte Carlo replications (default 100)")
            p.add_argument("--seed", type=int, default=0)
        p.add_argument("--big-f", type=float, default=None, dest="big_f",
                       help="override every overflow penalty constant")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--physical-sim", action="store_true", dest="physical_sim",
                       help="cap realized volumes at capacity and floor "
                            "realized releases at zero")

    p_plan = sub.add_parser("plan", help="compute a demand-supply plan")
    add_common(p_plan, method=True, reps=False)
    p_plan.add_argument("--dump-lp", default=None,
                        help="also dump the compiled LP in interchange text form")
    p_plan.set_defaults(func=cmd_plan)

    p_eval = sub.add_parser("evaluate", help="Monte Carlo evaluation of a plan")
    add_common(p_eval)
    p_eval.add_argument("--plan", required=True, help="plan JSON file")
    p_eval.set_defaults(func=cmd_evaluate)

    p_cmp = sub.add_parser("compare",
                           help="plan and evaluate both methods, paired seeds")
    add_common(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_sweep = sub.add_parser("sweep", help="run a sensitivity sweep")
    p_sweep.add_argument("--config", required=True, help="sweep config JSON")
    p_sweep.add_argument("--out", default=".")
    p_sweep.set_defaults(func=cmd_sweep)

    p_lp = sub.add_parser("solve-lp", help="solve an LP interchange dump")
    p_lp.add_argument("lp_file")
    p_lp.set_defaults(func=cmd_solve_lp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ScenarioParseError, ScenarioValidationError) as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
