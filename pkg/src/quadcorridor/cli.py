"""Command-line front end: generate, solve, check, oracle, bench."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import fileio
from .assemble import assign_slots
from .generate import GeneratorSpec, generate, truncate
from .pipg import SolverConfig
from .trigger import ScenarioInfeasible, plan
from .verify import EnumerationTooLarge, OracleInfeasible, check_trajectory, exhaustive_optimum, ORACLE_CONFIG

EXIT_OK = 0
EXIT_IO = 1
EXIT_INFEASIBLE = 2
EXIT_CAP = 3


def _solver_config(args) -> SolverConfig:
    kwargs = dict(max_iter=args.max_iter, epsilon=args.epsilon, extrapolation=args.lam, seed=args.seed)
    if args.strict_paper:
        return SolverConfig.strict_paper(**kwargs)
    return SolverConfig(**kwargs)


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-iter", type=int, default=10_000, help="PIPG iteration limit")
    p.add_argument("--epsilon", type=float, default=1e-3, help="infeasibility statistic tolerance")
    p.add_argument("--lambda", dest="lam", type=float, default=1.9, help="extrapolation step")
    p.add_argument("--seed", type=int, default=0, help="seed for the solver's initial iterates")
    p.add_argument("--strict-paper", action="store_true", help="test feasibility only after the last iteration")
    p.add_argument("--resolution", type=int, default=1, help="bisection resolution in time steps")
    p.add_argument("--check-lower", action="store_true", help="also solve each corridor's lower bound before bisecting")


def solve_scenario(scenario, config: SolverConfig, resolution: int = 1, check_lower: bool = False):
    """Run bounds, validation and bisection; returns ``(report, sidecar dict)``."""
    t0 = time.perf_counter()
    report = plan(scenario, resolution, config, check_lower=check_lower)
    wall = time.perf_counter() - t0
    res = report.result
    sidecar = {
        "status": res.status.value,
        "cost": res.objective,
        "schedule": list(report.schedule.taus),
        "horizon": report.schedule.horizon,
        "bounds": {"lower": list(report.start_bounds.lower), "upper": list(report.start_bounds.upper)},
        "solves": report.solves,
        "validation_solves": report.validation_solves,
        "bisection_solves": report.per_corridor_solves,
        "lower_check_solves": sum(c is not None for c in report.lower_checks),
        "iterations": report.iterations,
        "final_iterations": res.iterations,
        "statistic": res.statistic,
        "primal_violation": res.primal_violation,
        "wall_time": wall,
    }
    return report, sidecar


def cmd_generate(args) -> int:
    out = Path(args.out)
    spec = GeneratorSpec(n_corridors=args.corridors, overlap=args.overlap, seed=args.seed)
    if args.count == 1 and out.suffix == ".json":
        fileio.save_scenario(generate(spec), out)
        print(out)
        return EXIT_OK
    for seed in range(args.seed, args.seed + args.count):
        path = out / f"scenario_{seed:04d}.json"
        fileio.save_scenario(generate(replace(spec, seed=seed)), path)
        print(path)
    return EXIT_OK


def cmd_solve(args) -> int:
    try:
        scenario = fileio.load_scenario(args.scenario)
    except (OSError, ValueError) as exc:
        print(f"error: cannot load scenario: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        report, sidecar = solve_scenario(scenario, _solver_config(args), args.resolution, args.check_lower)
    except ScenarioInfeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE

    traj = report.result.trajectory
    check = check_trajectory(scenario, traj, args.tol, report.schedule)
    if not check.passed:
        print(check.summary(), file=sys.stderr)
    out = Path(args.out)
    sidecar_path = Path(args.sidecar) if args.sidecar else out.with_name(out.stem + ".summary.json")
    try:
        fileio.save_trajectory(traj, out, scenario.params.dt, assign_slots(report.schedule) + 1)
        fileio.atomic_write(sidecar_path, json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    print(
        f"feasible: cost={sidecar['cost']:.6f} schedule={sidecar['schedule']} "
        f"solves={sidecar['solves']}+{sidecar['validation_solves']} time={sidecar['wall_time']:.3f}s"
    )
    return EXIT_OK


def cmd_check(args) -> int:
    try:
        scenario = fileio.load_scenario(args.scenario)
        traj, _ = fileio.load_trajectory(args.trajectory)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    report = check_trajectory(scenario, traj, args.tol)
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_INFEASIBLE


def cmd_oracle(args) -> int:
    try:
        scenario = fileio.load_scenario(args.scenario)
        solution = None
        if args.solution:
            with open(args.solution) as fh:
                solution = json.load(fh)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    t = args.t if args.t is not None else (solution or {}).get("horizon")
    if t is None:
        print("error: give --t or a --solution sidecar with a horizon", file=sys.stderr)
        return EXIT_IO
    config = replace(ORACLE_CONFIG, seed=args.seed)
    try:
        result = exhaustive_optimum(scenario, int(t), config, args.cap)
    except EnumerationTooLarge as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except OracleInfeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    schedule = result.schedule
    print(f"oracle cost: {result.cost:.6f}")
    print(f"assignments enumerated: {result.enumerated}")
    print(f"best assignment: {(result.assignment + 1).tolist()}")
    print(f"best schedule: {list(schedule.taus) if schedule else 'none (first corridor holds only the start)'}")
    if solution is not None:
        gap = (solution["cost"] - result.cost) / result.cost
        print(f"solution cost: {solution['cost']:.6f}")
        print(f"gap: {gap:.4%}")
    return EXIT_OK


def _bench_one(task):
    seed, n, spec, config, repetitions = task
    scenario = truncate(generate(replace(spec, seed=seed)), n)
    times = []
    try:
        for _ in range(repetitions):
            report, sidecar = solve_scenario(scenario, config)
            times.append(sidecar["wall_time"])
    except ScenarioInfeasible:
        return seed, n, None, None, None
    return seed, n, statistics.mean(times), sidecar["cost"], sidecar["horizon"]


def bench(spec: GeneratorSpec, count: int, config: SolverConfig, repetitions: int = 1, jobs: int = 1):
    """Solve ``count`` seeded scenarios for every corridor count ``1..n``.

    Returns ``(rows, per-scenario records)``; one row per corridor count.
    """
    tasks = [
        (seed, n, spec, config, repetitions)
        for n in range(1, spec.n_corridors + 1)
        for seed in range(spec.seed, spec.seed + count)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            records = list(pool.map(_bench_one, tasks))
    else:
        records = [_bench_one(task) for task in tasks]
    rows = []
    for n in range(1, spec.n_corridors + 1):
        ok = [r for r in records if r[1] == n and r[2] is not None]
        times = [r[2] for r in ok]
        costs = [r[3] for r in ok]
        per_step = [r[3] / r[4] for r in ok]
        rows.append(
            {
                "corridors": n,
                "scenarios": sum(1 for r in records if r[1] == n),
                "feasible": len(ok),
                "infeasible": sum(1 for r in records if r[1] == n and r[2] is None),
                "mean_time": statistics.mean(times) if ok else float("nan"),
                "median_time": statistics.median(times) if ok else float("nan"),
                "min_time": min(times) if ok else float("nan"),
                "max_time": max(times) if ok else float("nan"),
                "mean_cost": statistics.mean(costs) if ok else float("nan"),
                "min_cost": min(costs) if ok else float("nan"),
                "max_cost": max(costs) if ok else float("nan"),
                "mean_cost_per_step": statistics.mean(per_step) if ok else float("nan"),
            }
        )
    return rows, records


def bench_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (fileio.fmt(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def cmd_bench(args) -> int:
    spec = GeneratorSpec(n_corridors=args.corridors, overlap=args.overlap, seed=args.seed)
    config = _solver_config(argparse.Namespace(**{**vars(args), "seed": 0}))
    rows, _ = bench(spec, args.count, config, args.repetitions, args.jobs)
    text = bench_csv(rows)
    if args.out:
        fileio.atomic_write(args.out, text)
    sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quadcorridor",
        description="Quadrotor trajectories through cylindrical corridors via bisection over triggering times.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write seeded random corridor scenarios")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1, help="number of consecutive seeds")
    p.add_argument("--corridors", type=int, default=7)
    p.add_argument("--overlap", type=float, default=0.1, help="junction half-length extension (m)")
    p.add_argument("--out", required=True, help="file (*.json, count 1) or directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="bisect triggering times and solve a scenario")
    p.add_argument("scenario")
    p.add_argument("--out", required=True, help="trajectory CSV path")
    p.add_argument("--sidecar", help="summary JSON path (default: <out stem>.summary.json)")
    p.add_argument("--tol", type=float, default=1e-3, help="tolerance of the post-solve check")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", help="check a trajectory CSV against a scenario")
    p.add_argument("scenario")
    p.add_argument("trajectory")
    p.add_argument("--tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("oracle", help="exhaustive corridor-assignment optimum at a fixed horizon")
    p.add_argument("scenario")
    p.add_argument("--t", type=int, help="horizon in steps (default: from --solution)")
    p.add_argument("--solution", help="sidecar JSON written by solve, for the cost gap")
    p.add_argument("--cap", type=int, default=100_000, help="maximum number of assignments")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="time generate+solve over a seeded suite")
    p.add_argument("--count", type=int, default=100, help="scenarios per corridor count")
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--corridors", type=int, default=7)
    p.add_argument("--overlap", type=float, default=0.1)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="also write the CSV table here")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2, which is reserved for infeasible here
        return EXIT_OK if exc.code in (0, None) else EXIT_IO
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
