"""Command-line front end.

Exit status is 0 on success, 1 when a plan fails verification and 2 for
usage or scenario errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .buchi import AutomatonParseError, LassoPlan, MalformedPlanError, verify_plan
from .dyncost import EdgeCostTable, dy_cost
from .experiments import (
    AXES,
    SUMMARY_FIELDS,
    rows_to_csv,
    run_jobs,
    summarize,
    sweep_jobs,
)
from .horizon import expand, gen_cons
from .product import InfeasibleSpecError, build_reduced_graph
from .scenario import ALGORITHMS, Scenario, load_scenario
from .simulator import PlanVerificationError, Simulation, metrics
from .smtlib import emit_smtlib
from .workspace import Blockages, ScenarioError

METRIC_FIELDS = [
    "scenario",
    "algorithm",
    "seed",
    "total_time",
    "cycles",
    "replans",
    "replan_wall_mean",
    "replan_wall_std",
    "plans_verified",
]


class UsageError(ValueError):
    pass


def parse_seeds(text: str) -> list[int]:
    """``"5"`` means seeds 0..4; ``"3,7,9"`` is an explicit list."""
    try:
        if "," in text:
            seeds = [int(s) for s in text.split(",") if s.strip()]
        else:
            n = int(text)
            if n < 1:
                raise UsageError("seed count must be at least 1")
            seeds = list(range(n))
    except ValueError as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"bad --seeds value {text!r}") from None
    if not seeds:
        raise UsageError("no seeds given")
    return seeds


def parse_algos(text: str) -> list[str]:
    if text == "all":
        return list(ALGORITHMS)
    algos = [a.strip() for a in text.split(",") if a.strip()]
    for a in algos:
        if a not in ALGORITHMS:
            raise UsageError(f"unknown algorithm {a!r}; choose from {', '.join(ALGORITHMS)} or 'all'")
    return algos


def _scenario(args) -> Scenario:
    s = load_scenario(args.scenario)
    kw = {}
    if getattr(args, "horizon", None) is not None:
        kw["H"] = args.horizon
    if getattr(args, "time_comp", None) is not None:
        kw["time_comp"] = args.time_comp
    if getattr(args, "total_time", None) is not None:
        kw["total_time"] = args.total_time
    return s.with_(**kw) if kw else s


def _outdir(path: str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out}: {exc.strerror}") from None
    return out


def _write_csv(path: Path, fields: Sequence[str], rows: list[dict]) -> None:
    with path.open("w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=list(fields), lineterminator="\n")
        wr.writeheader()
        wr.writerows(rows)


def emit_initial_model(s: Scenario, path: Path) -> None:
    """SMT-LIB model of the first horizon problem from the start cell."""
    g = build_reduced_graph(s.workspace, s.automaton)
    costs = EdgeCostTable(g, Blockages(s.ledger(), 0), 0, s.H)
    dag = expand(g, g.root, 0, s.H, costs)
    path.write_text(emit_smtlib(gen_cons(dag), s.objectives))


# ---------------------------------------------------------------------------
# subcommands


def cmd_run(args) -> int:
    s = _scenario(args)
    algos = parse_algos(args.algo)
    seeds = parse_seeds(args.seeds)
    out = _outdir(args.out)
    if args.emit_smt:
        emit_initial_model(s, Path(args.emit_smt))
    g = build_reduced_graph(s.workspace, s.automaton)
    rows = []
    status = 0
    for a in algos:
        for seed in seeds:
            sim = Simulation(s, a, seed, verify=args.verify, graph=g)
            try:
                log = sim.run()
            except PlanVerificationError as exc:
                print(f"{a} seed {seed}: {exc}", file=sys.stderr)
                status = 1
                continue
            rep = metrics(log, s.total_time)
            stem = f"{a}_seed{seed}"
            (out / f"{stem}.json").write_text(json.dumps(log.to_json(), indent=1))
            (out / f"{stem}.csv").write_text(log.to_csv())
            rows.append(
                {
                    "scenario": s.name,
                    "algorithm": a,
                    "seed": seed,
                    "total_time": s.total_time,
                    "cycles": rep.cycles,
                    "replans": rep.replans,
                    "replan_wall_mean": f"{rep.replan_wall_mean:.6f}",
                    "replan_wall_std": f"{rep.replan_wall_std:.6f}",
                    "plans_verified": log.verified,
                }
            )
            print(f"{s.name} {a} seed={seed} cycles={rep.cycles} replans={rep.replans}")
    _write_csv(out / "metrics.csv", METRIC_FIELDS, rows)
    if len(seeds) > 1:
        summary = summarize([dict(r, axis="run", level=s.name) for r in rows])
        _write_csv(out / "summary.csv", SUMMARY_FIELDS, summary)
        for r in summary:
            print(f"mean {r['algorithm']}: {r['cycles_mean']} +- {r['cycles_std']} over {r['runs']} seeds")
    return status


def cmd_sweep(args) -> int:
    s = _scenario(args)
    if args.axis not in AXES:
        raise UsageError(f"unknown sweep axis {args.axis!r}; choose from {', '.join(AXES)}")
    seeds = parse_seeds(args.seeds)
    algos = parse_algos(args.algo)
    levels = None
    if args.levels:
        levels = [_parse_level(args.axis, v) for v in args.levels.split(";")]
    out = _outdir(args.out)
    jobs = sweep_jobs(s, args.axis, seeds, algos, levels)
    rows = run_jobs(jobs, args.workers)
    (out / f"sweep_{args.axis}.csv").write_text(rows_to_csv(rows))
    summary = summarize(rows)
    _write_csv(out / f"sweep_{args.axis}_summary.csv", SUMMARY_FIELDS, summary)
    for r in summary:
        print(f"{r['level']:>12} {r['algorithm']:>8} {r['cycles_mean']} +- {r['cycles_std']}")
    return 0


def _parse_level(axis: str, text: str):
    text = text.strip()
    if axis == "propositions":
        return text
    parts = [int(p) for p in text.split(",")]
    if axis in ("arrival", "duration"):
        if len(parts) != 2:
            raise UsageError(f"{axis} levels look like 'mean,std'")
        return tuple(parts)
    if axis == "objectives":
        return tuple(parts)
    return parts[0]


def cmd_verify(args) -> int:
    s = _scenario(args)
    if args.plan:
        try:
            doc = json.loads(Path(args.plan).read_text())
            plan = LassoPlan(tuple(tuple(c) for c in doc["cells"]), int(doc["loop_start"]))
        except (OSError, KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"cannot read plan {args.plan}: {exc}") from None
        try:
            ok = verify_plan(s.automaton, s.workspace, plan)
        except MalformedPlanError as exc:
            print(f"malformed plan: {exc}", file=sys.stderr)
            return 1
        print("accepted" if ok else "rejected")
        return 0 if ok else 1
    # no plan given: run and check every plan the planners emit
    g = build_reduced_graph(s.workspace, s.automaton)
    status = 0
    for a in parse_algos(args.algo):
        for seed in parse_seeds(args.seeds):
            try:
                log = Simulation(s, a, seed, verify=True, graph=g).run()
            except PlanVerificationError as exc:
                print(f"{a} seed={seed}: FAIL {exc}")
                status = 1
                continue
            print(f"{a} seed={seed}: {log.verified} plans accepted")
    return status


def cmd_dump_graph(args) -> int:
    s = _scenario(args)
    out = _outdir(args.out)
    g = build_reduced_graph(s.workspace, s.automaton)
    (out / "graph.json").write_text(json.dumps(g.to_json(), indent=1))
    print(f"{len(g.nodes)} nodes, {len(g.edges)} edges, {len(g.finals)} final")
    if args.horizon is not None:
        table = dy_cost(g, 0, s.H, Blockages(s.ledger(), 0))
        (out / "costs.csv").write_text(table.to_csv())
    if args.emit_smt:
        emit_initial_model(s, Path(args.emit_smt))
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dtstar", description="Receding-horizon LTL planning on grids.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_default: str):
        sp.add_argument("--scenario", required=True, help="scenario JSON path or bundled name (fig1, w3, ...)")
        sp.add_argument("--horizon", type=int, help="override the horizon H")
        sp.add_argument("--time-comp", type=int, help="override the per-replan charge")
        sp.add_argument("--total-time", type=int, help="override the run length")
        sp.add_argument("--out", default=out_default, help="output directory")

    r = sub.add_parser("run", help="simulate algorithms on a scenario")
    common(r, "out")
    r.add_argument("--algo", default="all", help="comma list of dtstar, greedy1, greedy2, or 'all'")
    r.add_argument("--seeds", default="1", help="seed count N (0..N-1) or comma list")
    r.add_argument("--emit-smt", help="write the first horizon model as SMT-LIB here")
    r.add_argument("--verify", action="store_true", help="check every plan against the automaton")
    r.set_defaults(func=cmd_run)

    sw = sub.add_parser("sweep", help="vary one parameter over many seeds")
    common(sw, "out")
    sw.add_argument("--axis", required=True, help=f"one of {', '.join(AXES)}")
    sw.add_argument("--levels", help="';'-separated levels, e.g. '30,10;70,20' (defaults per axis)")
    sw.add_argument("--algo", default="all")
    sw.add_argument("--seeds", default="50")
    sw.add_argument("--workers", type=int, default=None, help="worker processes (default: CPU count)")
    sw.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="check a lasso plan, or every plan of a run")
    common(v, "out")
    v.add_argument("--plan", help="JSON {cells: [[x, y], ...], loop_start: k}")
    v.add_argument("--algo", default="all")
    v.add_argument("--seeds", default="1")
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("dump-graph", help="write the reduced graph and optional cost table")
    common(d, "out")
    d.add_argument("--emit-smt", help="write the first horizon model as SMT-LIB here")
    d.set_defaults(func=cmd_dump_graph)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, AutomatonParseError, UsageError, InfeasibleSpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
