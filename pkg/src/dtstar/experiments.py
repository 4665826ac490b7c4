"""Seeded one-factor sweeps over the warehouse scenarios."""

from __future__ import annotations

import csv
import io
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

from .scenario import Scenario, load_scenario
from .simulator import metrics, run
from .workspace import ScenarioError, Workspace

AXES = ("propositions", "arrival", "duration", "max-blocked", "grid-size", "objectives")

# default levels per axis; each level is (label, scenario transform argument)
DEFAULT_LEVELS: dict[str, list] = {
    "propositions": ["w1", "w2", "w3"],
    "arrival": [(60, 12), (80, 16), (100, 20), (120, 24), (140, 28)],
    "duration": [(30, 10), (50, 15), (70, 20), (90, 25), (110, 30)],
    "max-blocked": [1, 2, 3, 4],
    "grid-size": [20, 30, 40, 50],
    "objectives": [(1,), (1, 2), (1, 2, 3)],
}

SWEEP_FIELDS = ["axis", "level", "algorithm", "seed", "cycles", "replans", "replan_wall_mean"]


def scale_workspace(w: Workspace, size: int, base: int = 20) -> Workspace:
    """Stretch a ``base``-sized grid to ``size`` x ``size``.

    Labeled cells and the start move proportionally; an obstacle column keeps
    its one-cell thickness so aisles widen with the grid.
    """
    if size < base:
        raise ScenarioError("grid can only be scaled up")

    def up(c):
        return (c[0] * size // base, c[1] * size // base)

    obstacles = set()
    for x in range(size):
        for y in range(size):
            src = (x * base // size, y * base // size)
            if src in w.obstacles and up(src)[0] == x:
                obstacles.add((x, y))
    labels = {up(c): ps for c, ps in w.labels.items()}
    obstacles -= set(labels) | {up(w.initial)}
    return Workspace(size, size, frozenset(obstacles), labels, up(w.initial), w.move_cost)


def variant(base: Scenario, axis: str, level) -> Scenario:
    """``base`` with one parameter set to ``level``."""
    gen = base.generator
    if axis == "propositions":
        s = load_scenario(level)
        return s.with_(total_time=base.total_time, generator=gen, H=base.H, time_comp=base.time_comp)
    if gen is None and axis in ("arrival", "duration", "max-blocked"):
        raise ScenarioError(f"axis {axis!r} needs a scenario with an event generator")
    if axis == "arrival":
        mu, sd = level
        return base.with_(generator=replace(gen, arrival_mean=mu, arrival_std=sd), H=int(mu))
    if axis == "duration":
        mu, sd = level
        return base.with_(generator=replace(gen, duration_mean=mu, duration_std=sd))
    if axis == "max-blocked":
        return base.with_(generator=replace(gen, max_cells=int(level)))
    if axis == "grid-size":
        return base.with_(workspace=scale_workspace(base.workspace, int(level)), events=())
    if axis == "objectives":
        return base.with_(objectives=tuple(level))
    raise ScenarioError(f"unknown sweep axis {axis!r}; choose from {', '.join(AXES)}")


def level_label(level) -> str:
    if isinstance(level, (tuple, list)):
        return "-".join(str(v) for v in level)
    return str(level)


@dataclass(frozen=True)
class Job:
    axis: str
    level: object
    algorithm: str
    seed: int
    scenario: Scenario


def _run_job(job: Job) -> dict:
    log = run(job.scenario, job.algorithm, seed=job.seed)
    rep = metrics(log, job.scenario.total_time)
    return {
        "axis": job.axis,
        "level": level_label(job.level),
        "algorithm": job.algorithm,
        "seed": job.seed,
        "cycles": rep.cycles,
        "replans": rep.replans,
        "replan_wall_mean": f"{rep.replan_wall_mean:.6f}",
    }


def sweep_jobs(
    base: Scenario,
    axis: str,
    seeds: Sequence[int],
    algorithms: Sequence[str],
    levels: Optional[Iterable] = None,
) -> list[Job]:
    if axis not in AXES:
        raise ScenarioError(f"unknown sweep axis {axis!r}; choose from {', '.join(AXES)}")
    levels = list(DEFAULT_LEVELS[axis] if levels is None else levels)
    if axis == "objectives":
        algorithms = ["dtstar"]
    jobs = []
    for level in levels:
        s = variant(base, axis, level)
        for a in algorithms:
            for seed in seeds:
                jobs.append(Job(axis, level, a, seed, s))
    return jobs


def run_jobs(jobs: list[Job], workers: Optional[int] = None) -> list[dict]:
    """Run jobs, in parallel when more than one worker is available.

    Rows come back in job order regardless of completion order.
    """
    workers = workers or os.cpu_count() or 1
    if workers <= 1 or len(jobs) <= 1:
        return [_run_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def rows_to_csv(rows: list[dict], fields: Sequence[str] = SWEEP_FIELDS) -> str:
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    wr.writeheader()
    for r in rows:
        wr.writerow(r)
    return buf.getvalue()


def summarize(rows: list[dict]) -> list[dict]:
    """Mean and population std of cycles per (level, algorithm)."""
    groups: dict[tuple[str, str, str], list[int]] = {}
    for r in rows:
        groups.setdefault((r["axis"], r["level"], r["algorithm"]), []).append(int(r["cycles"]))
    out = []
    for (axis, level, algo), vals in groups.items():
        out.append(
            {
                "axis": axis,
                "level": level,
                "algorithm": algo,
                "runs": len(vals),
                "cycles_mean": f"{statistics.fmean(vals):.4f}",
                "cycles_std": f"{statistics.pstdev(vals):.4f}",
            }
        )
    return out


SUMMARY_FIELDS = ["axis", "level", "algorithm", "runs", "cycles_mean", "cycles_std"]
