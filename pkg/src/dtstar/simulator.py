"""Receding-horizon execution loop with timed blockages and metrics."""

from __future__ import annotations

import csv
import io
import statistics
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .dyncost import EdgeCostTable
from .greedy import greedy_plan
from .product import (
    ProductNode,
    ReducedGraph,
    build_reduced_graph,
    expand_static,
    static_plan,
    update_graph,
)
from .scenario import Scenario
from .solvers import TimedPlan, plan_in_H, verify_timed_plan
from .workspace import Blockages, DynamicEvent


class PlanVerificationError(RuntimeError):
    pass


@dataclass
class ReplanRecord:
    trigger: str
    time: int
    charged: int
    wall_clock: float
    empty_attempts: int = 0


@dataclass(frozen=True)
class Completion:
    loc: ProductNode
    time: int
    length: int


@dataclass
class ExecutionLog:
    algorithm: str
    trace: list[ProductNode] = field(default_factory=list)  # trace[t] = state at tick t
    replans: list[ReplanRecord] = field(default_factory=list)
    events: list[DynamicEvent] = field(default_factory=list)
    completions: list[Completion] = field(default_factory=list)
    plans: list[TimedPlan] = field(default_factory=list)
    verified: int = 0
    evicted_ticks: list[int] = field(default_factory=list)

    def cycles_by(self, T: int) -> int:
        return sum(1 for c in self.completions if c.time <= T)

    def to_json(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "trace": [[s.cell[0], s.cell[1], s.q] for s in self.trace],
            "replans": [r.__dict__ for r in self.replans],
            "events": [
                {"cell": list(e.cell), "t_start": e.t_start, "t_end": e.t_end, "announced_at": e.announced_at}
                for e in self.events
            ],
            "completions": [
                {"cell": list(c.loc.cell), "q": c.loc.q, "time": c.time, "length": c.length}
                for c in self.completions
            ],
        }

    def to_csv(self) -> str:
        """One row per tick: position, event flags and completions."""
        announced: dict[int, int] = {}
        for e in self.events:
            announced[e.announced_at] = announced.get(e.announced_at, 0) + 1
        replan_at = {r.time for r in self.replans}
        done = {c.time for c in self.completions}
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["tick", "x", "y", "q", "events_announced", "replanned", "cycle_completed"])
        for t, s in enumerate(self.trace):
            wr.writerow([t, s.cell[0], s.cell[1], s.q, announced.get(t, 0), int(t in replan_at), int(t in done)])
        return buf.getvalue()


class Simulation:
    """Executes one scenario with one algorithm.

    Changes are observed when an event's announcement tick is reached.
    DT* also replans when its plan runs out; the greedy baselines also
    replan when a known blockage is released.  Each DT* planning episode
    charges ``time_comp`` seconds during which the robot stays put; greedy
    planning is free.
    """

    def __init__(
        self,
        scenario: Scenario,
        algorithm: Optional[str] = None,
        seed: Optional[int] = None,
        verify: bool = False,
        graph: Optional[ReducedGraph] = None,
    ):
        self.s = scenario
        self.algorithm = algorithm or scenario.algorithm
        self.ledger = scenario.ledger(seed)
        self.verify = verify
        self.g0 = graph if graph is not None else build_reduced_graph(scenario.workspace, scenario.automaton)
        self.log = ExecutionLog(self.algorithm, events=list(self.ledger))

    # -- planning ---------------------------------------------------------

    def _knowledge(self, now: int) -> Blockages:
        return Blockages(self.ledger, now)

    def _check(self, g: ReducedGraph, plan: TimedPlan) -> None:
        self.log.plans.append(plan)
        if self.verify:
            if not verify_timed_plan(g, plan):
                raise PlanVerificationError(f"plan at t={plan.start} rejected by the automaton")
            self.log.verified += 1

    def _initial_plan(self) -> TimedPlan:
        s = self.s
        g = self.g0
        if self.algorithm == "dtstar":
            sp = static_plan(g)
            # repeat the static cycle until the run ends
            states = expand_static(g, list(sp.prefix))
            cyc = expand_static(g, list(sp.suffix))
            loop_start = len(states) - 1
            while len(states) - 1 < s.total_time:
                loop_start = len(states) - 1
                states.extend(cyc[1:])
            plan = TimedPlan(0, states, loop_start)
        else:
            costs = EdgeCostTable(g, self._knowledge(0), 0)
            plan = greedy_plan(g, g.root, 0, costs, self.algorithm, s.total_time)
        self._check(g, plan)
        return plan

    def _replan(self, g: ReducedGraph, pos: ProductNode, now: int) -> TimedPlan:
        costs = EdgeCostTable(g, self._knowledge(now), now, self.s.H)
        if self.algorithm == "dtstar":
            return plan_in_H(g, pos, now, self.s.H, costs, self.s.objectives)
        return greedy_plan(g, pos, now, costs, self.algorithm, self.s.total_time)

    # -- execution --------------------------------------------------------

    def run(self) -> ExecutionLog:
        s = self.s
        total = s.total_time
        log = self.log
        g = self.g0
        pos = g.root
        t = 0
        log.trace.append(pos)
        announce_ticks = sorted({e.announced_at for e in self.ledger})
        last_final: Optional[ProductNode] = None
        last_final_t = 0

        plan = self._initial_plan()
        seen = -1  # announcements up to this tick have been observed
        handled = -1  # last tick at which a replan finished
        while t < total:
            trigger = None
            new = [a for a in announce_ticks if seen < a <= t]
            if new:
                trigger = "announce"
            elif self.algorithm != "dtstar" and t > handled and any(
                e.t_end == t and e.announced_at <= t for e in self.ledger
            ):
                trigger = "release"
            elif plan.end <= t:
                trigger = "exhausted"
            seen = max(seen, t)

            if trigger is not None:
                started = time.perf_counter()
                charge = s.time_comp if self.algorithm == "dtstar" else 0
                charged = 0
                attempts = 0
                g = update_graph(g, pos)
                while True:
                    for _ in range(charge):
                        if t >= total:
                            break
                        t += 1
                        charged += 1
                        log.trace.append(pos)
                    if t >= total:
                        new_plan = None
                        break
                    seen = max(seen, t)
                    new_plan = self._replan(g, pos, t)
                    if new_plan:
                        break
                    attempts += 1
                    if charge == 0:
                        t += 1
                        log.trace.append(pos)
                        seen = max(seen, t)
                log.replans.append(
                    ReplanRecord(trigger, t, charged, time.perf_counter() - started, attempts)
                )
                if new_plan is None:
                    break
                plan = new_plan
                handled = t
                self._check(g, plan)
                continue

            nxt = plan.at(t + 1)
            t += 1
            if nxt != pos:
                if nxt.cell != pos.cell and _blocked(self.ledger, nxt.cell, t):
                    log.evicted_ticks.append(t)
                pos = nxt
                if pos in g.finals:
                    if pos == last_final:
                        log.completions.append(Completion(pos, t, t - last_final_t))
                    last_final, last_final_t = pos, t
            log.trace.append(pos)
        return log


def _blocked(events: Iterable[DynamicEvent], cell, t: int) -> bool:
    """Entering ``cell`` at ``t`` conflicts with a blockage that began earlier."""
    return any(e.cell == cell and e.t_start < t < e.t_end for e in events)


def run(
    scenario: Scenario,
    algorithm: Optional[str] = None,
    seed: Optional[int] = None,
    verify: bool = False,
    graph: Optional[ReducedGraph] = None,
) -> ExecutionLog:
    return Simulation(scenario, algorithm, seed, verify, graph).run()


@dataclass(frozen=True)
class Report:
    cycles: int
    replans: int
    replan_wall_mean: float
    replan_wall_std: float


def metrics(log: ExecutionLog, T: int) -> Report:
    walls = [r.wall_clock for r in log.replans]
    return Report(
        log.cycles_by(T),
        len(log.replans),
        statistics.fmean(walls) if walls else 0.0,
        statistics.pstdev(walls) if len(walls) > 1 else 0.0,
    )


def aggregate(values: Iterable[float]) -> tuple[float, float]:
    vals = list(values)
    if not vals:
        return 0.0, 0.0
    return statistics.fmean(vals), statistics.pstdev(vals) if len(vals) > 1 else 0.0
