"""Greedy baselines: cheapest current cycle (Greedy1) and earliest first
completion (Greedy2)."""

from __future__ import annotations

from dataclasses import dataclass

from .dyncost import EdgeCostTable
from .product import (
    InfeasibleSpecError,
    ProductNode,
    ReducedGraph,
    earliest_arrivals,
    path_to,
    shortest_cycle,
)
from .solvers import TimedPlan, expand_route


@dataclass(frozen=True)
class GreedyChoice:
    final: ProductNode
    arrival: int
    cycle_cost: int

    @property
    def first_completion(self) -> int:
        return self.arrival + self.cycle_cost


def greedy_options(
    g: ReducedGraph, pos: ProductNode, time_cur: int, costs: EdgeCostTable
) -> tuple[list[GreedyChoice], dict]:
    """For every reachable final: earliest arrival and the cycle cost when
    departing at that arrival."""
    arr = earliest_arrivals(g, pos, time_cur, costs)
    out = []
    for f in sorted(g.finals, key=g.node_id):
        if f not in arr:
            continue
        a = arr[f][0]
        cyc = shortest_cycle(g, f, a, costs)
        if cyc is None:
            continue
        out.append(GreedyChoice(f, a, cyc[-1][1] - a))
    return out, arr


def choose(g: ReducedGraph, options: list[GreedyChoice], mode: str) -> GreedyChoice:
    if not options:
        raise InfeasibleSpecError("no accepting cycle is reachable from the current state")
    if mode == "greedy1":
        return min(options, key=lambda o: (o.cycle_cost, g.node_id(o.final)))
    if mode == "greedy2":
        return min(options, key=lambda o: (o.first_completion, g.node_id(o.final)))
    raise ValueError(f"unknown greedy mode {mode!r}")


def greedy_plan(
    g: ReducedGraph,
    pos: ProductNode,
    time_cur: int,
    costs: EdgeCostTable,
    mode: str,
    until: int,
) -> TimedPlan:
    """Prefix to the chosen final, then its shortest cycle repeated (re-timed
    on every lap) until ``until``."""
    options, arr = greedy_options(g, pos, time_cur, costs)
    pick = choose(g, options, mode)
    states = expand_route(costs, path_to(arr, pick.final))
    t = pick.arrival
    loop_start = None
    while True:
        cyc = shortest_cycle(g, pick.final, t, costs)
        if cyc is None:
            break
        loop_start = t - time_cur
        states.extend(expand_route(costs, cyc)[1:])
        t = cyc[-1][1]
        if t >= until:
            break
    plan = TimedPlan(time_cur, states, loop_start)
    plan.meta["choice"] = pick
    return plan


def greedy1(g, pos, time_cur, costs, until):
    return greedy_plan(g, pos, time_cur, costs, "greedy1", until)


def greedy2(g, pos, time_cur, costs, until):
    return greedy_plan(g, pos, time_cur, costs, "greedy2", until)
