import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import AUTOMATON, random_events, random_workspace

from dtstar.dyncost import EdgeCostTable
from dtstar.greedy import choose, greedy1, greedy2, greedy_options, greedy_plan
from dtstar.product import InfeasibleSpecError, build_reduced_graph, earliest_arrivals, shortest_cycle
from dtstar.scenario import load_scenario
from dtstar.simulator import run
from dtstar.solvers import verify_timed_plan
from dtstar.workspace import Blockages


def instance(seed):
    rng = random.Random(seed)
    while True:
        w = random_workspace(rng, 8)
        try:
            g = build_reduced_graph(w, AUTOMATON)
        except InfeasibleSpecError:
            continue
        ev = random_events(rng, w, 6, 30)
        now = rng.randint(0, 15)
        return g, EdgeCostTable(g, Blockages(ev, now), now), now


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_choices_are_optimal_over_all_finals(seed):
    g, costs, now = instance(seed)
    options, _ = greedy_options(g, g.root, now, costs)
    # recompute every option independently of greedy_options
    arr = earliest_arrivals(g, g.root, now, costs)
    ref = []
    for f in g.finals:
        if f in arr:
            cyc = shortest_cycle(g, f, arr[f][0], costs)
            if cyc is not None:
                ref.append((f, arr[f][0], cyc[-1][1] - arr[f][0]))
    assert sorted((o.final, o.arrival, o.cycle_cost) for o in options) == sorted(ref)
    c1 = choose(g, options, "greedy1")
    c2 = choose(g, options, "greedy2")
    assert c1.cycle_cost == min(r[2] for r in ref)
    assert c2.first_completion == min(r[1] + r[2] for r in ref)


@settings(max_examples=20)
@given(st.integers(0, 10**6), st.sampled_from(["greedy1", "greedy2"]))
def test_greedy_plans_verify(seed, mode):
    g, costs, now = instance(seed)
    plan = greedy_plan(g, g.root, now, costs, mode, now + 60)
    assert plan.start == now and plan.loop_start is not None
    assert plan.end >= now + 60 or shortest_cycle(g, plan.meta['choice'].final, plan.end, costs) is None
    assert verify_timed_plan(g, plan)
    pick = plan.meta["choice"]
    assert plan.at(pick.arrival) == pick.final


def test_choose_rejects_bad_input():
    g, costs, now = instance(1)
    with pytest.raises(InfeasibleSpecError):
        choose(g, [], "greedy1")
    options, _ = greedy_options(g, g.root, now, costs)
    with pytest.raises(ValueError):
        choose(g, options, "greedy3")


def test_wrappers():
    g, costs, now = instance(2)
    assert greedy1(g, g.root, now, costs, now + 30).states == greedy_plan(g, g.root, now, costs, "greedy1", now + 30).states
    assert greedy2(g, g.root, now, costs, now + 30).states == greedy_plan(g, g.root, now, costs, "greedy2", now + 30).states


def test_fig1_greedy_timelines():
    s = load_scenario("fig1")
    assert [c.time for c in run(s, "greedy1").completions] == [41, 49]
    assert [c.time for c in run(s, "greedy2").completions] == [31, 39, 47]
