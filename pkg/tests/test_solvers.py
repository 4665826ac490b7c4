import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from instances import fig1_dag, random_dag
from oracles import best_by_enumeration, lex_key, root_to_leaf_paths

from dtstar.dyncost import EdgeCostTable
from dtstar.horizon import INF, assignment_for_path, gen_cons, is_chordless
from dtstar.product import build_reduced_graph, update_graph
from dtstar.scenario import load_scenario
from dtstar.solvers import (
    EMPTY,
    decode,
    enumerate_sequences,
    plan_in_H,
    solve_exact,
    verify_timed_plan,
)
from dtstar.workspace import Blockages


@settings(max_examples=40)
@given(st.integers(0, 10**6), st.sampled_from([(1,), (1, 2), (1, 3), (1, 2, 3)]))
def test_solver_matches_enumeration(seed, which):
    dag, g, costs = random_dag(seed)
    cs = gen_cons(dag)
    best, feasible = best_by_enumeration(cs, which)
    seq = solve_exact(dag, cs, which)
    got = seq.objective.as_tuple()
    assert lex_key(got, which) == lex_key(best, which)
    if seq:
        assert cs.satisfied(assignment_for_path(cs, list(seq.steps)))


@settings(max_examples=20)
@given(st.integers(0, 10**6))
def test_decoded_plans_verify(seed):
    dag, g, costs = random_dag(seed)
    seq = solve_exact(dag)
    plan = decode(dag, seq, costs)
    if not seq:
        assert not plan
        return
    assert verify_timed_plan(g, plan)
    # the plan ends on the last completion, at the time the objective says
    assert plan.end == seq.objective.T_total
    assert plan.states[-1] == plan.states[plan.loop_start]


def test_solver_tie_break_is_deterministic():
    dag = fig1_dag()
    a = solve_exact(dag)
    b = solve_exact(dag)
    assert a == b


def test_objective_one_is_mandatory():
    with pytest.raises(ValueError):
        solve_exact(fig1_dag(), which=(2, 3))


def test_empty_when_no_cycle_fits():
    dag = fig1_dag(H=4)
    assert solve_exact(dag) is EMPTY
    assert EMPTY.objective.as_tuple() == (0, INF, INF)


def test_enumerate_sequences_limit():
    dag = fig1_dag(H=60)
    with pytest.raises(OverflowError):
        enumerate_sequences(dag, limit=3)
    assert len(enumerate_sequences(dag)) == len(root_to_leaf_paths(dag))


def test_solution_is_chordless_root_to_leaf():
    dag = fig1_dag(H=50)
    seq = solve_exact(dag)
    steps = list(seq.steps)
    assert steps[0] == dag.root and not dag.succ[steps[-1]]
    assert is_chordless(dag, steps)


def test_plan_in_H_on_fig1_replan():
    s = load_scenario("fig1")
    g = build_reduced_graph(s.workspace, s.automaton)
    costs = EdgeCostTable(g, Blockages(s.events, 11), 11, 39)
    pos = g.root
    plan = plan_in_H(update_graph(g, pos), pos, 11, 39, costs)
    assert plan and plan.start == 11
    assert plan.objective.cy_count >= 1
    assert plan.end <= 50
    assert verify_timed_plan(g, plan)
