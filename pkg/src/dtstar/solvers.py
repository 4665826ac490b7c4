"""Exact lexicographic solver for the horizon model and plan decoding."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .buchi import LassoPlan, verify_plan
from .dyncost import EdgeCostTable
from .horizon import (
    INF,
    ConstraintSet,
    DecisionDag,
    DecisionNode,
    Objectives,
    expand,
    gen_cons,
)
from .product import ProductNode, ReducedGraph

ALL_OBJECTIVES = (1, 2, 3)


@dataclass(frozen=True)
class DecisionSequence:
    steps: tuple[DecisionNode, ...]
    objective: Objectives

    def __bool__(self) -> bool:
        return bool(self.steps)


EMPTY = DecisionSequence((), Objectives(0, INF, INF))


def _score(obj: tuple[int, int, int], which: Sequence[int]) -> tuple[int, int, int]:
    """Minimization key under the enabled objectives."""
    count, last_len, total = obj
    return (
        -count,
        last_len if 2 in which else 0,
        total if 3 in which else 0,
    )


def solve_exact(
    dag: DecisionDag,
    constraints: Optional[ConstraintSet] = None,
    which: Sequence[int] = ALL_OBJECTIVES,
) -> DecisionSequence:
    """Lexicographically optimal decision sequence, or ``EMPTY``.

    Feasible sequences are the root-to-leaf paths without chords (an edge
    between two non-consecutive members would violate continuity).  The
    best continuation from a node depends only on the node and on the
    successors of earlier members that still lie in the future, so it is
    memoized on that pair.  Ties go to the lexicographically smallest
    (node id, time) sequence.
    """
    if 1 not in which:
        raise ValueError("the cycle-count objective is mandatory")
    succ = dag.succ

    # upper bound on cycles still completable from each node (chords ignored)
    ub: dict[DecisionNode, int] = {}
    for n in sorted(dag.nodes, key=lambda n: -n.t):
        ub[n] = max((ub[m] + dag.is_cycle(n, m) for m in succ[n]), default=0)

    memo: dict = {}

    def best(n: DecisionNode, forbidden: frozenset) -> Optional[tuple]:
        """(objective, tail) of the best continuation after ``n``."""
        mk = (n, forbidden)
        if mk in memo:
            return memo[mk]
        if not succ[n]:
            res = ((0, INF, INF), ())
            memo[mk] = res
            return res
        res = None
        res_score = None
        banned = forbidden | frozenset(succ[n])
        for m in succ[n]:
            if m in forbidden:
                continue
            cyc = dag.is_cycle(n, m)
            if res is not None and ub[m] + cyc < res[0][0]:
                continue
            sub = best(m, frozenset(x for x in banned if x.t > m.t))
            if sub is None:
                continue
            (cnt, ll, tt), tail = sub
            if cnt == 0 and cyc:
                obj = (1, m.t - n.t, m.t)
            else:
                obj = (cnt + cyc, ll, tt)
            sc = _score(obj, which)
            # successors are visited in tie-break order, so strict < keeps the first
            if res is None or sc < res_score:
                res, res_score = (obj, (m,) + tail), sc
        memo[mk] = res
        return res

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * len(dag.nodes) + 1000))
    try:
        out = best(dag.root, frozenset())
    finally:
        sys.setrecursionlimit(limit)
    if out is None or out[0][0] == 0:
        return EMPTY
    obj, tail = out
    return DecisionSequence((dag.root,) + tail, Objectives(*obj))


def enumerate_sequences(dag: DecisionDag, limit: int = 10**5):
    """All root-to-leaf paths (brute force; used as an oracle)."""
    out = []
    stack = [(dag.root, (dag.root,))]
    while stack:
        n, path = stack.pop()
        if not dag.succ[n]:
            out.append(list(path))
            if len(out) > limit:
                raise OverflowError("too many decision sequences")
            continue
        for m in reversed(dag.succ[n]):
            stack.append((m, path + (m,)))
    return out


# ---------------------------------------------------------------------------
# timed plans


@dataclass
class TimedPlan:
    """Product states at ``start, start+1, ...``.

    ``loop_start`` indexes the state that opens the last complete cycle, so
    ``states[loop_start:]`` is a closed loop through an accepting node.
    """

    start: int
    states: list[ProductNode]
    loop_start: Optional[int] = None
    decisions: tuple = ()
    objective: Optional[Objectives] = None
    meta: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return len(self.states) > 1

    @property
    def end(self) -> int:
        return self.start + len(self.states) - 1

    def at(self, t: int) -> ProductNode:
        return self.states[t - self.start]

    def lasso(self) -> Optional[LassoPlan]:
        if self.loop_start is None:
            return None
        return LassoPlan(tuple(s.cell for s in self.states), self.loop_start)


def verify_timed_plan(g: ReducedGraph, plan: TimedPlan) -> bool:
    """Soundness check: the plan's lasso is accepted from its first state."""
    lasso = plan.lasso()
    if lasso is None:
        return False
    return verify_plan(g.automaton, g.workspace, lasso, start={plan.states[0].q})


def expand_route(costs: EdgeCostTable, route: Sequence[tuple[ProductNode, int]]) -> list[ProductNode]:
    """Timed product states along a G_r route ``[(node, departure), ...]``."""
    out = [route[0][0]]
    for (u, t), (v, t2) in zip(route, route[1:]):
        p = costs.path(u, v, t)
        if p is None or p.arrival != t2:
            raise AssertionError("route timing disagrees with the cost table")
        out.extend(p.states[1:])
    return out


def decode(dag: DecisionDag, seq: DecisionSequence, costs: EdgeCostTable) -> TimedPlan:
    """Expand a decision sequence into per-second product states.

    The plan stops at the last cycle completion; anything decided after it
    earns nothing and is replanned instead.
    """
    if not seq:
        return TimedPlan(dag.time_cur, [dag.root.loc])
    steps = list(seq.steps)
    last = max(i for i in range(1, len(steps)) if dag.is_cycle(steps[i - 1], steps[i]))
    steps = steps[: last + 1]
    states = [steps[0].loc]
    for u, v in zip(steps, steps[1:]):
        part = expand_route(costs, dag.routes[(u, v)])
        states.extend(part[1:])
    loop_start = steps[last - 1].t - dag.time_cur
    return TimedPlan(dag.time_cur, states, loop_start, tuple(steps), seq.objective)


def plan_in_H(
    g: ReducedGraph,
    pos: ProductNode,
    time_cur: int,
    H: int,
    costs: EdgeCostTable,
    which: Sequence[int] = ALL_OBJECTIVES,
) -> TimedPlan:
    """Expand the horizon, build the model, solve it and decode the plan.

    Returns an empty plan (falsy) when no cycle fits in the horizon.
    """
    dag = expand(g, pos, time_cur, H, costs)
    cons = gen_cons(dag)
    seq = solve_exact(dag, cons, which)
    plan = decode(dag, seq, costs)
    plan.meta["dag_nodes"] = len(dag.nodes)
    plan.meta["dag_edges"] = len(dag.edges)
    return plan
