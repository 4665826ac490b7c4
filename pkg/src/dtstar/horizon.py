"""Decision DAG over a finite horizon and its boolean constraint model."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable

from .dyncost import EdgeCostTable
from .product import ProductNode, ReducedGraph, earliest_arrivals, path_to, shortest_cycle


@dataclass(frozen=True)
class DecisionNode:
    loc: ProductNode
    t: int


Route = tuple[tuple[ProductNode, int], ...]


@dataclass
class DecisionDag:
    root: DecisionNode
    time_cur: int
    H: int
    nodes: list[DecisionNode]
    prefix_edges: list[tuple[DecisionNode, DecisionNode]]
    cycle_edges: list[tuple[DecisionNode, DecisionNode]]
    routes: dict[tuple[DecisionNode, DecisionNode], Route]
    node_key: dict[DecisionNode, tuple[int, int]] = field(repr=False)
    succ: dict[DecisionNode, list[DecisionNode]] = field(init=False, repr=False)
    pred: dict[DecisionNode, list[DecisionNode]] = field(init=False, repr=False)
    cycle_set: set = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.succ = {n: [] for n in self.nodes}
        self.pred = {n: [] for n in self.nodes}
        for u, v in self.prefix_edges + self.cycle_edges:
            self.succ[u].append(v)
            self.pred[v].append(u)
        for n in self.nodes:
            self.succ[n].sort(key=self.key)
            self.pred[n].sort(key=self.key)
        self.cycle_set = set(self.cycle_edges)

    def key(self, n: DecisionNode) -> tuple[int, int]:
        """Tie-break order: node id, then time."""
        return self.node_key[n]

    @property
    def edges(self) -> list[tuple[DecisionNode, DecisionNode]]:
        return self.prefix_edges + self.cycle_edges

    def is_cycle(self, u: DecisionNode, v: DecisionNode) -> bool:
        return (u, v) in self.cycle_set

    def leaves(self) -> list[DecisionNode]:
        return [n for n in self.nodes if not self.succ[n]]


def expand(
    g: ReducedGraph,
    pos: ProductNode,
    time_cur: int,
    H: int,
    costs: EdgeCostTable,
) -> DecisionDag:
    """Breadth-first expansion of decisions from ``(pos, time_cur)``.

    From ``(l, t)`` the successors are every final node reachable by a
    time-dependent shortest prefix arriving by ``time_cur + H`` and, when
    ``l`` is final, ``l`` itself after its shortest cycle departing at ``t``.
    Nodes with equal ``(loc, t)`` are merged.
    """
    end = time_cur + H
    root = DecisionNode(pos, time_cur)
    seen = {root}
    order = [root]
    prefix_edges, cycle_edges, routes = [], [], {}
    queue = deque([root])
    finals = sorted(g.finals, key=g.node_id)
    while queue:
        n = queue.popleft()
        arr = earliest_arrivals(g, n.loc, n.t, costs, end)
        succs = []
        for f in finals:
            if f == n.loc or f not in arr:
                continue
            m = DecisionNode(f, arr[f][0])
            prefix_edges.append((n, m))
            routes[(n, m)] = tuple(path_to(arr, f))
            succs.append(m)
        if n.loc in g.finals:
            cyc = shortest_cycle(g, n.loc, n.t, costs, end)
            if cyc is not None:
                m = DecisionNode(n.loc, cyc[-1][1])
                cycle_edges.append((n, m))
                routes[(n, m)] = tuple(cyc)
                succs.append(m)
        for m in succs:
            if m not in seen:
                seen.add(m)
                order.append(m)
                queue.append(m)
    node_key = {n: (g.node_id(n.loc), n.t) for n in order}
    return DecisionDag(root, time_cur, H, order, prefix_edges, cycle_edges, routes, node_key)


# ---------------------------------------------------------------------------
# constraint model

Expr = tuple


def var(name: str) -> Expr:
    return ("var", name)


def neg(e: Expr) -> Expr:
    return ("not", e)


def conj(*es: Expr) -> Expr:
    return ("and", tuple(es))


def disj(*es: Expr) -> Expr:
    return ("or", tuple(es))


def implies(a: Expr, b: Expr) -> Expr:
    return ("=>", a, b)


def iff(a: Expr, b: Expr) -> Expr:
    return ("=", a, b)


TRUE: Expr = ("const", True)
FALSE: Expr = ("const", False)


def evaluate(e: Expr, assignment: dict[str, bool]) -> bool:
    op = e[0]
    if op == "var":
        return assignment[e[1]]
    if op == "const":
        return e[1]
    if op == "not":
        return not evaluate(e[1], assignment)
    if op == "and":
        return all(evaluate(x, assignment) for x in e[1])
    if op == "or":
        return any(evaluate(x, assignment) for x in e[1])
    if op == "=>":
        return (not evaluate(e[1], assignment)) or evaluate(e[2], assignment)
    if op == "=":
        return evaluate(e[1], assignment) == evaluate(e[2], assignment)
    raise ValueError(f"unknown operator {op!r}")


def expr_vars(e: Expr) -> set[str]:
    op = e[0]
    if op == "var":
        return {e[1]}
    if op == "const":
        return set()
    if op in ("and", "or"):
        return set().union(*(expr_vars(x) for x in e[1])) if e[1] else set()
    return set().union(*(expr_vars(x) for x in e[1:]))


def _loc_name(l: ProductNode) -> str:
    return f"{l.cell[0]}_{l.cell[1]}_{l.q}"


def x_name(n: DecisionNode) -> str:
    return f"X_{_loc_name(n.loc)}_{n.t}"


def c_name(u: DecisionNode, v: DecisionNode) -> str:
    return f"C_{_loc_name(u.loc)}_{v.t}_{v.t - u.t}"


def a_name(u: DecisionNode, v: DecisionNode) -> str:
    return f"A_{_loc_name(u.loc)}__{_loc_name(v.loc)}_{u.t}"


def b_name(ti: int, tj: int) -> str:
    return f"B_{ti}_{tj}"


FAMILIES = ("root", "movement", "branching", "cycle", "integrity", "continuity", "support")


@dataclass
class ConstraintSet:
    dag: DecisionDag
    variables: list[str]
    clauses: dict[str, list[Expr]]
    # cycle completion variables with (completion time, cycle length)
    completions: list[tuple[str, int, int]]

    def all_clauses(self) -> list[Expr]:
        return [c for fam in FAMILIES for c in self.clauses[fam]]

    def satisfied(self, assignment: dict[str, bool]) -> bool:
        return all(evaluate(c, assignment) for c in self.all_clauses())

    def counts(self) -> dict[str, int]:
        return {fam: len(cs) for fam, cs in self.clauses.items()}


def gen_cons(dag: DecisionDag) -> ConstraintSet:
    """Emit the root/movement/branching/cycle/integrity/continuity clauses.

    ``branching`` exclusion is conditioned on the parent being occupied, and the
    ``support`` family requires every occupied non-root node to have an
    occupied predecessor.
    """
    X = {n: var(x_name(n)) for n in dag.nodes}
    clauses: dict[str, list[Expr]] = {fam: [] for fam in FAMILIES}
    variables = [x_name(n) for n in dag.nodes]

    clauses["root"].append(iff(X[dag.root], TRUE))

    for n in dag.nodes:
        succ = dag.succ[n]
        if succ:
            clauses["movement"].append(implies(X[n], disj(*(X[m] for m in succ))))
        for a, b in combinations(succ, 2):
            clauses["branching"].append(implies(X[n], neg(conj(X[a], X[b]))))

    completions = []
    for u, v in dag.cycle_edges:
        name = c_name(u, v)
        variables.append(name)
        clauses["cycle"].append(iff(var(name), conj(X[u], X[v])))
        completions.append((name, v.t, v.t - u.t))

    by_time: dict[int, list[DecisionNode]] = {}
    for n in dag.nodes:
        by_time.setdefault(n.t, []).append(n)
    for t in sorted(by_time):
        for a, b in combinations(by_time[t], 2):
            clauses["integrity"].append(neg(conj(X[a], X[b])))

    b_defined = set()
    for u, v in dag.edges:
        an = a_name(u, v)
        bn = b_name(u.t, v.t)
        variables.append(an)
        clauses["continuity"].append(iff(var(an), conj(X[u], X[v])))
        if bn not in b_defined:
            b_defined.add(bn)
            variables.append(bn)
            inner = [X[k] for k in dag.nodes if u.t < k.t < v.t]
            clauses["continuity"].append(iff(var(bn), disj(*inner) if inner else FALSE))
        clauses["continuity"].append(neg(conj(var(an), var(bn))))

    for n in dag.nodes:
        if n != dag.root:
            clauses["support"].append(implies(X[n], disj(*(X[p] for p in dag.pred[n]))))

    return ConstraintSet(dag, variables, clauses, completions)


def assignment_for_path(cs: ConstraintSet, path: list[DecisionNode]) -> dict[str, bool]:
    """The unique assignment (X, C, A, B) induced by a decision sequence."""
    on = set(path)
    asg = {x_name(n): n in on for n in cs.dag.nodes}
    for u, v in cs.dag.cycle_edges:
        asg[c_name(u, v)] = u in on and v in on
    for u, v in cs.dag.edges:
        asg[a_name(u, v)] = u in on and v in on
        asg[b_name(u.t, v.t)] = any(u.t < n.t < v.t for n in on)
    return asg


INF = 10**9


@dataclass(frozen=True)
class Objectives:
    cy_count: int
    last_len: int
    T_total: int

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.cy_count, self.last_len, self.T_total)


def objectives(cs: ConstraintSet, assignment: dict[str, bool]) -> Objectives:
    """Evaluate the three objectives on an assignment.

    ``last_len``/``T_total`` walk completion variables by decreasing
    completion time; the sentinel ``INF`` stands for "no cycle".
    """
    count = sum(1 for name, _, _ in cs.completions if assignment[name])
    last_len, total = INF, INF
    for name, t, tau in sorted(cs.completions, key=lambda c: (-c[1], c[2])):
        if assignment[name]:
            last_len, total = tau, t
            break
    return Objectives(count, last_len, total)


def path_objectives(dag: DecisionDag, path: Iterable[DecisionNode]) -> Objectives:
    path = list(path)
    count, last_len, total = 0, INF, INF
    for u, v in zip(path, path[1:]):
        if dag.is_cycle(u, v):
            count += 1
            last_len, total = v.t - u.t, v.t
    return Objectives(count, last_len, total)


def is_chordless(dag: DecisionDag, path: list[DecisionNode]) -> bool:
    pos = {n: i for i, n in enumerate(path)}
    for i, n in enumerate(path):
        for m in dag.succ[n]:
            j = pos.get(m)
            if j is not None and j != i + 1:
                return False
    return True
