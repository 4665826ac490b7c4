"""Product of the grid and the automaton, and its reduced graph G_r.

Nodes of the reduced graph are the labeled (cell, state) pairs plus the
root(s); an edge summarizes a shortest product path whose interior cells
carry no label.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Optional

from .buchi import BuchiAutomaton, State
from .workspace import Cell, Workspace


class InfeasibleSpecError(RuntimeError):
    pass


class ProductNode(NamedTuple):
    cell: Cell
    q: State


def node_id(w: Workspace, b: BuchiAutomaton, n: ProductNode) -> int:
    """Row-major cell order, then automaton state order."""
    x, y = n.cell
    return (y * w.width + x) * len(b.states) + b.index(n.q)


def product_successors(w: Workspace, b: BuchiAutomaton, n: ProductNode) -> list[ProductNode]:
    """Successors of ``n`` in the (implicit) product graph; every edge costs 1."""
    out = []
    for _, c in w.neighbors(n.cell):
        for q in sorted(b.step(n.q, w.label_of(c)), key=b.index):
            out.append(ProductNode(c, q))
    return out


def _silent_bfs(
    w: Workspace, b: BuchiAutomaton, src: ProductNode, roots: frozenset
) -> tuple[dict[ProductNode, int], dict[ProductNode, tuple[ProductNode, ...]]]:
    """Label-silent BFS from ``src``: distances and witnesses to every node
    reachable through unlabeled interior cells."""
    parent: dict[ProductNode, Optional[ProductNode]] = {src: None}
    dist = {src: 0}
    hits: dict[ProductNode, int] = {}
    hit_parent: dict[ProductNode, ProductNode] = {}
    queue = deque([src])
    while queue:
        s = queue.popleft()
        d = dist[s]
        for nxt in product_successors(w, b, s):
            if w.label_of(nxt.cell) or nxt in roots:
                if nxt not in hits:
                    hits[nxt] = d + 1
                    hit_parent[nxt] = s
                if w.label_of(nxt.cell):
                    continue
            if nxt in dist:
                continue
            dist[nxt] = d + 1
            parent[nxt] = s
            queue.append(nxt)

    witnesses = {}
    for v, via in hit_parent.items():
        path = [v]
        cur: Optional[ProductNode] = via
        while cur is not None:
            path.append(cur)
            cur = parent[cur]
        witnesses[v] = tuple(reversed(path))
    return hits, witnesses


class SilentDistances:
    """Exact label-silent distance-to-go tables, one per destination node.

    Built by reverse BFS; used both as an A* heuristic and to finish searches
    once every blockage has expired.
    """

    def __init__(self, w: Workspace, b: BuchiAutomaton):
        self.w = w
        self.b = b
        self._tables: dict[ProductNode, dict[ProductNode, int]] = {}
        # reverse transition index: (q_after, label) -> states before
        self._pre: dict[tuple[State, frozenset], list[State]] = {}

    def _pred_states(self, q2: State, label: frozenset) -> list[State]:
        key = (q2, label)
        if key not in self._pre:
            self._pre[key] = [q for q in self.b.states if q2 in self.b.step(q, label)]
        return self._pre[key]

    def table(self, dst: ProductNode) -> dict[ProductNode, int]:
        tab = self._tables.get(dst)
        if tab is not None:
            return tab
        w = self.w
        tab = {dst: 0}
        queue = deque([dst])
        while queue:
            v = queue.popleft()
            # v is the arrival of a move: only dst or unlabeled cells qualify
            label = w.label_of(v.cell)
            if v != dst and label:
                continue
            for _, c in w.neighbors(v.cell):
                for q in self._pred_states(v.q, label):
                    u = ProductNode(c, q)
                    if u not in tab:
                        tab[u] = tab[v] + 1
                        queue.append(u)
        self._tables[dst] = tab
        return tab

    def distance(self, src: ProductNode, dst: ProductNode) -> Optional[int]:
        """Shortest label-silent path length ``src -> dst`` (``src`` excluded
        from the silence requirement); ``None`` if none exists."""
        if src == dst and not self.w.label_of(dst.cell):
            # a root returning to itself must actually move
            return self._self_return(dst)
        return self.table(dst).get(src)

    def _self_return(self, dst: ProductNode) -> Optional[int]:
        tab = self.table(dst)
        best = None
        for n in product_successors(self.w, self.b, dst):
            if self.w.label_of(n.cell) and n != dst:
                continue
            d = tab.get(n)
            if d is not None and (best is None or d + 1 < best):
                best = d + 1
        return best

    def next_step(self, cur: ProductNode, dst: ProductNode) -> ProductNode:
        """First product step of a shortest silent path from ``cur``."""
        tab = self.table(dst)
        d = tab[cur]
        for n in product_successors(self.w, self.b, cur):
            if n == dst and d == 1:
                return n
            if self.w.label_of(n.cell):
                continue
            if tab.get(n) == d - 1:
                return n
        raise AssertionError("distance table inconsistent")


@dataclass
class ReducedGraph:
    workspace: Workspace
    automaton: BuchiAutomaton
    roots: tuple[ProductNode, ...]
    nodes: tuple[ProductNode, ...]
    edges: dict[tuple[ProductNode, ProductNode], int]
    witness: dict[tuple[ProductNode, ProductNode], tuple[ProductNode, ...]]
    finals: frozenset[ProductNode]
    distances: SilentDistances = field(repr=False)
    succ: dict[ProductNode, list[ProductNode]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.succ = {n: [] for n in self.nodes}
        for u, v in self.edges:
            self.succ[u].append(v)
        for u in self.succ:
            self.succ[u].sort(key=self.node_id)

    @property
    def root(self) -> ProductNode:
        return self.roots[0]

    def node_id(self, n: ProductNode) -> int:
        return node_id(self.workspace, self.automaton, n)

    def is_final(self, n: ProductNode) -> bool:
        return n in self.finals

    def to_json(self) -> dict:
        order = sorted(self.edges, key=lambda e: (self.node_id(e[0]), self.node_id(e[1])))

        def enc(n: ProductNode) -> list:
            return [n.cell[0], n.cell[1], n.q]

        return {
            "roots": [enc(r) for r in self.roots],
            "nodes": [
                {"id": self.node_id(n), "cell": list(n.cell), "q": n.q, "final": n in self.finals}
                for n in self.nodes
            ],
            "edges": [
                {
                    "from": enc(u),
                    "to": enc(v),
                    "weight": self.edges[(u, v)],
                    "witness": [enc(n) for n in self.witness[(u, v)]],
                }
                for u, v in order
            ],
        }


def _closure(
    w: Workspace,
    b: BuchiAutomaton,
    seeds: Iterable[ProductNode],
    roots: frozenset,
    edges: dict,
    witness: dict,
    known: set,
) -> None:
    queue = deque(seeds)
    while queue:
        u = queue.popleft()
        hits, wit = _silent_bfs(w, b, u, roots)
        for v, d in hits.items():
            edges[(u, v)] = d
            witness[(u, v)] = wit[v]
            if v not in known:
                known.add(v)
                queue.append(v)


def _assemble(w, b, roots, edges, witness, known, distances) -> ReducedGraph:
    nodes = tuple(sorted(known, key=lambda n: node_id(w, b, n)))
    finals = frozenset(n for n in nodes if n.q in b.accepting)
    return ReducedGraph(w, b, tuple(roots), nodes, edges, witness, finals, distances)


def build_reduced_graph(w: Workspace, b: BuchiAutomaton, check: bool = True) -> ReducedGraph:
    """Reduced product graph rooted at the initial cell.

    Each initial automaton state gives one root.  With ``check`` the graph is
    required to contain a final node lying on a cycle.
    """
    roots = tuple(ProductNode(w.initial, q) for q in sorted(b.initial, key=b.index))
    edges: dict = {}
    witness: dict = {}
    known = set(roots)
    _closure(w, b, roots, frozenset(roots), edges, witness, known)
    g = _assemble(w, b, roots, edges, witness, known, SilentDistances(w, b))
    if check:
        if not g.finals:
            raise InfeasibleSpecError("no accepting product node is reachable")
        if all(shortest_cycle(g, f, 0, static_cost(g)) is None for f in g.finals):
            raise InfeasibleSpecError("no accepting product node lies on a cycle")
    return g


def update_graph(g: ReducedGraph, pos: ProductNode) -> ReducedGraph:
    """Re-root ``g`` at the robot's current product state.

    Labeled nodes and their edges are kept; unlabeled old roots are dropped
    and any node first reachable from ``pos`` is added.
    """
    w, b = g.workspace, g.automaton
    w.check_cell(pos.cell)
    roots = frozenset([pos])
    dropped = {r for r in g.roots if r != pos and not w.label_of(r.cell)}
    edges = {e: c for e, c in g.edges.items() if e[0] not in dropped and e[1] not in dropped}
    witness = {e: g.witness[e] for e in edges}
    known = (set(g.nodes) - dropped) | {pos}
    # outgoing root edges are recomputed from scratch
    for e in [e for e in edges if e[0] == pos]:
        del edges[e], witness[e]
    # an unlabeled root is an edge target too, so refresh edges into it
    if not w.label_of(pos.cell):
        for u in list(known):
            if u == pos:
                continue
            d = g.distances.distance(u, pos)
            if d is not None:
                hits, wit = _silent_bfs(w, b, u, roots)
                if pos in hits:
                    edges[(u, pos)] = hits[pos]
                    witness[(u, pos)] = wit[pos]
    before = set(known)
    _closure(w, b, [pos], roots, edges, witness, known)
    new_nodes = [n for n in known if n not in before]
    if new_nodes:
        _closure(w, b, new_nodes, roots, edges, witness, known)
    return _assemble(w, b, (pos,), edges, witness, known, g.distances)


# ---------------------------------------------------------------------------
# shortest paths over G_r with (possibly) time-dependent edge costs

CostFn = Callable[[ProductNode, ProductNode, int], Optional[int]]


def static_cost(g: ReducedGraph) -> CostFn:
    def cost(u: ProductNode, v: ProductNode, t: int) -> Optional[int]:
        return g.edges[(u, v)]

    return cost


def earliest_arrivals(
    g: ReducedGraph,
    src: ProductNode,
    t0: int,
    cost: CostFn,
    end: Optional[int] = None,
) -> dict[ProductNode, tuple[int, Optional[ProductNode]]]:
    """Time-dependent Dijkstra from ``src`` departing at ``t0``.

    Final nodes other than ``src`` are never used as interior nodes, so each
    path reaches at most one accepting node (its endpoint).  Returns
    ``node -> (arrival, predecessor)``.  FIFO edge costs make earliest arrival
    optimal for every prefix.
    """
    best: dict[ProductNode, tuple[int, Optional[ProductNode]]] = {src: (t0, None)}
    heap = [(t0, g.node_id(src), src)]
    done = set()
    while heap:
        t, _, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u != src and u in g.finals:
            continue
        for v in g.succ[u]:
            if v == src:
                continue
            c = cost(u, v, t)
            if c is None:
                continue
            a = t + c
            if end is not None and a > end:
                continue
            old = best.get(v)
            if old is None or a < old[0] or (a == old[0] and g.node_id(u) < g.node_id(old[1])):
                best[v] = (a, u)
                heapq.heappush(heap, (a, g.node_id(v), v))
    return best


def path_to(
    arrivals: dict[ProductNode, tuple[int, Optional[ProductNode]]], v: ProductNode
) -> list[tuple[ProductNode, int]]:
    """Node/departure-time sequence ending at ``v`` (inclusive)."""
    out = []
    cur: Optional[ProductNode] = v
    while cur is not None:
        t, pred = arrivals[cur]
        out.append((cur, t))
        cur = pred
    return out[::-1]


def shortest_cycle(
    g: ReducedGraph,
    l: ProductNode,
    t0: int,
    cost: CostFn,
    end: Optional[int] = None,
) -> Optional[list[tuple[ProductNode, int]]]:
    """Earliest return to ``l`` departing at ``t0`` without touching another
    final node.  Returns the timed node sequence ``[(l, t0), ..., (l, t1)]``."""
    best: dict[ProductNode, tuple[int, Optional[ProductNode]]] = {}
    back: Optional[tuple[int, ProductNode]] = None
    heap = []
    for v in g.succ[l]:
        c = cost(l, v, t0)
        if c is None or (end is not None and t0 + c > end):
            continue
        a = t0 + c
        if v == l:
            if back is None or a < back[0]:
                back = (a, l)
            continue
        if v not in best or a < best[v][0]:
            best[v] = (a, l)
            heapq.heappush(heap, (a, g.node_id(v), v))
    done = set()
    while heap:
        t, _, u = heapq.heappop(heap)
        if u in done:
            continue
        if back is not None and t >= back[0]:
            break
        done.add(u)
        if u in g.finals:
            continue
        for v in g.succ[u]:
            c = cost(u, v, t)
            if c is None:
                continue
            a = t + c
            if end is not None and a > end:
                continue
            if v == l:
                if back is None or a < back[0] or (a == back[0] and g.node_id(u) < g.node_id(back[1])):
                    back = (a, u)
                continue
            old = best.get(v)
            if old is None or a < old[0] or (a == old[0] and g.node_id(u) < g.node_id(old[1])):
                best[v] = (a, u)
                heapq.heappush(heap, (a, g.node_id(v), v))
    if back is None:
        return None
    arrival, pred = back
    tail = [(l, arrival)]
    cur: ProductNode = pred
    while cur != l:
        t, p = best[cur]
        tail.append((cur, t))
        cur = p
    tail.append((l, t0))
    return tail[::-1]


def expand_static(g: ReducedGraph, nodes: list[ProductNode]) -> list[ProductNode]:
    """Concatenate edge witnesses along a G_r node path."""
    out = [nodes[0]]
    for u, v in zip(nodes, nodes[1:]):
        out.extend(g.witness[(u, v)][1:])
    return out


@dataclass(frozen=True)
class StaticPlan:
    prefix: tuple[ProductNode, ...]
    suffix: tuple[ProductNode, ...]
    prefix_cost: int
    suffix_cost: int

    @property
    def final(self) -> ProductNode:
        return self.suffix[0]


def static_plan(g: ReducedGraph, root: Optional[ProductNode] = None, mode: str = "cycle") -> StaticPlan:
    """Shortest-cycle plan in the static world.

    ``mode="cycle"`` picks the final node with the cheapest cycle (ties:
    cheaper prefix, then lowest node id); ``mode="first"`` minimizes
    prefix + one cycle instead.
    """
    cost = static_cost(g)
    roots = [root] if root is not None else list(g.roots)
    best = None
    for r in roots:
        arr = earliest_arrivals(g, r, 0, cost)
        for f in sorted(g.finals, key=g.node_id):
            if f not in arr:
                continue
            cyc = shortest_cycle(g, f, 0, cost)
            if cyc is None:
                continue
            p, c = arr[f][0], cyc[-1][1]
            key = (c, p) if mode == "cycle" else (p + c, c)
            key = key + (g.node_id(f), g.node_id(r))
            if best is None or key < best[0]:
                best = (key, r, f, arr, cyc)
    if best is None:
        raise InfeasibleSpecError("no accepting product node lies on a reachable cycle")
    _, r, f, arr, cyc = best
    prefix = [n for n, _ in path_to(arr, f)]
    suffix = [n for n, _ in cyc]
    return StaticPlan(tuple(prefix), tuple(suffix), arr[f][0], cyc[-1][1])
