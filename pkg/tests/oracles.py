"""Independent reference implementations used to check the package.

Nothing here calls into the search code under test: the time-expanded
search, the networkx product graph and the path enumerator are written from
the definitions directly.
"""

from __future__ import annotations

import random
from typing import Optional

import networkx as nx

from dtstar.buchi import BuchiAutomaton
from dtstar.horizon import INF, assignment_for_path, objectives
from dtstar.scenario import load_automaton
from dtstar.workspace import DynamicEvent, Workspace

AUTOMATON = load_automaton("pickup_drop.json")


# ---------------------------------------------------------------------------
# random instances


def random_workspace(rng: random.Random, size: Optional[int] = None, density: float = 0.12) -> Workspace:
    """A connected-ish grid with 2-3 pickup and 2-3 drop cells."""
    n = size or rng.randint(8, 12)
    cells = [(x, y) for x in range(n) for y in range(n)]
    obstacles = {c for c in cells if rng.random() < density}
    free = [c for c in cells if c not in obstacles]
    # keep only the component of a random free cell so every label is reachable
    G = nx.Graph()
    G.add_nodes_from(free)
    fs = set(free)
    for x, y in free:
        for c in ((x + 1, y), (x, y + 1)):
            if c in fs:
                G.add_edge((x, y), c)
    comp = max(nx.connected_components(G), key=len)
    obstacles |= fs - comp
    pool = sorted(comp)
    rng.shuffle(pool)
    k_p, k_d = rng.randint(2, 3), rng.randint(2, 3)
    labels = {c: {"p"} for c in pool[:k_p]}
    labels.update({c: {"d"} for c in pool[k_p : k_p + k_d]})
    initial = pool[k_p + k_d]
    return Workspace(n, n, frozenset(obstacles), labels, initial)


def random_events(
    rng: random.Random, w: Workspace, count: int, t_max: int, max_len: int = 25, labeled_bias: float = 0.7
) -> list[DynamicEvent]:
    labeled = w.labeled_cells()
    free = w.free_cells()
    out = []
    for _ in range(count):
        c = rng.choice(labeled) if rng.random() < labeled_bias else rng.choice(free)
        s = rng.randint(0, t_max)
        out.append(DynamicEvent(s, s + rng.randint(1, max_len), c, rng.randint(0, s)))
    return out


# ---------------------------------------------------------------------------
# time-expanded search


def blocked(events, cell, t: int, now: int) -> bool:
    return any(e.cell == cell and e.announced_at <= now and e.t_start <= t < e.t_end for e in events)


def time_expanded_arrivals(
    w: Workspace,
    b: BuchiAutomaton,
    events,
    now: int,
    src,
    depart: int,
    targets: set,
    t_max: int,
) -> dict:
    """Earliest arrival cost to every target, by plain layer-by-layer search.

    Layer ``t`` holds every (cell, state, still-at-start) triple occupiable
    at instant ``t``.  Entering a labeled cell ends the walk there.
    """
    found: dict = {}
    layer = {(src.cell, src.q, True)}
    t = depart
    while layer and t < t_max and len(found) < len(targets):
        nxt = set()
        t1 = t + 1
        for cell, q, at_start in layer:
            if at_start or not blocked(events, cell, t1, now):
                nxt.add((cell, q, at_start))
            x, y = cell
            for c in ((x - 1, y), (x + 1, y), (x, y + 1), (x, y - 1)):
                if not w.is_free(c) or blocked(events, c, t1, now):
                    continue
                lab = w.label_of(c)
                for q2 in b.step(q, lab):
                    node = (c, q2)
                    if node in targets and node not in found:
                        found[node] = t1 - depart
                    if not lab:
                        nxt.add((c, q2, False))
        layer = nxt
        t = t1
    return found


# ---------------------------------------------------------------------------
# product graph via networkx


def product_digraph(w: Workspace, b: BuchiAutomaton) -> nx.DiGraph:
    P = nx.DiGraph()
    for cell in w.free_cells():
        for q in b.states:
            P.add_node((cell, q))
    for cell in w.free_cells():
        x, y = cell
        for c in ((x - 1, y), (x + 1, y), (x, y + 1), (x, y - 1)):
            if not w.is_free(c):
                continue
            for q in b.states:
                for q2 in b.step(q, w.label_of(c)):
                    P.add_edge((cell, q), (c, q2))
    return P


def silent_distances_from(P: nx.DiGraph, w: Workspace, src, roots: set) -> dict:
    """Distances from ``src`` to labeled nodes and roots, with unlabeled interiors."""
    H = nx.DiGraph()
    for u, v in P.edges:
        if w.label_of(u[0]):
            continue
        H.add_edge(u, v)
    H.add_node("S")
    for v in P.successors(src):
        H.add_edge("S", v)
    dist = nx.single_source_shortest_path_length(H, "S")
    return {
        v: d
        for v, d in dist.items()
        if v != "S" and (w.label_of(v[0]) or v in roots)
    }


def reduced_edges(w: Workspace, b: BuchiAutomaton) -> dict:
    """Edge weights of the reduced graph, by closure from the initial states."""
    P = product_digraph(w, b)
    roots = {(w.initial, q) for q in b.initial}
    edges = {}
    todo = list(roots)
    seen = set(roots)
    while todo:
        u = todo.pop()
        for v, d in silent_distances_from(P, w, u, roots).items():
            edges[(u, v)] = d
            if v not in seen:
                seen.add(v)
                todo.append(v)
    return edges


# ---------------------------------------------------------------------------
# decision sequences


def root_to_leaf_paths(dag, limit: int = 10**5) -> list[list]:
    out = []

    def walk(n, path):
        succ = dag.succ[n]
        if not succ:
            out.append(list(path))
            if len(out) > limit:
                raise OverflowError
            return
        for m in succ:
            path.append(m)
            walk(m, path)
            path.pop()

    walk(dag.root, [dag.root])
    return out


def lex_key(obj, which=(1, 2, 3)):
    count, last_len, total = obj
    return (-count, last_len if 2 in which else 0, total if 3 in which else 0)


def best_by_enumeration(cs, which=(1, 2, 3)):
    """Best objective triple over every constraint-satisfying sequence."""
    best = None
    feasible = 0
    for path in root_to_leaf_paths(cs.dag):
        asg = assignment_for_path(cs, path)
        if not cs.satisfied(asg):
            continue
        feasible += 1
        obj = objectives(cs, asg).as_tuple()
        if obj[0] == 0:
            obj = (0, INF, INF)
        if best is None or lex_key(obj, which) < lex_key(best, which):
            best = obj
    return best, feasible
