"""Time-dependent edge costs of G_r under timed cell blockages."""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from typing import Iterator, Optional

from .buchi import BuchiAutomaton
from .product import ProductNode, ReducedGraph, SilentDistances
from .workspace import FOREVER, Blockages, Workspace, manhattan


@dataclass(frozen=True)
class TimedPath:
    """Product states visited at ``depart, depart+1, ...``; repeats are waits."""

    depart: int
    states: tuple[ProductNode, ...]

    @property
    def cost(self) -> int:
        return len(self.states) - 1

    @property
    def arrival(self) -> int:
        return self.depart + self.cost

    def shifted_tail(self, k: int) -> "TimedPath":
        return TimedPath(self.depart + k, self.states[k:])


def timed_shortest_path(
    w: Workspace,
    b: BuchiAutomaton,
    blockages: Blockages,
    src: ProductNode,
    dst: ProductNode,
    depart: int,
    deadline: Optional[int] = None,
    distances: Optional[SilentDistances] = None,
    heuristic: str = "static",
) -> Optional[TimedPath]:
    """Earliest arrival at ``dst`` leaving ``src`` no earlier than ``depart``.

    Unit moves and unit waits; interior cells must be unlabeled.  A cell may
    only be occupied while it is free, except ``src`` before departure (the
    robot is never evicted).  The search runs over safe intervals: a state
    is a product node plus the free span of its cell it was reached in, so
    waiting is implicit.  Returns ``None`` if ``dst`` is unreachable by
    ``deadline``.
    """
    if distances is None:
        distances = SilentDistances(w, b)
    table = distances.table(dst)

    def h(s: ProductNode) -> Optional[int]:
        d = table.get(s)
        if d is None:
            return None
        if heuristic == "manhattan":
            return manhattan(s.cell, dst.cell)
        return max(d, manhattan(s.cell, dst.cell))

    self_loop = src == dst
    h0 = 0 if self_loop else h(src)
    if h0 is None:
        return None
    if deadline is not None and depart + max(h0, 1 if self_loop else 0) > deadline:
        return None

    intervals: dict = {}

    def safe(c):
        iv = intervals.get(c)
        if iv is None:
            iv = intervals[c] = blockages.safe_intervals(c)
        return iv

    tie = itertools.count()
    # state key: (node, interval index); -1 marks the start, free until departure
    start = (src, -1)
    arrival = {start: depart}
    parent: dict = {start: None}
    heap = [(depart + h0, -depart, next(tie), start)]
    closed = set()
    goal = None
    while heap:
        f, neg_t, _, key = heapq.heappop(heap)
        if key in closed:
            continue
        closed.add(key)
        s, idx = key
        t0 = -neg_t
        if key[1] == -2:
            goal = key
            break
        end = FOREVER if idx == -1 else safe(s.cell)[idx][1]
        for _, c in w.neighbors(s.cell):
            label = w.label_of(c)
            succ = sorted(b.step(s.q, label), key=b.index)
            if not succ:
                continue
            for j, (a2, b2) in enumerate(safe(c)):
                t1 = max(t0 + 1, a2)
                if t1 > end:
                    break
                if t1 >= b2:
                    continue
                if deadline is not None and t1 > deadline:
                    break
                for q in succ:
                    n = ProductNode(c, q)
                    if n == dst:
                        nk = (n, -2)
                        hn = 0
                    elif label:
                        continue
                    else:
                        hn = h(n)
                        if hn is None:
                            continue
                        nk = (n, j)
                    if deadline is not None and t1 + hn > deadline:
                        continue
                    if nk in closed or arrival.get(nk, FOREVER) <= t1:
                        continue
                    arrival[nk] = t1
                    parent[nk] = (key, t1 - 1)
                    heapq.heappush(heap, (t1 + hn, -t1, next(tie), nk))
    if goal is None:
        return None
    hops = []
    key = goal
    while parent[key] is not None:
        prev, leave = parent[key]
        hops.append((key[0], leave))
        key = prev
    hops.reverse()
    states = [src]
    t = depart
    for node, leave in hops:
        states.extend([states[-1]] * (leave - t))
        states.append(node)
        t = leave + 1
    return TimedPath(depart, tuple(states))


class EdgeCostTable:
    """Lazily filled map ``(edge, departure) -> TimedPath | None``.

    Departures whose optimal path starts by waiting at the source share the
    search with the next departure (``cost(t+1) = cost(t) - 1``).
    """

    def __init__(
        self,
        g: ReducedGraph,
        blockages: Blockages,
        horizon_start: int = 0,
        horizon_len: Optional[int] = None,
        heuristic: str = "static",
    ):
        self.g = g
        self.blockages = blockages
        self.horizon_start = horizon_start
        self.horizon_len = horizon_len
        self.heuristic = heuristic
        self._memo: dict[tuple[ProductNode, ProductNode, int], Optional[TimedPath]] = {}
        self.searches = 0

    @property
    def horizon_end(self) -> Optional[int]:
        if self.horizon_len is None:
            return None
        return self.horizon_start + self.horizon_len

    def path(self, u: ProductNode, v: ProductNode, t: int) -> Optional[TimedPath]:
        key = (u, v, t)
        if key in self._memo:
            return self._memo[key]
        g = self.g
        p = self._fast(u, v, t)
        if p is None:
            self.searches += 1
            p = timed_shortest_path(
                g.workspace,
                g.automaton,
                self.blockages,
                u,
                v,
                t,
                None,
                g.distances,
                self.heuristic,
            )
        self._memo[key] = p
        if p is not None:
            k = 1
            while k < len(p.states) and p.states[k] == u and (u, v, t + k) not in self._memo:
                self._memo[(u, v, t + k)] = p.shifted_tail(k)
                k += 1
        return p

    def _fast(self, u: ProductNode, v: ProductNode, t: int) -> Optional[TimedPath]:
        wit = self.g.witness[(u, v)]
        bl = self.blockages
        if t >= bl.quiet_from:
            return TimedPath(t, wit)
        for i, n in enumerate(wit[1:], start=1):
            if bl.is_blocked(n.cell, t + i):
                return None
        return TimedPath(t, wit)

    def cost(self, u: ProductNode, v: ProductNode, t: int) -> Optional[int]:
        p = self.path(u, v, t)
        return None if p is None else p.cost

    __call__ = cost

    def within_horizon(self, u: ProductNode, v: ProductNode, t: int) -> bool:
        c = self.cost(u, v, t)
        end = self.horizon_end
        return c is not None and (end is None or t + c <= end)

    def fill(self) -> "EdgeCostTable":
        if self.horizon_len is None:
            raise ValueError("fill() needs a finite horizon")
        for u, v in self.g.edges:
            for t in range(self.horizon_start, self.horizon_end + 1):
                self.path(u, v, t)
        return self

    def rows(self) -> Iterator[tuple[tuple[ProductNode, ProductNode], list[Optional[int]]]]:
        """Per-edge cost rows over the horizon (``None`` = unreachable)."""
        for e in sorted(self.g.edges, key=lambda e: (self.g.node_id(e[0]), self.g.node_id(e[1]))):
            yield e, [self.cost(e[0], e[1], t) for t in range(self.horizon_start, self.horizon_end + 1)]

    def to_csv(self) -> str:
        lines = ["from_x,from_y,from_q,to_x,to_y,to_q,depart,cost"]
        for (u, v), row in self.rows():
            for i, c in enumerate(row):
                lines.append(
                    f"{u.cell[0]},{u.cell[1]},{u.q},{v.cell[0]},{v.cell[1]},{v.q},"
                    f"{self.horizon_start + i},{'' if c is None else c}"
                )
        return "\n".join(lines) + "\n"


def dy_cost(
    g: ReducedGraph,
    time_cur: int,
    H: int,
    blockages: Blockages,
    fill: bool = True,
    heuristic: str = "static",
) -> EdgeCostTable:
    """Edge costs for every G_r edge and departure in ``[time_cur, time_cur + H]``.

    Costs are exact even when they run past the horizon; callers filter with
    ``within_horizon``.
    """
    table = EdgeCostTable(g, blockages, time_cur, H, heuristic)
    return table.fill() if fill else table
