"""Grid workspace, proposition labels and timed cell blockages."""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Iterable, Mapping

Cell = tuple[int, int]

# Order matters: it fixes neighbor enumeration and therefore tie-breaking.
ACTIONS: dict[str, tuple[int, int]] = {
    "left": (-1, 0),
    "right": (1, 0),
    "up": (0, 1),
    "down": (0, -1),
}
WAIT = "wait"

EMPTY_LABEL: frozenset[str] = frozenset()

# open ends of time intervals
NEVER = -(10**12)
FOREVER = 10**12


class InvalidCellError(ValueError):
    pass


class ScenarioError(ValueError):
    """Raised for inconsistent workspace or event definitions."""


def manhattan(a: Cell, b: Cell) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def cell_order(c: Cell) -> tuple[int, int]:
    """Row-major sort key."""
    return (c[1], c[0])


@dataclass(frozen=True)
class Workspace:
    """A 4-connected grid with static obstacles and labeled cells.

    ``move_cost`` is the duration of every move action in seconds; waiting
    always takes one second.
    """

    width: int
    height: int
    obstacles: frozenset[Cell]
    labels: Mapping[Cell, frozenset[str]]
    initial: Cell
    move_cost: int = 1
    _nbrs: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "obstacles", frozenset(map(tuple, self.obstacles)))
        object.__setattr__(
            self,
            "labels",
            {tuple(c): frozenset(ps) for c, ps in self.labels.items() if ps},
        )
        object.__setattr__(self, "initial", tuple(self.initial))
        if self.width <= 0 or self.height <= 0:
            raise ScenarioError("grid dimensions must be positive")
        if self.move_cost <= 0:
            raise ScenarioError("action cost must be positive")
        for c in self.obstacles:
            if not self.in_bounds(c):
                raise ScenarioError(f"obstacle {c} outside the grid")
        if not self.is_free(self.initial):
            raise ScenarioError(f"initial cell {self.initial} is blocked or outside the grid")
        for c in self.labels:
            if not self.is_free(c):
                raise ScenarioError(f"labeled cell {c} is blocked or outside the grid")

    @property
    def propositions(self) -> frozenset[str]:
        out: set[str] = set()
        for ps in self.labels.values():
            out |= ps
        return frozenset(out)

    def in_bounds(self, c: Cell) -> bool:
        return 0 <= c[0] < self.width and 0 <= c[1] < self.height

    def is_free(self, c: Cell) -> bool:
        return self.in_bounds(c) and c not in self.obstacles

    def check_cell(self, c: Cell) -> None:
        if not self.is_free(c):
            raise InvalidCellError(f"cell {c} is outside the grid or a static obstacle")

    def neighbors(self, c: Cell) -> list[tuple[str, Cell]]:
        """Return ``(action, cell)`` for every free 4-neighbor of ``c``."""
        try:
            return self._nbrs[c]
        except KeyError:
            pass
        self.check_cell(c)
        out = []
        for name, (dx, dy) in ACTIONS.items():
            n = (c[0] + dx, c[1] + dy)
            if self.is_free(n):
                out.append((name, n))
        self._nbrs[c] = out
        return out

    def label_of(self, c: Cell) -> frozenset[str]:
        return self.labels.get(c, EMPTY_LABEL)

    def free_cells(self) -> list[Cell]:
        cells = [
            (x, y)
            for y in range(self.height)
            for x in range(self.width)
            if (x, y) not in self.obstacles
        ]
        return cells

    def labeled_cells(self) -> list[Cell]:
        return sorted(self.labels, key=cell_order)

    def with_initial(self, cell: Cell) -> "Workspace":
        return Workspace(
            self.width, self.height, self.obstacles, self.labels, cell, self.move_cost
        )


@dataclass(frozen=True, order=True)
class DynamicEvent:
    """Cell ``cell`` is unavailable during ``[t_start, t_end)``.

    The planner learns about it at ``announced_at`` (defaults to ``t_start``).
    """

    t_start: int
    t_end: int
    cell: Cell
    announced_at: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "cell", tuple(self.cell))
        if self.announced_at is None:
            object.__setattr__(self, "announced_at", self.t_start)
        if self.t_start > self.t_end:
            raise ScenarioError(f"event on {self.cell}: t_start > t_end")
        if self.announced_at > self.t_start:
            raise ScenarioError(f"event on {self.cell}: announced after it starts")

    def covers(self, t: int) -> bool:
        return self.t_start <= t < self.t_end


def blocked_during(events: Iterable[DynamicEvent], c: Cell, t: int, now: int) -> bool:
    """True iff an event announced by ``now`` blocks ``c`` at instant ``t``."""
    c = tuple(c)
    return any(e.announced_at <= now and e.cell == c and e.covers(t) for e in events)


class Blockages:
    """Interval index over the events visible at time ``now``.

    Intervals of the same cell are merged so lookups are a single bisect.
    """

    def __init__(self, events: Iterable[DynamicEvent] = (), now: int | None = None):
        per_cell: dict[Cell, list[tuple[int, int]]] = {}
        visible = []
        for e in events:
            if now is not None and e.announced_at > now:
                continue
            if e.t_end <= e.t_start:
                continue
            visible.append(e)
            per_cell.setdefault(e.cell, []).append((e.t_start, e.t_end))
        self.events: tuple[DynamicEvent, ...] = tuple(sorted(visible))
        self._starts: dict[Cell, list[int]] = {}
        self._ends: dict[Cell, list[int]] = {}
        for c, spans in per_cell.items():
            spans.sort()
            merged: list[list[int]] = []
            for s, e in spans:
                if merged and s <= merged[-1][1]:
                    merged[-1][1] = max(merged[-1][1], e)
                else:
                    merged.append([s, e])
            self._starts[c] = [s for s, _ in merged]
            self._ends[c] = [e for _, e in merged]
        # after this instant nothing is blocked
        self.quiet_from: int = max((e.t_end for e in self.events), default=0)

    def __bool__(self) -> bool:
        return bool(self.events)

    def is_blocked(self, c: Cell, t: int) -> bool:
        starts = self._starts.get(c)
        if starts is None:
            return False
        i = bisect.bisect_right(starts, t) - 1
        return i >= 0 and t < self._ends[c][i]

    def release_time(self, c: Cell, t: int) -> int:
        """First instant ``>= t`` at which ``c`` is free."""
        starts = self._starts.get(c)
        if starts is None:
            return t
        i = bisect.bisect_right(starts, t) - 1
        if i >= 0 and t < self._ends[c][i]:
            return self._ends[c][i]
        return t

    def safe_intervals(self, c: Cell) -> list[tuple[int, int]]:
        """Maximal ``[a, b)`` spans during which ``c`` is free (``b`` may be ``FOREVER``)."""
        starts = self._starts.get(c)
        if starts is None:
            return [(NEVER, FOREVER)]
        out = []
        prev = NEVER
        for s, e in zip(starts, self._ends[c]):
            if s > prev:
                out.append((prev, s))
            prev = e
        out.append((prev, FOREVER))
        return out

    def cells(self) -> set[Cell]:
        return set(self._starts)
