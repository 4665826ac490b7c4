"""Scenario files and the random blockage generator."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Any, Optional

from .buchi import BuchiAutomaton, parse_automaton
from .workspace import Cell, DynamicEvent, ScenarioError, Workspace

ALGORITHMS = ("dtstar", "greedy1", "greedy2")


@dataclass(frozen=True)
class EventGenerator:
    arrival_mean: float
    arrival_std: float
    duration_mean: float
    duration_std: float
    max_cells: int = 1
    propositions_only: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.arrival_std < 0 or self.duration_std < 0:
            raise ScenarioError("standard deviations must be non-negative")
        if self.max_cells < 1:
            raise ScenarioError("max_cells must be at least 1")


@dataclass(frozen=True)
class Scenario:
    name: str
    workspace: Workspace
    automaton: BuchiAutomaton
    events: tuple[DynamicEvent, ...] = ()
    generator: Optional[EventGenerator] = None
    H: int = 30
    time_comp: int = 1
    total_time: int = 100
    algorithm: str = "dtstar"
    objectives: tuple[int, ...] = (1, 2, 3)

    def __post_init__(self) -> None:
        if self.H <= 0:
            raise ScenarioError("horizon must be positive")
        if self.time_comp < 0:
            raise ScenarioError("time_comp must be non-negative")
        if self.total_time <= 0:
            raise ScenarioError("total_time must be positive")
        if self.algorithm not in ALGORITHMS:
            raise ScenarioError(f"unknown algorithm {self.algorithm!r}")
        for e in self.events:
            self.workspace.check_cell(e.cell)
        missing = self.workspace.propositions - self.automaton.alphabet
        if missing:
            raise ScenarioError(f"workspace propositions {sorted(missing)} unknown to the automaton")

    def with_(self, **kw: Any) -> "Scenario":
        return replace(self, **kw)

    def ledger(self, seed: Optional[int] = None) -> list[DynamicEvent]:
        """Scripted events plus, if configured, generated ones."""
        out = list(self.events)
        if self.generator is not None:
            gen = self.generator if seed is None else replace(self.generator, seed=seed)
            out.extend(generate_events(gen, self.workspace, self.total_time))
        return sorted(out, key=lambda e: (e.announced_at, e.t_start, e.cell))


def env_changes(
    gen: EventGenerator, w: Workspace, now: int, rng: random.Random
) -> tuple[int, list[DynamicEvent]]:
    """Sample the next change after ``now``: returns its time and events."""
    gap = max(1, round(rng.gauss(gen.arrival_mean, gen.arrival_std)))
    t = now + gap
    pool = w.labeled_cells() if gen.propositions_only else w.free_cells()
    pool = [c for c in pool if c != w.initial] or pool
    k = min(rng.randint(1, gen.max_cells), len(pool))
    cells = rng.sample(pool, k)
    events = []
    for c in cells:
        d = max(1, round(rng.gauss(gen.duration_mean, gen.duration_std)))
        events.append(DynamicEvent(t, t + d, c, t))
    return t, events


def generate_events(gen: EventGenerator, w: Workspace, total_time: int) -> list[DynamicEvent]:
    rng = random.Random(gen.seed)
    out: list[DynamicEvent] = []
    now = 0
    while True:
        now, events = env_changes(gen, w, now, rng)
        if now >= total_time:
            return out
        out.extend(events)


# ---------------------------------------------------------------------------
# JSON


def _cell(v: Any, what: str) -> Cell:
    if not (isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, int) for x in v)):
        raise ScenarioError(f"{what}: expected [x, y], got {v!r}")
    return (v[0], v[1])


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("dtstar") / "data" / name))


def load_automaton(ref: str, base: Optional[Path] = None) -> BuchiAutomaton:
    path = Path(ref)
    if base is not None and not path.is_absolute() and (base / path).exists():
        path = base / path
    elif not path.exists():
        path = bundled_path(ref if ref.endswith(".json") else ref + ".json")
    if not path.exists():
        raise ScenarioError(f"automaton file {ref!r} not found")
    return parse_automaton(path.read_text())


def scenario_from_dict(doc: dict, base: Optional[Path] = None) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    try:
        grid = doc["grid"]
        width, height = int(grid["width"]), int(grid["height"])
        obstacles = [_cell(c, "obstacles") for c in doc.get("obstacles", [])]
        labels: dict[Cell, set[str]] = {}
        for item in doc.get("labels", []):
            c = _cell(item["cell"], "labels.cell")
            labels.setdefault(c, set()).update(item["props"])
        initial = _cell(doc["initial"], "initial")
        w = Workspace(width, height, frozenset(obstacles), labels, initial, int(doc.get("action_cost", 1)))
        aref = doc.get("automaton", "pickup_drop.json")
        if isinstance(aref, dict):
            automaton = parse_automaton(json.dumps(aref))
        else:
            automaton = load_automaton(str(aref), base)
        events = tuple(
            DynamicEvent(
                int(e["t_start"]),
                int(e["t_end"]),
                _cell(e["cell"], "events.cell"),
                None if e.get("announced_at") is None else int(e["announced_at"]),
            )
            for e in doc.get("events", [])
        )
        gen = None
        if doc.get("generator") is not None:
            gd = doc["generator"]
            gen = EventGenerator(
                float(gd["arrival_mean"]),
                float(gd["arrival_std"]),
                float(gd["duration_mean"]),
                float(gd["duration_std"]),
                int(gd.get("max_cells", 1)),
                bool(gd.get("propositions_only", True)),
                int(gd.get("seed", 0)),
            )
        H = doc.get("horizon")
        if H is None:
            H = int(gen.arrival_mean) if gen is not None else 30
        time_comp = doc.get("time_comp")
        if time_comp is None:
            time_comp = 2 if width * height >= 100 * 100 else 1
        return Scenario(
            name=str(doc.get("name", "")),
            workspace=w,
            automaton=automaton,
            events=events,
            generator=gen,
            H=int(H),
            time_comp=int(time_comp),
            total_time=int(doc.get("total_time", 100)),
            algorithm=str(doc.get("algorithm", "dtstar")),
            objectives=tuple(doc.get("objectives", (1, 2, 3))),
        )
    except KeyError as exc:
        raise ScenarioError(f"missing key {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(str(exc)) from None


def load_scenario(ref: str) -> Scenario:
    """Load a scenario from a path, or a bundled one by name (``fig1``, ``w3``...)."""
    path = Path(ref)
    if not path.exists():
        path = bundled_path(ref if ref.endswith(".json") else ref + ".json")
    if not path.exists():
        raise ScenarioError(f"scenario {ref!r} not found")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return scenario_from_dict(doc, path.parent)


def scenario_to_dict(s: Scenario) -> dict:
    w = s.workspace
    doc: dict[str, Any] = {
        "name": s.name,
        "grid": {"width": w.width, "height": w.height},
        "obstacles": [list(c) for c in sorted(w.obstacles, key=lambda c: (c[1], c[0]))],
        "labels": [{"cell": list(c), "props": sorted(w.labels[c])} for c in w.labeled_cells()],
        "initial": list(w.initial),
        "automaton": s.automaton.to_json(),
        "events": [
            {"cell": list(e.cell), "t_start": e.t_start, "t_end": e.t_end, "announced_at": e.announced_at}
            for e in s.events
        ],
        "horizon": s.H,
        "time_comp": s.time_comp,
        "total_time": s.total_time,
        "algorithm": s.algorithm,
        "objectives": list(s.objectives),
    }
    if s.generator is not None:
        g = s.generator
        doc["generator"] = {
            "arrival_mean": g.arrival_mean,
            "arrival_std": g.arrival_std,
            "duration_mean": g.duration_mean,
            "duration_std": g.duration_std,
            "max_cells": g.max_cells,
            "propositions_only": g.propositions_only,
            "seed": g.seed,
        }
    return doc
