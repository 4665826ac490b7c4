"""Büchi automata: JSON ingestion, guard evaluation and lasso acceptance."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .workspace import Cell, Workspace

State = str


class AutomatonParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


class MalformedPlanError(ValueError):
    pass


# ---------------------------------------------------------------------------
# guards

_TOKEN = re.compile(r"\s*(?:(\|\||&&|[!&|()])|([A-Za-z_][A-Za-z0-9_]*))")


class GuardSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


def _tokenize(text: str) -> list[tuple[str, int]]:
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise GuardSyntaxError(f"unexpected character {text[pos]!r}", pos)
        tok = m.group(1) or m.group(2)
        start = m.start(1) if m.group(1) else m.start(2)
        out.append(({"&&": "&", "||": "|"}.get(tok, tok), start))
        pos = m.end()
    return out


class _Parser:
    """expr := conj ('|' conj)* ; conj := unary ('&' unary)* ;
    unary := '!' unary | '(' expr ')' | atom | true | false"""

    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def offset(self) -> int:
        return self.toks[self.i][1] if self.i < len(self.toks) else len(self.text)

    def take(self) -> str:
        tok = self.toks[self.i][0]
        self.i += 1
        return tok

    def parse(self):
        if not self.toks:
            raise GuardSyntaxError("empty guard", 0)
        node = self.expr()
        if self.peek() is not None:
            raise GuardSyntaxError(f"unexpected token {self.peek()!r}", self.offset())
        return node

    def expr(self):
        parts = [self.conj()]
        while self.peek() == "|":
            self.take()
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else ("or", tuple(parts))

    def conj(self):
        parts = [self.unary()]
        while self.peek() == "&":
            self.take()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else ("and", tuple(parts))

    def unary(self):
        tok = self.peek()
        if tok is None:
            raise GuardSyntaxError("unexpected end of guard", self.offset())
        if tok == "!":
            self.take()
            return ("not", self.unary())
        if tok == "(":
            self.take()
            node = self.expr()
            if self.peek() != ")":
                raise GuardSyntaxError("expected ')'", self.offset())
            self.take()
            return node
        if tok in ("&", "|", ")"):
            raise GuardSyntaxError(f"unexpected token {tok!r}", self.offset())
        self.take()
        if tok == "true":
            return ("const", True)
        if tok == "false":
            return ("const", False)
        return ("atom", tok)


def _eval(node, labels: frozenset[str]) -> bool:
    kind = node[0]
    if kind == "atom":
        return node[1] in labels
    if kind == "not":
        return not _eval(node[1], labels)
    if kind == "and":
        return all(_eval(n, labels) for n in node[1])
    if kind == "or":
        return any(_eval(n, labels) for n in node[1])
    return node[1]


def _atoms(node) -> set[str]:
    kind = node[0]
    if kind == "atom":
        return {node[1]}
    if kind == "not":
        return _atoms(node[1])
    if kind in ("and", "or"):
        return set().union(*(_atoms(n) for n in node[1]))
    return set()


@dataclass(frozen=True)
class Guard:
    """Boolean formula over proposition atoms (``!``, ``&``, ``|``, parentheses)."""

    text: str
    tree: tuple = field(compare=False, repr=False)

    @classmethod
    def parse(cls, text: str) -> "Guard":
        return cls(text, _Parser(text).parse())

    @property
    def atoms(self) -> set[str]:
        return _atoms(self.tree)

    def evaluate(self, labels: Iterable[str]) -> bool:
        return _eval(self.tree, frozenset(labels))

    def to_smt(self) -> str:
        """Render with the atoms as SMT-LIB boolean symbols."""

        def go(node) -> str:
            kind = node[0]
            if kind == "atom":
                return node[1]
            if kind == "const":
                return "true" if node[1] else "false"
            if kind == "not":
                return f"(not {go(node[1])})"
            return f"({kind} {' '.join(go(n) for n in node[1])})"

        return go(self.tree)


# ---------------------------------------------------------------------------
# automaton


@dataclass(frozen=True)
class BuchiAutomaton:
    states: tuple[State, ...]
    initial: frozenset[State]
    accepting: frozenset[State]
    alphabet: frozenset[str]
    transitions: tuple[tuple[State, Guard, State], ...]
    name: str = ""
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        known = set(self.states)
        if len(known) != len(self.states):
            raise AutomatonParseError("duplicate state names")
        if not self.initial:
            raise AutomatonParseError("no initial state")
        if not self.initial <= known:
            raise AutomatonParseError(f"unknown initial state(s) {sorted(self.initial - known)}")
        if not self.accepting:
            raise AutomatonParseError("accepting set is empty")
        if not self.accepting <= known:
            raise AutomatonParseError(
                f"unknown accepting state(s) {sorted(self.accepting - known)}"
            )
        for src, g, dst in self.transitions:
            if src not in known or dst not in known:
                raise AutomatonParseError(f"transition {src}->{dst} uses an unknown state")
            undeclared = g.atoms - self.alphabet
            if undeclared:
                raise AutomatonParseError(
                    f"guard {g.text!r} uses undeclared proposition(s) {sorted(undeclared)}"
                )

    def index(self, q: State) -> int:
        return self.states.index(q)

    def step(self, q: State, labels: Iterable[str]) -> frozenset[State]:
        """States reachable from ``q`` when exactly ``labels`` hold."""
        key = (q, frozenset(labels) & self.alphabet)
        try:
            return self._cache[key]
        except KeyError:
            pass
        if q not in self.states:
            raise KeyError(q)
        out = frozenset(dst for src, g, dst in self.transitions if src == q and g.evaluate(key[1]))
        self._cache[key] = out
        return out

    def step_set(self, qs: Iterable[State], labels: Iterable[str]) -> frozenset[State]:
        labels = frozenset(labels)
        out: set[State] = set()
        for q in qs:
            out |= self.step(q, labels)
        return frozenset(out)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "states": list(self.states),
            "initial": sorted(self.initial, key=self.index),
            "accepting": sorted(self.accepting, key=self.index),
            "alphabet": sorted(self.alphabet),
            "transitions": [
                {"from": s, "guard": g.text, "to": d} for s, g, d in self.transitions
            ],
        }


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def parse_automaton(text: str) -> BuchiAutomaton:
    """Parse the JSON automaton format (see ``docs/formats.md``)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AutomatonParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise AutomatonParseError("top level must be an object", 1, 1)
    for key in ("states", "initial", "accepting", "transitions"):
        if key not in doc:
            raise AutomatonParseError(f"missing key {key!r}")

    transitions = []
    search_from = 0
    for i, tr in enumerate(doc["transitions"]):
        try:
            src, guard_text, dst = tr["from"], tr["guard"], tr["to"]
        except (KeyError, TypeError):
            raise AutomatonParseError(f"transition #{i} needs 'from', 'guard' and 'to'") from None
        # locate the guard literal so errors can point into the file
        needle = json.dumps(guard_text)
        at = text.find(needle, search_from)
        if at >= 0:
            search_from = at + len(needle)
        try:
            guard = Guard.parse(guard_text)
        except GuardSyntaxError as exc:
            if at >= 0:
                line, col = _position(text, at + 1 + exc.offset)
            else:
                line, col = None, None
            raise AutomatonParseError(
                f"guard syntax error in transition #{i}: {exc}", line, col
            ) from None
        transitions.append((str(src), guard, str(dst)))

    alphabet = doc.get("alphabet")
    if alphabet is None:
        alphabet = sorted(set().union(*(g.atoms for _, g, _ in transitions)) if transitions else [])
    return BuchiAutomaton(
        states=tuple(str(s) for s in doc["states"]),
        initial=frozenset(str(s) for s in doc["initial"]),
        accepting=frozenset(str(s) for s in doc["accepting"]),
        alphabet=frozenset(alphabet),
        transitions=tuple(transitions),
        name=str(doc.get("name", "")),
    )


# ---------------------------------------------------------------------------
# acceptance


@dataclass(frozen=True)
class LassoTrace:
    """The infinite word ``prefix . loop^omega`` over label sets."""

    prefix: tuple[frozenset[str], ...]
    loop: tuple[frozenset[str], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "prefix", tuple(frozenset(x) for x in self.prefix))
        object.__setattr__(self, "loop", tuple(frozenset(x) for x in self.loop))
        if not self.loop:
            raise ValueError("lasso loop must be nonempty")


def accepts_lasso(
    b: BuchiAutomaton, trace: LassoTrace, start: Iterable[State] | None = None
) -> bool:
    """True iff some run over ``prefix . loop^omega`` visits F infinitely often.

    The prefix is simulated on state sets; the loop is unrolled into the finite
    graph over (state, loop position) where an accepting node lying on a cycle
    reachable from the entry set witnesses acceptance.
    """
    current = frozenset(b.initial if start is None else start)
    for letter in trace.prefix:
        current = b.step_set(current, letter)
        if not current:
            return False
    n = len(trace.loop)

    def succ(node):
        q, i = node
        return [(q2, (i + 1) % n) for q2 in b.step(q, trace.loop[i])]

    reachable = set()
    stack = [(q, 0) for q in current]
    while stack:
        node = stack.pop()
        if node in reachable:
            continue
        reachable.add(node)
        stack.extend(succ(node))

    for node in sorted(reachable):
        if node[0] not in b.accepting:
            continue
        seen = set()
        stack = list(succ(node))
        while stack:
            cur = stack.pop()
            if cur == node:
                return True
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(succ(cur))
    return False


@dataclass(frozen=True)
class LassoPlan:
    """A cell path whose tail ``cells[loop_start:]`` closes into a loop.

    Consecutive equal cells are waits and emit no letter.
    """

    cells: tuple[Cell, ...]
    loop_start: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "cells", tuple(tuple(c) for c in self.cells))


def lasso_trace(w: Workspace, plan: LassoPlan) -> LassoTrace | None:
    """Label trace of ``plan``; ``None`` if the loop never moves."""
    cells = plan.cells
    k = plan.loop_start
    if not (0 <= k < len(cells)) or cells[-1] != cells[k]:
        raise MalformedPlanError("loop segment must start and end on the same cell")
    for a, b in zip(cells, cells[1:]):
        w.check_cell(a)
        if a != b and b not in {n for _, n in w.neighbors(a)}:
            raise MalformedPlanError(f"cells {a} and {b} are not adjacent")
    w.check_cell(cells[-1])
    letters = [None if cells[i] == cells[i - 1] else w.label_of(cells[i]) for i in range(1, len(cells))]
    prefix = tuple(x for x in letters[:k] if x is not None)
    loop = tuple(x for x in letters[k:] if x is not None)
    if not loop:
        return None
    return LassoTrace(prefix, loop)


def verify_plan(
    b: BuchiAutomaton,
    w: Workspace,
    plan: LassoPlan,
    start: Iterable[State] | None = None,
) -> bool:
    """Check that the robot path ``plan`` satisfies the automaton.

    ``start`` is the automaton state set at the first cell (initial states by
    default), which lets plans computed mid-run be checked from the robot's
    current state.
    """
    trace = lasso_trace(w, plan)
    if trace is None:
        return False
    return accepts_lasso(b, trace, start)


def lasso_from_timed(cells: Sequence[Cell], loop: Sequence[Cell]) -> LassoPlan:
    """Join a finite path and a closing loop that starts at its last cell."""
    cells = list(cells)
    loop = list(loop)
    if not loop or loop[0] != cells[-1] or loop[-1] != loop[0]:
        raise MalformedPlanError("closing loop must start and end at the path's last cell")
    return LassoPlan(tuple(cells + loop[1:]), len(cells) - 1)
