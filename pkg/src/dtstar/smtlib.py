"""SMT-LIB v2 export of the horizon model, plus a tiny reader for smoke tests."""

from __future__ import annotations

import re
from typing import Optional

from .horizon import INF, ConstraintSet, Expr

_OPS = {"and": "and", "or": "or", "not": "not", "=>": "=>", "=": "="}


def expr_to_smt(e: Expr) -> str:
    op = e[0]
    if op == "var":
        return e[1]
    if op == "const":
        return "true" if e[1] else "false"
    if op == "not":
        return f"(not {expr_to_smt(e[1])})"
    if op in ("and", "or"):
        args = e[1]
        if not args:
            return "true" if op == "and" else "false"
        if len(args) == 1:
            return expr_to_smt(args[0])
        return f"({op} {' '.join(expr_to_smt(a) for a in args)})"
    return f"({_OPS[op]} {expr_to_smt(e[1])} {expr_to_smt(e[2])})"


def _ite_chain(items: list[tuple[str, int]], sentinel: int) -> str:
    out = str(sentinel)
    for name, value in reversed(items):
        out = f"(ite {name} {value} {out})"
    return out


def emit_smtlib(cs: ConstraintSet, which: tuple[int, ...] = (1, 2, 3)) -> str:
    """Deterministic SMT-LIB script for the model and its lexicographic goals.

    ``cy_count`` is a pseudo-boolean sum over the completion variables;
    ``last_len`` and ``T_total`` are if-then-else chains over the completion
    variables ordered by decreasing completion time, falling back to a large
    sentinel when no cycle completes.
    """
    dag = cs.dag
    lines = [
        "; horizon decision model",
        f"; time_cur={dag.time_cur} H={dag.H} nodes={len(dag.nodes)} "
        f"prefix_edges={len(dag.prefix_edges)} cycle_edges={len(dag.cycle_edges)}",
        f"; root={dag.root.loc.cell[0]},{dag.root.loc.cell[1]},{dag.root.loc.q}@{dag.root.t}",
        "(set-option :produce-models true)",
        "(set-option :opt.priority lex)",
    ]
    for v in cs.variables:
        lines.append(f"(declare-const {v} Bool)")
    for fam, clauses in cs.clauses.items():
        if clauses:
            lines.append(f"; {fam}")
        for c in clauses:
            lines.append(f"(assert {expr_to_smt(c)})")

    ordered = sorted(cs.completions, key=lambda c: (-c[1], c[2], c[0]))
    count = " ".join(f"(ite {name} 1 0)" for name, _, _ in sorted(cs.completions))
    lines.append("(declare-const cy_count Int)")
    lines.append(f"(assert (= cy_count (+ 0 {count})))" if count else "(assert (= cy_count 0))")
    lines.append("(declare-const last_len Int)")
    lines.append(f"(assert (= last_len {_ite_chain([(n, tau) for n, _, tau in ordered], INF)}))")
    lines.append("(declare-const T_total Int)")
    lines.append(f"(assert (= T_total {_ite_chain([(n, t) for n, t, _ in ordered], INF)}))")
    lines.append("(maximize cy_count)")
    if 2 in which:
        lines.append("(minimize last_len)")
    if 3 in which:
        lines.append("(minimize T_total)")
    lines.append("(check-sat)")
    lines.append("(get-objectives)")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# reader

_TOKEN = re.compile(r"\s*(?:(;[^\n]*)|(\()|(\))|([^\s()]+))")

COMMANDS = {
    "set-option",
    "declare-const",
    "declare-fun",
    "define-fun",
    "assert",
    "maximize",
    "minimize",
    "check-sat",
    "get-objectives",
    "get-model",
}


class SmtSyntaxError(ValueError):
    pass


def tokenize_smt(text: str) -> list[str]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip():
                raise SmtSyntaxError(f"cannot tokenize at offset {pos}")
            break
        pos = m.end()
        if m.group(1):
            continue
        out.append(m.group(2) or m.group(3) or m.group(4))
    return out


def parse_smt(text: str) -> list:
    """Parse into nested lists; checks balance and top-level commands."""
    stack: list[list] = [[]]
    for tok in tokenize_smt(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise SmtSyntaxError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise SmtSyntaxError("unbalanced '('")
    forms = stack[0]
    for f in forms:
        if not isinstance(f, list) or not f or f[0] not in COMMANDS:
            raise SmtSyntaxError(f"unexpected top-level form {f!r}")
    return forms


def solve_with_z3(text: str) -> Optional[tuple[int, int, int]]:
    """Optimum ``(cy_count, last_len, T_total)`` via z3, or None if z3 is absent."""
    try:
        import z3
    except ImportError:
        return None
    opt = z3.Optimize()
    opt.set(priority="lex")
    body = "\n".join(
        ln for ln in text.splitlines() if not ln.startswith(("(check-sat", "(get-objectives", "(set-option"))
    )
    opt.from_string(body)
    if opt.check() != z3.sat:
        return None
    m = opt.model()
    get = {d.name(): d for d in m.decls()}
    return tuple(m[get[k]].as_long() for k in ("cy_count", "last_len", "T_total"))
