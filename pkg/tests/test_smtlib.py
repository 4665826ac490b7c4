import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from instances import fig1_dag, random_dag

from dtstar.horizon import INF, gen_cons
from dtstar.smtlib import SmtSyntaxError, emit_smtlib, parse_smt, solve_with_z3, tokenize_smt
from dtstar.solvers import solve_exact


def test_emit_is_deterministic_and_parses():
    a = emit_smtlib(gen_cons(fig1_dag()))
    b = emit_smtlib(gen_cons(fig1_dag()))
    assert a == b
    forms = parse_smt(a)
    heads = [f[0] for f in forms]
    assert heads[-2:] == ["check-sat", "get-objectives"]
    assert heads.count("maximize") == 1 and heads.count("minimize") == 2


def test_declarations_cover_model_variables():
    cs = gen_cons(fig1_dag())
    forms = parse_smt(emit_smtlib(cs))
    declared = {f[1] for f in forms if f[0] == "declare-const"}
    assert set(cs.variables) <= declared
    assert {"cy_count", "last_len", "T_total"} <= declared


def test_objective_subset():
    text = emit_smtlib(gen_cons(fig1_dag()), which=(1,))
    assert "(minimize" not in text and "(maximize cy_count)" in text


def test_sentinel_when_no_completion_exists():
    text = emit_smtlib(gen_cons(fig1_dag(H=3)))
    assert f"(assert (= T_total {INF}))" in text


@pytest.mark.parametrize("text", ["(assert (and a b)", "(assert a))", "(frobnicate x)", "x"])
def test_syntax_errors(text):
    with pytest.raises(SmtSyntaxError):
        parse_smt(text)


def test_tokenizer_skips_comments():
    assert tokenize_smt("; hello\n(check-sat) ; tail") == ["(", "check-sat", ")"]


@settings(max_examples=15)
@given(st.integers(0, 10**6))
def test_z3_optimum_matches_exact_solver(seed):
    pytest.importorskip("z3")
    dag, _, _ = random_dag(seed, H_range=(10, 25))
    cs = gen_cons(dag)
    got = solve_with_z3(emit_smtlib(cs))
    assert got == solve_exact(dag, cs).objective.as_tuple()
