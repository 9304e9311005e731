from __future__ import annotations

import itertools

import pytest

from oracles import FIXTURES, PROGRAMS, random_modules, universe
from symerl.concrete import OutOfFuel, concrete_run
from symerl.driver import int_list_skeleton, load, parse_fun
from symerl.interpreter import BADARG, BADARITH, MATCH_FAIL, Interpreter, run
from symerl.linarith import UNSAT
from symerl.store import ConstraintStore
from symerl.syntax import Apply, FunName, Literal
from symerl.terms import (
    ATOM, FLOAT, INT, NIL, TRUE, Cons, Env, ErrorVal, Lit, fresh_lit, fresh_var, reset_fresh,
)
from symerl.translator import translate_module

SUM = FunName("sum", 1)


@pytest.fixture(autouse=True)
def fresh_ids():
    reset_fresh(0)


@pytest.fixture(scope="module")
def sum_table():
    return load(FIXTURES / "sum_list.cerl-min")


def table_of(body: str, params: str = "X"):
    arity = len([p for p in params.split(",") if p.strip()])
    return load(f"module m = f/{arity} = fun ({params}) -> {body} end", is_text=True)


def live(outcome):
    """Branches whose store survives the full satisfiability check."""
    return [b for b in outcome if b.store.check_sat().status != UNSAT]


def eval_text(text: str, bound: int = 5, **env):
    """Evaluate an expression over symbolic variables (the entry call is free)."""
    names = sorted(env)
    table = table_of(text, ", ".join(names))
    out = run(table, FunName("f", len(names)), [env[n] for n in names], bound)
    return list(out), out


def admitted_ints(store, x, lo=-3, hi=3) -> set:
    return {k for k in range(lo, hi + 1)
            if (s := store.unify(x, Lit(INT, k))) is not None and s.check_sat().status != UNSAT}


# -- the value and application rules ------------------------------------------------

def test_literal_costs_nothing():
    branches, _ = eval_text("0", bound=5)
    assert [(b.result, b.steps) for b in branches] == [(Lit(INT, 0), 5)]


def test_apply_with_no_budget_is_cut(sum_table):
    interp = Interpreter(sum_table)
    assert list(interp.eval(Apply(SUM, (Literal(NIL),)), Env(), ConstraintStore(), 0)) == []
    assert interp.cut


@pytest.mark.parametrize("arg, want", [
    (NIL, Lit(INT, 0)),
    (Cons(Lit(INT, 1), NIL), Lit(INT, 1)),
    (Lit(ATOM, "a"), MATCH_FAIL),
])
def test_sum_on_ground_inputs(sum_table, arg, want):
    (b,) = live(run(sum_table, SUM, [arg], 20))
    got = b.result if b.error else b.store.check_sat().ground(b.result)
    assert got == want
    assert b.error == isinstance(want, ErrorVal)


def test_case_on_symbolic_list(sum_table):
    lv = fresh_var("L")
    branches = live(run(sum_table, SUM, [lv], 0, check_cuts=False))
    # bound 0: the nil clause returns, the cons clause is cut at the recursive call,
    # and the catch-all raises match_fail
    assert [b.result for b in branches if b.error] == [MATCH_FAIL]
    (err,) = [b for b in branches if b.error]
    head, cons = err.store.residual([lv]).render()
    assert head == "In=[L]"
    assert cons == ["dif(L,cons(_Head,_Tail))", "dif(L,lit(list,nil))"]


def test_guarded_case_branches():
    table = table_of("case X of 0 when 'true' -> 'a' ; Y when call 'erlang':'>' (Y, 0) -> 'b' end")
    x = fresh_var("X")
    branches = live(run(table, FunName("f", 1), [x], 5))
    by_result = {}
    for b in branches:
        by_result.setdefault(b.result if b.error else b.store.walk(b.result), []).append(b.store)
    assert admitted_ints(by_result[Lit(ATOM, "a")][0], x) == {0}
    assert admitted_ints(by_result[Lit(ATOM, "b")][0], x) == {1, 2, 3}
    fails = [admitted_ints(s, x) for s in by_result[MATCH_FAIL]]
    assert set().union(*fails) == {-3, -2, -1}
    # the non-numeric badarg of the guard falls through to the catch-all as well
    assert any(s.check_sat().status != UNSAT and not admitted_ints(s, x) for s in by_result[MATCH_FAIL])


# -- let, call, primop, try ------------------------------------------------------------

def test_let_rules():
    (b,), _ = eval_text("let <X> = call 'erlang':'+' (1, 2) in X")
    assert b.store.check_sat().ground(b.result) == Lit(INT, 3)
    (b,), _ = eval_text("let <X> = case 1 of 2 when 'true' -> 0 end in 7")
    assert b.result == MATCH_FAIL and b.error
    y = fresh_var("Y")
    (b,), _ = eval_text("let <X> = Y in X", Y=y)
    assert b.result == y


def test_ground_addition():
    (b,), _ = eval_text("call 'erlang':'+' (1, 2)")
    assert b.store.check_sat().ground(b.result) == Lit(INT, 3)


def test_addition_with_symbolic_tag():
    lit = fresh_lit()
    branches, _ = eval_text("call 'erlang':'+' (A, 0)", A=lit)
    errors = [b for b in branches if b.error]
    values = [b for b in branches if not b.error]
    assert values and all(b.store.domain(lit.tag) and set(b.store.domain(lit.tag)) <= {INT, FLOAT}
                          for b in values)
    assert [b.result for b in errors] == [BADARITH]
    assert set(errors[0].store.domain(lit.tag)) == {ATOM, "list"}


def test_comparison_splits_linear_constraints():
    n = Lit(INT, fresh_var("N", "val", INT))
    branches, _ = eval_text("call 'erlang':'<' (X, 3)", X=n)
    truth = {b.result: b.store for b in branches}
    assert admitted_ints(truth[TRUE], n, -3, 6) == {-3, -2, -1, 0, 1, 2}
    assert admitted_ints(truth[Lit(ATOM, "false")], n, -3, 6) == {3, 4, 5, 6}


def test_comparison_of_non_numbers_is_badarg():
    (b,), _ = eval_text("call 'erlang':'<' ('a', 3)")
    assert b.result == BADARG


def test_boolean_operators_on_non_booleans():
    (b,), _ = eval_text("call 'erlang':'not' (3)")
    assert b.result == BADARG and b.error


def test_primop_sets_flag():
    (b,), _ = eval_text("primop 'match_fail' ({'case_clause', 'a'})")
    assert b.result == MATCH_FAIL and b.env.error


def test_try_rules():
    (b,), _ = eval_text("try call 'erlang':'+' (1, 'a') of X -> X catch E -> E")
    assert b.result == BADARITH and not b.error
    (b,), _ = eval_text("try 1 of X -> X catch E -> 0")
    assert b.result == Lit(INT, 1)
    (b,), _ = eval_text("try call 'erlang':'+' (1, 'a') of X -> X catch E -> call 'erlang':'+' (E, 1)")
    assert b.result == BADARITH and b.error


def test_caught_error_is_ordinary_data():
    (b,), _ = eval_text("try call 'erlang':'<' ([], 1) of X -> X catch E -> call 'erlang':'is_atom' (E)")
    assert b.result == Lit(ATOM, "false") and not b.error


# -- run -------------------------------------------------------------------------------

def test_sum_general_run_has_both_error_kinds(sum_table):
    out = run(sum_table, SUM, [fresh_var("L")], 20)
    names = {b.result.name for b in live(out) if b.error}
    assert names == {"badarith", "match_fail"}


def test_sum_int_list_skeleton_is_error_free(sum_table):
    sk = next(iter(int_list_skeleton(100)))
    out = run(sum_table, SUM, sk.inputs, 100)
    assert not [b for b in live(out) if b.error]
    assert not out.bound_exhausted


def test_nullary_function():
    table = load("module m = f/0 = fun () -> 0 end", is_text=True)
    out = run(table, FunName("f", 0), [], 5)
    assert [b.result for b in out] == [Lit(INT, 0)] and not out.bound_exhausted


def test_arity_mismatch(sum_table):
    with pytest.raises(ValueError):
        run(sum_table, SUM, [], 5)


def test_error_flag_matches_result(sum_table):
    for b in run(sum_table, SUM, [fresh_var("L")], 6):
        assert b.error == isinstance(b.result, ErrorVal)
        assert 0 <= b.steps <= 6


def test_enumeration_is_deterministic(sum_table):
    def trace():
        reset_fresh(0)
        return [(repr(b.result), b.steps) for b in run(sum_table, SUM, [fresh_var("L")], 8)]
    assert trace() == trace()


def test_budget_bounds_exploration(sum_table):
    counts = []
    for bound in range(6):
        out = run(sum_table, SUM, [fresh_var("L")], bound)
        counts.append(len(list(out)))
        assert out.bound_exhausted
    assert counts == sorted(counts)


# -- differential: symbolic evaluation of ground inputs agrees with ground execution ----

def symbolic_ground(table, fname, inputs, bound):
    out = []
    for b in run(table, fname, inputs, bound):
        check = b.store.check_sat()
        if check.status == UNSAT:
            continue
        out.append((b.error, b.result if b.error else check.ground(b.result)))
    return out


@pytest.mark.parametrize("path, fun", PROGRAMS)
def test_fixtures_agree_with_ground_execution(path, fun):
    table, fname = load(FIXTURES / path), parse_fun(fun)
    compared = 0
    for g in universe(2):
        try:
            want = concrete_run(table, fname, [g], 10)
        except OutOfFuel:
            continue
        assert symbolic_ground(table, fname, [g], 10) == [(want.raised, want.value)], g
        compared += 1
    assert compared > 200


def test_generated_programs_agree_with_ground_execution():
    compared = 0
    for mod in random_modules(200, seed=5):
        table = translate_module(mod)
        for f in mod.functions:
            if f.fname.arity > 2:
                continue
            for ins in itertools.islice(itertools.product(universe(1), repeat=f.fname.arity), 40):
                try:
                    want = concrete_run(table, f.fname, list(ins), 8)
                except OutOfFuel:
                    continue
                got = symbolic_ground(table, f.fname, list(ins), 8)
                assert got == [(want.raised, want.value)], (f.fname, ins)
                compared += 1
    assert compared > 3000
