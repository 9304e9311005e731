from __future__ import annotations

from fractions import Fraction

import pytest

from oracles import FIXTURES
from symerl.concrete import OutOfFuel, builtin, concrete_run, same
from symerl.driver import load
from symerl.syntax import FunName
from symerl.terms import ATOM, FALSE, FLOAT, INT, NIL, TRUE, ErrorVal, Lit, Tuple, mklist

SUM = FunName("sum", 1)


def ints(*xs):
    return mklist([Lit(INT, x) for x in xs])


@pytest.fixture(scope="module")
def sum_table():
    return load(FIXTURES / "sum_list.cerl-min")


def test_sum_values(sum_table):
    assert concrete_run(sum_table, SUM, [NIL], 5).value == Lit(INT, 0)
    out = concrete_run(sum_table, SUM, [ints(1, 2, 3)], 5)
    assert out.value == Lit(INT, 6) and not out.raised


def test_sum_errors(sum_table):
    out = concrete_run(sum_table, SUM, [Lit(ATOM, "a")], 5)
    assert out.raised and out.error == "match_fail"
    out = concrete_run(sum_table, SUM, [mklist([Lit(ATOM, "a")])], 5)
    assert out.error == "badarith"


def test_fuel_counts_applications(sum_table):
    # sum of a 3-element list makes 3 recursive applications; the entry call is free
    assert concrete_run(sum_table, SUM, [ints(1, 2, 3)], 3).value == Lit(INT, 6)
    with pytest.raises(OutOfFuel):
        concrete_run(sum_table, SUM, [ints(1, 2, 3)], 2)


def test_rejects_open_inputs(sum_table):
    from symerl.terms import fresh_var
    with pytest.raises(ValueError):
        concrete_run(sum_table, SUM, [fresh_var("X")], 5)
    with pytest.raises(ValueError):
        concrete_run(sum_table, SUM, [], 5)


@pytest.mark.parametrize("name, args, want", [
    ("+", [Lit(INT, 1), Lit(INT, 2)], Lit(INT, 3)),
    ("+", [Lit(INT, 1), Lit(FLOAT, Fraction(1, 2))], Lit(FLOAT, Fraction(3, 2))),
    ("*", [Lit(INT, -2), Lit(INT, 3)], Lit(INT, -6)),
    ("div", [Lit(INT, -7), Lit(INT, 2)], Lit(INT, -3)),
    ("rem", [Lit(INT, -7), Lit(INT, 2)], Lit(INT, -1)),
    ("<", [Lit(INT, 1), Lit(FLOAT, Fraction(3, 2))], TRUE),
    ("=:=", [Lit(INT, 1), Lit(FLOAT, Fraction(1))], FALSE),
    ("and", [TRUE, FALSE], FALSE),
    ("not", [FALSE], TRUE),
    ("is_list", [NIL], TRUE),
    ("is_tuple", [Tuple(())], TRUE),
    ("is_boolean", [Lit(ATOM, "a")], FALSE),
])
def test_builtins(name, args, want):
    assert same(builtin(name, args), want)


@pytest.mark.parametrize("name, args, err", [
    ("+", [Lit(ATOM, "a"), Lit(INT, 1)], "badarith"),
    ("div", [Lit(INT, 1), Lit(INT, 0)], "badarith"),
    ("div", [Lit(FLOAT, Fraction(1)), Lit(INT, 1)], "badarith"),
    ("<", [NIL, Lit(INT, 1)], "badarg"),
    ("and", [Lit(INT, 1), TRUE], "badarg"),
])
def test_builtin_errors(name, args, err):
    from symerl.concrete import _Raise
    with pytest.raises(_Raise) as info:
        builtin(name, args)
    assert info.value.error == ErrorVal(err)


def test_try_turns_errors_into_data():
    table = load("module m = f/1 = fun (X) -> try call 'erlang':'+' (X, 1) of Y -> Y catch E -> E end",
                 is_text=True)
    out = concrete_run(table, FunName("f", 1), [Lit(ATOM, "a")], 5)
    assert out.value == ErrorVal("badarith") and not out.raised and out.error is None


def test_guard_errors_fall_through():
    src = ("module m = f/1 = fun (X) -> case X of Y when call 'erlang':'>' (call 'erlang':'+' (Y, 1), 0)"
           " -> 'pos' ; Z when 'true' -> 'other' end end")
    table = load(src, is_text=True)
    assert concrete_run(table, FunName("f", 1), [Lit(ATOM, "a")], 5).value == Lit(ATOM, "other")
    assert concrete_run(table, FunName("f", 1), [Lit(INT, 3)], 5).value == Lit(ATOM, "pos")
