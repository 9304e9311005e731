"""Ground execution: the reference semantics used to confirm answers.

Deliberately independent of the constraint store: values are ground terms,
evaluation is deterministic, and fuel counts function applications exactly
like the symbolic budget (the entry call is free).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .syntax import (
    Apply, Call, Case, ConsE, FunName, Let, Literal, PCons, PLit, PrimOp, PTuple,
    PVar, Try, TupleE, VarRef,
)
from .terms import ATOM, FALSE, FLOAT, INT, LIST, TRUE, Cons, ErrorVal, Lit, Tuple, term_is_ground
from .translator import FunTable, lookup_fun


@dataclass(frozen=True)
class RunResult:
    """Final value of a ground run; ``raised`` tells a crash from a caught error value."""

    value: object
    raised: bool = False

    @property
    def error(self) -> str | None:
        return self.value.name if self.raised else None


class OutOfFuel(Exception):
    """The fuel ran out before evaluation finished."""


class _Raise(Exception):
    def __init__(self, name: str):
        super().__init__(name)
        self.error = ErrorVal(name)


def match(pat, value, env: dict) -> dict | None:
    if isinstance(pat, PVar):
        out = dict(env)
        out[pat.name] = value
        return out
    if isinstance(pat, PLit):
        return env if same(pat.value, value) else None
    if isinstance(pat, PCons):
        if not isinstance(value, Cons):
            return None
        env = match(pat.head, value.head, env)
        return None if env is None else match(pat.tail, value.tail, env)
    if isinstance(pat, PTuple):
        if not isinstance(value, Tuple) or len(value.elems) != len(pat.elems):
            return None
        for p, v in zip(pat.elems, value.elems):
            env = match(p, v, env)
            if env is None:
                return None
        return env
    raise TypeError(pat)


def same(a, b) -> bool:
    """Exact term equality (``=:=``): ``1`` and ``1.0`` differ."""
    if isinstance(a, Lit) and isinstance(b, Lit):
        return a.tag == b.tag and type(a.value) is type(b.value) and a.value == b.value
    if isinstance(a, Cons) and isinstance(b, Cons):
        return same(a.head, b.head) and same(a.tail, b.tail)
    if isinstance(a, Tuple) and isinstance(b, Tuple):
        return len(a.elems) == len(b.elems) and all(same(x, y) for x, y in zip(a.elems, b.elems))
    return isinstance(a, ErrorVal) and a == b


def _num(v):
    if isinstance(v, Lit) and v.tag in (INT, FLOAT):
        return v.value
    raise _Raise("badarith")


def _boolean(v) -> bool:
    if same(v, TRUE):
        return True
    if same(v, FALSE):
        return False
    raise _Raise("badarg")


def _mk(x, is_int: bool) -> Lit:
    return Lit(INT, int(x)) if is_int else Lit(FLOAT, Fraction(x))


def builtin(name: str, args: list):
    """Apply an ``erlang`` builtin to ground values; raises ``_Raise`` on errors."""
    if name in ("+", "-", "*"):
        a, b = _num(args[0]), _num(args[1])
        is_int = args[0].tag == INT and args[1].tag == INT
        r = a + b if name == "+" else a - b if name == "-" else a * b
        return _mk(r, is_int)
    if name in ("div", "rem"):
        a, b = _num(args[0]), _num(args[1])
        if args[0].tag != INT or args[1].tag != INT or b == 0:
            raise _Raise("badarith")
        q = abs(a) // abs(b)
        if (a < 0) != (b < 0):
            q = -q
        return Lit(INT, q if name == "div" else a - q * b)
    if name in ("<", "=<", ">", ">="):
        a, b = args
        if not (isinstance(a, Lit) and a.tag in (INT, FLOAT) and isinstance(b, Lit) and b.tag in (INT, FLOAT)):
            raise _Raise("badarg")
        x, y = a.value, b.value
        r = {"<": x < y, "=<": x <= y, ">": x > y, ">=": x >= y}[name]
        return TRUE if r else FALSE
    if name in ("==", "=:="):
        return TRUE if same(*args) else FALSE
    if name in ("/=", "=/="):
        return FALSE if same(*args) else TRUE
    if name == "and":
        a, b = _boolean(args[0]), _boolean(args[1])
        return TRUE if a and b else FALSE
    if name == "or":
        a, b = _boolean(args[0]), _boolean(args[1])
        return TRUE if a or b else FALSE
    if name == "not":
        return FALSE if _boolean(args[0]) else TRUE
    v = args[0]
    tag = v.tag if isinstance(v, Lit) else None
    tests = {
        "is_integer": tag == INT,
        "is_float": tag == FLOAT,
        "is_number": tag in (INT, FLOAT),
        "is_atom": tag == ATOM,
        "is_boolean": same(v, TRUE) or same(v, FALSE),
        "is_list": tag == LIST or isinstance(v, Cons),
        "is_tuple": isinstance(v, Tuple),
    }
    if name not in tests:
        raise ValueError(f"unsupported builtin erlang:{name}")
    return TRUE if tests[name] else FALSE


class _Machine:
    def __init__(self, table: FunTable, fuel: int):
        self.table = table
        self.fuel = fuel
        self.applies = 0

    def eval(self, e, env: dict):
        if isinstance(e, Literal):
            return e.value
        if isinstance(e, VarRef):
            return env[e.name]
        if isinstance(e, ConsE):
            h = self.eval(e.head, env)
            return Cons(h, self.eval(e.tail, env))
        if isinstance(e, TupleE):
            return Tuple(tuple(self.eval(x, env) for x in e.elems))
        if isinstance(e, Let):
            v = self.eval(e.rhs, env)
            return self.eval(e.body, {**env, e.vars[0]: v})
        if isinstance(e, Case):
            v = self.eval(e.scrutinee, env)
            for c in e.clauses:
                inner = match(c.pattern, v, env)
                if inner is not None and self.guard(c.guard, inner):
                    return self.eval(c.body, inner)
            raise AssertionError("no clause matched although a catch-all is present")
        if isinstance(e, Apply):
            if self.fuel <= 0:
                raise OutOfFuel(str(e.fname))
            self.fuel -= 1
            self.applies += 1
            params, body = lookup_fun(self.table, e.fname)
            args = [self.eval(a, env) for a in e.args]
            return self.eval(body, dict(zip(params, args)))
        if isinstance(e, Call):
            args = [self.eval(a, env) for a in e.args]
            return builtin(e.fname, args)
        if isinstance(e, PrimOp):
            for a in e.args:
                self.eval(a, env)
            raise _Raise(e.name)
        if isinstance(e, Try):
            try:
                v = self.eval(e.body, env)
            except _Raise as err:
                return self.eval(e.handler, {**env, e.catch_var: err.error})
            return self.eval(e.ok_body, {**env, e.ok_var: v})
        raise TypeError(e)

    def guard(self, g, env: dict) -> bool:
        try:
            return same(self.eval(g, env), TRUE)
        except _Raise:
            return False


def concrete_run(table: FunTable, fname: FunName, inputs, fuel: int) -> RunResult:
    """Run ``fname`` on ground ``inputs``.

    Raises ``OutOfFuel`` when more than ``fuel`` nested applications are needed.
    """
    for t in inputs:
        if not term_is_ground(t):
            raise ValueError(f"input is not ground: {t!r}")
    params, body = lookup_fun(table, fname)
    if len(params) != len(inputs):
        raise ValueError(f"{fname} expects {len(params)} inputs, got {len(inputs)}")
    m = _Machine(table, fuel)
    try:
        return RunResult(m.eval(body, dict(zip(params, inputs))))
    except _Raise as err:
        return RunResult(err.error, True)
