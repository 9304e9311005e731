"""Bounded, nondeterministic symbolic evaluation.

``Interpreter.eval`` maps an expression, an environment, a constraint store
and a step budget to a lazy stream of ``Branch`` values, one per feasible
execution path.  A branch whose result is an ``ErrorVal`` has its error flag
set; errors propagate outwards until a ``try`` handler clears the flag.

Only function applications consume budget.  When an application is reached
with no budget left the path is cut and ``Outcome.bound_exhausted`` is set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .linarith import LinCon, UNSAT
from .store import ConstraintStore
from .syntax import (
    Apply, Call, Case, ConsE, FunName, Let, Literal, PCons, PLit, PrimOp, PTuple,
    PVar, Try, TupleE, VarRef,
)
from .terms import (
    ATOM, FALSE, FLOAT, INT, LIST, TRUE, Cons, Env, ErrorVal, Lit, Tuple,
    Var, fresh_lit, fresh_val, fresh_var,
)
from .translator import FunTable, lookup_fun

BADARITH = ErrorVal("badarith")
BADARG = ErrorVal("badarg")
MATCH_FAIL = ErrorVal("match_fail")


@dataclass(frozen=True)
class Branch:
    store: ConstraintStore
    env: Env
    result: object
    steps: int

    @property
    def error(self) -> bool:
        # the flag, not the result: a caught error bound by ``try`` is ordinary data
        return self.env.error


@dataclass
class Outcome:
    """Lazily produced branches plus whether any path hit the step bound."""

    branches: Iterator[Branch]
    interp: "Interpreter" = field(repr=False, default=None)

    def __iter__(self):
        return iter(self.branches)

    @property
    def bound_exhausted(self) -> bool:
        return self.interp.cut


def pattern_term(p, names: dict):
    """Instantiate a pattern with fresh variables; ``names`` receives name -> var."""
    if isinstance(p, PVar):
        v = fresh_var(p.name)
        names[p.name] = v
        return v
    if isinstance(p, PLit):
        return p.value
    if isinstance(p, PCons):
        return Cons(pattern_term(p.head, names), pattern_term(p.tail, names))
    if isinstance(p, PTuple):
        return Tuple(tuple(pattern_term(e, names) for e in p.elems))
    raise TypeError(f"not a pattern: {p!r}")


# -- value classification ---------------------------------------------------------

def split_lit(s: ConstraintStore, x):
    """Yield ``(store, lit)`` where ``x`` is a literal and ``(store, None)`` where it is not."""
    x = s.walk(x)
    if isinstance(x, Lit):
        yield s, x
    elif isinstance(x, Var):
        lit = fresh_lit()
        s1 = s.unify(x, lit)
        if s1 is not None:
            yield s1, lit
        t, v = fresh_var("Type", "tag"), None
        v = fresh_val(t)
        s2 = s.add_not_match(x, Lit(t, v), [t, v])
        if s2 is not None:
            yield s2, None
    else:
        yield s, None


def split_tags(s: ConstraintStore, lit: Lit, tags):
    """Yield ``(store, True)`` where the tag of ``lit`` is in ``tags``, else ``(store, False)``."""
    tag = s.walk(lit.tag)
    if isinstance(tag, str):
        yield s, tag in tags
        return
    inside = s
    for t in (t for t in (ATOM, INT, FLOAT, LIST) if t not in tags):
        inside = inside.add_tag_constraint(tag, t, False) if inside is not None else None
    if inside is not None:
        yield inside, True
    outside = s
    for t in tags:
        outside = outside.add_tag_constraint(tag, t, False) if outside is not None else None
    if outside is not None:
        yield outside, False


def split_numeric(s: ConstraintStore, x):
    """Yield ``(store, lit)`` for numeric ``x`` and ``(store, None)`` otherwise."""
    for s1, lit in split_lit(s, x):
        if lit is None:
            yield s1, None
            continue
        for s2, ok in split_tags(s1, lit, (INT, FLOAT)):
            yield s2, (lit if ok else None)


def split_eq(s: ConstraintStore, a, b):
    """Yield ``(store, True)`` where ``a`` equals ``b`` and ``(store, False)`` where not."""
    s1 = s.unify(a, b)
    if s1 is not None:
        yield s1, True
    s2 = s.add_not_match(a, b)
    if s2 is not None:
        yield s2, False


def split_bool(s: ConstraintStore, x):
    """Yield ``(store, True|False|None)``; ``None`` when ``x`` is not a boolean."""
    s1 = s.unify(x, TRUE)
    if s1 is not None:
        yield s1, True
    s2 = s.unify(x, FALSE)
    if s2 is not None:
        yield s2, False
    s3 = s.add_not_match(x, TRUE)
    s3 = s3.add_not_match(x, FALSE) if s3 is not None else None
    if s3 is not None:
        yield s3, None


def _linear(s: ConstraintStore, lit: Lit) -> tuple[dict, Fraction]:
    v = s.walk(lit.value)
    if isinstance(v, Var):
        return {v: Fraction(1)}, Fraction(0)
    return {}, Fraction(v)


def _combine(a, b, k: int = 1):
    coeffs = dict(a[0])
    for v, c in b[0].items():
        coeffs[v] = coeffs.get(v, 0) + k * c
    return coeffs, a[1] + k * b[1]


def _bool(flag: bool) -> Lit:
    return TRUE if flag else FALSE


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


# -- the evaluator ------------------------------------------------------------------

class Interpreter:
    def __init__(self, table: FunTable, check_cuts: bool = True):
        self.table = table
        self.cut = False
        self.check_cuts = check_cuts

    # the whole-function entry point is ``run`` below; ``eval`` is per expression
    def eval(self, e, env: Env, s: ConstraintStore, steps: int) -> Iterator[Branch]:
        if env.error:
            raise ValueError("evaluation started in an error configuration")
        if isinstance(e, Literal):
            yield Branch(s, env, e.value, steps)
        elif isinstance(e, VarRef):
            yield Branch(s, env, env.lookup(e.name), steps)
        elif isinstance(e, ConsE):
            for b in self.eval_list((e.head, e.tail), env, s, steps):
                yield b if b.error else Branch(b.store, env, Cons(*b.result), b.steps)
        elif isinstance(e, TupleE):
            for b in self.eval_list(e.elems, env, s, steps):
                yield b if b.error else Branch(b.store, env, Tuple(tuple(b.result)), b.steps)
        elif isinstance(e, Let):
            yield from self.eval_let(e, env, s, steps)
        elif isinstance(e, Case):
            for b in self.eval(e.scrutinee, env, s, steps):
                if b.error:
                    yield b
                else:
                    yield from self.eval_case(b.result, e.clauses, env, b.store, b.steps)
        elif isinstance(e, Apply):
            yield from self.eval_apply(e.fname, e.args, env, s, steps)
        elif isinstance(e, Call):
            for b in self.eval_list(e.args, env, s, steps):
                if b.error:
                    yield b
                else:
                    for s2, v in self.eval_call(e.fname, b.result, b.store):
                        yield Branch(s2, env.with_error(isinstance(v, ErrorVal)), v, b.steps)
        elif isinstance(e, PrimOp):
            for b in self.eval_list(e.args, env, s, steps):
                if b.error:
                    yield b
                else:
                    yield Branch(b.store, env.with_error(True), self.eval_primop(e.name, b.result), b.steps)
        elif isinstance(e, Try):
            yield from self.eval_try(e, env, s, steps)
        else:
            raise TypeError(f"not an expression: {e!r}")

    def eval_list(self, exprs, env: Env, s: ConstraintStore, steps: int) -> Iterator[Branch]:
        """Left to right; the first error aborts the rest.  Results are lists."""
        if not exprs:
            yield Branch(s, env, [], steps)
            return
        for b in self.eval(exprs[0], env, s, steps):
            if b.error:
                yield b
                continue
            for rest in self.eval_list(exprs[1:], env, b.store, b.steps):
                if rest.error:
                    yield rest
                else:
                    yield Branch(rest.store, env, [b.result] + rest.result, rest.steps)

    def eval_let(self, e: Let, env: Env, s: ConstraintStore, steps: int) -> Iterator[Branch]:
        for b in self.eval(e.rhs, env, s, steps):
            if b.error:
                yield b
            else:
                yield from self.eval(e.body, env.bind(e.vars[0], b.result), b.store, b.steps)

    def eval_apply(self, fname: FunName, args, env: Env, s: ConstraintStore, steps: int):
        if steps <= 0:
            self._record_cut(s)
            return
        params, body = lookup_fun(self.table, fname)
        for b in self.eval_list(args, env, s, steps - 1):
            if b.error:
                yield b
                continue
            callee = Env(dict(zip(params, b.result)), False)
            for r in self.eval(body, callee, b.store, b.steps):
                yield Branch(r.store, env.with_error(r.error), r.result, r.steps)

    def _record_cut(self, s: ConstraintStore):
        if self.cut:
            return
        if not self.check_cuts or s.check_sat().status != UNSAT:
            self.cut = True

    def eval_case(self, value, clauses, env: Env, s: ConstraintStore, steps: int):
        if not clauses:
            raise ValueError("case without clauses (the translator appends a catch-all)")
        clause, rest = clauses[0], clauses[1:]
        names: dict = {}
        pat = pattern_term(clause.pattern, names)
        fallthrough = []
        matched = s.unify(value, pat)
        if matched is not None:
            inner = env.bind_many(names)
            for g in self.eval(clause.guard, inner, matched, steps):
                for s2, ok in self._guard_truth(g):
                    if ok:
                        yield from self.eval(clause.body, inner, s2, g.steps)
                    else:
                        fallthrough.append(s2)
        miss = s.add_not_match(value, pat, names.values())
        if miss is not None:
            fallthrough.insert(0, miss)
        if not rest:
            return
        for s2 in fallthrough:
            yield from self.eval_case(value, rest, env, s2, steps)

    def _guard_truth(self, g: Branch):
        """Guards are pure: an error or a non-``true`` value means fall through."""
        if g.error:
            yield g.store, False
            return
        v = g.store.walk(g.result)
        if v == TRUE:
            yield g.store, True
        elif isinstance(v, Var):
            yield from split_eq(g.store, v, TRUE)
        else:
            yield g.store, False

    def eval_try(self, e: Try, env: Env, s: ConstraintStore, steps: int):
        for b in self.eval(e.body, env, s, steps):
            if b.error:
                handler_env = env.with_error(False).bind(e.catch_var, b.result)
                yield from self.eval(e.handler, handler_env, b.store, b.steps)
            else:
                yield from self.eval(e.ok_body, env.bind(e.ok_var, b.result), b.store, b.steps)

    def eval_primop(self, name: str, args) -> ErrorVal:
        if name != "match_fail":
            raise ValueError(f"unsupported primop {name!r}")
        return MATCH_FAIL

    # -- builtins -------------------------------------------------------------

    def eval_call(self, name: str, args: list, s: ConstraintStore):
        """Yield ``(store, value)`` pairs for ``erlang:name(args)``."""
        if name in ("+", "-", "*"):
            yield from self._arith(name, args, s)
        elif name in ("div", "rem"):
            yield from self._intdiv(name, args, s)
        elif name in ("<", "=<", ">", ">="):
            yield from self._compare(name, args, s)
        elif name in ("==", "=:="):
            for s2, eq in split_eq(s, args[0], args[1]):
                yield s2, _bool(eq)
        elif name in ("/=", "=/="):
            for s2, eq in split_eq(s, args[0], args[1]):
                yield s2, _bool(not eq)
        elif name in ("and", "or"):
            for s1, a in split_bool(s, args[0]):
                if a is None:
                    yield s1, BADARG
                    continue
                for s2, b in split_bool(s1, args[1]):
                    if b is None:
                        yield s2, BADARG
                    else:
                        yield s2, _bool((a and b) if name == "and" else (a or b))
        elif name == "not":
            for s1, a in split_bool(s, args[0]):
                yield s1, (BADARG if a is None else _bool(not a))
        elif name.startswith("is_"):
            yield from self._type_test(name, args[0], s)
        else:
            raise ValueError(f"unsupported builtin erlang:{name}/{len(args)}")

    def _numeric_pair(self, args, s):
        """Yield ``(store, a_lit, b_lit)``; ``a_lit`` is ``None`` on badarith."""
        for s1, a in split_numeric(s, args[0]):
            if a is None:
                yield s1, None, None
                continue
            for s2, b in split_numeric(s1, args[1]):
                yield s2, a, b

    def _arith(self, op: str, args, s: ConstraintStore):
        for s1, a, b in self._numeric_pair(args, s):
            if a is None or b is None:
                yield s1, BADARITH
                continue
            av, bv = s1.walk(a.value), s1.walk(b.value)
            at, bt = s1.walk(a.tag), s1.walk(b.tag)
            if isinstance(at, str) and isinstance(bt, str) and not isinstance(av, Var) \
                    and not isinstance(bv, Var):
                yield s1, _ground_arith(op, at, av, bt, bv)
                continue
            if isinstance(at, str) and isinstance(bt, str):
                tag = INT if at == bt == INT else FLOAT
                s2 = s1
            else:
                tag = fresh_var("Type", "tag")
                s2 = s1.add_tag_constraint(tag, ATOM, False)
                s2 = s2.add_tag_constraint(tag, LIST, False) if s2 is not None else None
                s2 = s2.add_join(tag, (at, bt)) if s2 is not None else None
                if s2 is None:
                    continue
            r = fresh_val(tag, "N")
            la, lb = _linear(s2, a), _linear(s2, b)
            if op == "*":
                if la[0] and lb[0]:
                    # product of two unknowns: result left unconstrained
                    yield s2, Lit(tag, r)
                    continue
                k, other = (la[1], lb) if not la[0] else (lb[1], la)
                form = ({v: k * c for v, c in other[0].items()}, k * other[1])
            else:
                form = _combine(la, lb, 1 if op == "+" else -1)
            coeffs = {v: -c for v, c in form[0].items()}
            coeffs[r] = coeffs.get(r, 0) + 1
            s3 = s2.add_lin(LinCon.make(coeffs, "=", form[1]))
            if s3 is not None:
                yield s3, Lit(tag, r)

    def _intdiv(self, op: str, args, s: ConstraintStore):
        for s1, a, b in self._numeric_pair(args, s):
            if a is None or b is None:
                yield s1, BADARITH
                continue
            for s2, a_int in split_tags(s1, a, (INT,)):
                if not a_int:
                    yield s2, BADARITH
                    continue
                for s3, b_int in split_tags(s2, b, (INT,)):
                    if not b_int:
                        yield s3, BADARITH
                        continue
                    yield from self._intdiv_ints(op, a, b, s3)

    def _intdiv_ints(self, op: str, a: Lit, b: Lit, s: ConstraintStore):
        av, bv = s.walk(a.value), s.walk(b.value)
        if isinstance(bv, Var):
            zero = s.unify(bv, 0)
            if zero is not None:
                yield zero, BADARITH
            nonzero = s.add_lin(LinCon.make({bv: 1}, "!=", 0))
            if nonzero is None:
                return
            bv2 = nonzero.walk(bv)
            if isinstance(bv2, Var):
                # nonlinear: the quotient/remainder is left unconstrained
                yield nonzero, Lit(INT, fresh_val(INT, "N"))
                return
            s, bv = nonzero, bv2
        if bv == 0:
            yield s, BADARITH
            return
        if not isinstance(av, Var):
            q = _trunc_div(av, bv)
            yield s, Lit(INT, q if op == "div" else av - q * bv)
            return
        # av = bv*q + r with truncation toward zero; the remainder takes the dividend's sign
        q, r = fresh_val(INT, "Q"), fresh_val(INT, "R")
        m = abs(bv) - 1
        for sign in (1, -1):
            s2 = s.add_lin(LinCon.make({av: 1, q: -bv, r: -1}, "=", 0))
            if sign > 0:
                cons = [LinCon.make({av: -1}, "<=", 0), LinCon.make({r: -1}, "<=", 0),
                        LinCon.make({r: 1}, "<=", m)]
            else:
                cons = [LinCon.make({av: 1}, "<", 0), LinCon.make({r: 1}, "<=", 0),
                        LinCon.make({r: -1}, "<=", m)]
            for c in cons:
                s2 = s2.add_lin(c) if s2 is not None else None
            if s2 is not None:
                yield s2, Lit(INT, q if op == "div" else r)

    def _compare(self, op: str, args, s: ConstraintStore):
        for s1, a, b in self._numeric_pair(args, s):
            if a is None or b is None:
                yield s1, BADARG
                continue
            if op in (">", ">="):
                a, b = b, a
                op = "<" if op == ">" else "=<"
            diff = _combine(_linear(s1, a), _linear(s1, b), -1)  # a - b
            strict = op == "<"
            if not diff[0]:
                yield s1, _bool(diff[1] < 0 if strict else diff[1] <= 0)
                continue
            neg = {v: -c for v, c in diff[0].items()}
            yes = LinCon.make(diff[0], "<" if strict else "<=", -diff[1])
            no = LinCon.make(neg, "<=" if strict else "<", diff[1])
            for con, val in ((yes, TRUE), (no, FALSE)):
                s2 = s1.add_lin(con)
                if s2 is not None:
                    yield s2, val

    def _type_test(self, name: str, x, s: ConstraintStore):
        if name in ("is_integer", "is_float", "is_number", "is_atom"):
            tags = {"is_integer": (INT,), "is_float": (FLOAT,), "is_number": (INT, FLOAT),
                    "is_atom": (ATOM,)}[name]
            for s1, lit in split_lit(s, x):
                if lit is None:
                    yield s1, FALSE
                    continue
                for s2, ok in split_tags(s1, lit, tags):
                    yield s2, _bool(ok)
        elif name == "is_boolean":
            for s1, b in split_bool(s, x):
                yield s1, _bool(b is not None)
        elif name == "is_list":
            for s1, lit in split_lit(s, x):
                if lit is not None:
                    for s2, ok in split_tags(s1, lit, (LIST,)):
                        yield s2, _bool(ok)
                    continue
                h, t = fresh_var("H"), fresh_var("T")
                yes = s1.unify(x, Cons(h, t))
                if yes is not None:
                    yield yes, TRUE
                no = s1.add_not_match(x, Cons(h, t), [h, t])
                if no is not None:
                    yield no, FALSE
        elif name == "is_tuple":
            for s1, lit in split_lit(s, x):
                if lit is not None:
                    yield s1, FALSE
                    continue
                h, t = fresh_var("H"), fresh_var("T")
                cons = s1.unify(x, Cons(h, t))
                if cons is not None:
                    yield cons, FALSE
                # neither a literal nor a list cell: the only values left are tuples
                other = s1.add_not_match(x, Cons(h, t), [h, t])
                if other is not None:
                    yield other, TRUE
        else:
            raise ValueError(f"unsupported type test {name}")


def _ground_arith(op: str, at: str, av, bt: str, bv) -> Lit:
    if op == "+":
        r = av + bv
    elif op == "-":
        r = av - bv
    else:
        r = av * bv
    if at == bt == INT:
        return Lit(INT, int(r))
    return Lit(FLOAT, Fraction(r))


def run(table: FunTable, fname: FunName, inputs, bound: int,
        store: ConstraintStore | None = None, check_cuts: bool = True) -> Outcome:
    """Evaluate ``fname`` on ``inputs``; the entry call itself is free.

    The outcome carries every branch (values and errors); callers filter.
    """
    params, body = lookup_fun(table, fname)
    if len(params) != len(inputs):
        raise ValueError(f"{fname} expects {len(params)} inputs, got {len(inputs)}")
    interp = Interpreter(table, check_cuts)
    env = Env(dict(zip(params, inputs)), False)
    s = store if store is not None else ConstraintStore()
    return Outcome(interp.eval(body, env, s, bound), interp)
