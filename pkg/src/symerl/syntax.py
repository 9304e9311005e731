"""Abstract syntax of the first-order Core Erlang subset."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .terms import Lit, TRUE


@dataclass(frozen=True)
class FunName:
    name: str
    arity: int

    def __str__(self) -> str:
        return f"{self.name}/{self.arity}"


# -- expressions ------------------------------------------------------------

@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class Literal:
    value: Lit


@dataclass(frozen=True)
class ConsE:
    head: "Expr"
    tail: "Expr"


@dataclass(frozen=True)
class TupleE:
    elems: tuple


@dataclass(frozen=True)
class Let:
    vars: tuple
    rhs: "Expr"
    body: "Expr"


@dataclass(frozen=True)
class Case:
    scrutinee: "Expr"
    clauses: tuple


@dataclass(frozen=True)
class Apply:
    fname: FunName
    args: tuple


@dataclass(frozen=True)
class Call:
    module: str
    fname: str
    args: tuple


@dataclass(frozen=True)
class PrimOp:
    name: str
    args: tuple


@dataclass(frozen=True)
class Try:
    body: "Expr"
    ok_var: str
    ok_body: "Expr"
    catch_var: str
    handler: "Expr"


Expr = Union[VarRef, Literal, ConsE, TupleE, Let, Case, Apply, Call, PrimOp, Try]


# -- patterns ---------------------------------------------------------------

@dataclass(frozen=True)
class PVar:
    name: str


@dataclass(frozen=True)
class PLit:
    value: Lit


@dataclass(frozen=True)
class PCons:
    head: "Pattern"
    tail: "Pattern"


@dataclass(frozen=True)
class PTuple:
    elems: tuple


Pattern = Union[PVar, PLit, PCons, PTuple]


@dataclass(frozen=True)
class Clause:
    pattern: Pattern
    guard: Expr = field(default=Literal(TRUE))
    body: Expr = field(default=Literal(TRUE))


@dataclass(frozen=True)
class FunDef:
    fname: FunName
    params: tuple
    body: Expr
    # source-level parameter names, kept for display after renaming
    param_hints: tuple = ()


@dataclass(frozen=True)
class SourceModule:
    name: str
    exports: tuple
    functions: tuple  # of FunDef

    def function(self, fname: FunName) -> FunDef:
        for f in self.functions:
            if f.fname == fname:
                return f
        raise KeyError(str(fname))


def pattern_vars(p: Pattern) -> list[str]:
    if isinstance(p, PVar):
        return [p.name]
    if isinstance(p, PCons):
        return pattern_vars(p.head) + pattern_vars(p.tail)
    if isinstance(p, PTuple):
        return [v for e in p.elems for v in pattern_vars(e)]
    return []


def subexprs(e: Expr):
    """Yield ``e`` and every expression nested in it (pre-order)."""
    stack = [e]
    while stack:
        e = stack.pop()
        yield e
        if isinstance(e, ConsE):
            stack += [e.tail, e.head]
        elif isinstance(e, (TupleE,)):
            stack += reversed(e.elems)
        elif isinstance(e, (Apply, Call, PrimOp)):
            stack += reversed(e.args)
        elif isinstance(e, Let):
            stack += [e.body, e.rhs]
        elif isinstance(e, Case):
            for c in reversed(e.clauses):
                stack += [c.body, c.guard]
            stack.append(e.scrutinee)
        elif isinstance(e, Try):
            stack += [e.handler, e.ok_body, e.body]


def free_vars(e: Expr, bound: frozenset = frozenset()) -> list[tuple[str, Expr]]:
    """Unbound variable references in ``e`` as (name, node) pairs."""
    out: list[tuple[str, Expr]] = []

    def go(e, bound):
        if isinstance(e, VarRef):
            if e.name not in bound:
                out.append((e.name, e))
        elif isinstance(e, Literal):
            pass
        elif isinstance(e, ConsE):
            go(e.head, bound)
            go(e.tail, bound)
        elif isinstance(e, TupleE):
            for x in e.elems:
                go(x, bound)
        elif isinstance(e, (Apply, Call, PrimOp)):
            for x in e.args:
                go(x, bound)
        elif isinstance(e, Let):
            go(e.rhs, bound)
            go(e.body, bound | set(e.vars))
        elif isinstance(e, Case):
            go(e.scrutinee, bound)
            for c in e.clauses:
                inner = bound | set(pattern_vars(c.pattern))
                go(c.guard, inner)
                go(c.body, inner)
        elif isinstance(e, Try):
            go(e.body, bound)
            go(e.ok_body, bound | {e.ok_var})
            go(e.handler, bound | {e.catch_var})

    go(e, bound)
    return out
