"""Symbolic runtime values, environments and configurations.

Runtime values are immutable trees built from four constructors plus a
distinguished error value::

    Lit(tag, value)      atom / int / float / the empty list
    Cons(head, tail)     list cell
    Tuple(elems)         tuple of any arity
    Var(id)              logic variable
    ErrorVal(name)       the value of a crashed computation

The tag of a literal is one of ``atom``, ``int``, ``float``, ``list`` or a
logic variable of kind ``"tag"``; the payload is an atom name, an ``int``,
a ``Fraction`` (floats are exact rationals), the marker ``"nil"`` or a
variable of kind ``"val"``.  Every other variable has kind ``"term"``.
"""

from __future__ import annotations

import itertools
import os
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Union

ATOM = "atom"
INT = "int"
FLOAT = "float"
LIST = "list"
TAGS = (ATOM, INT, FLOAT, LIST)
NUMERIC_TAGS = (INT, FLOAT)
NIL_MARK = "nil"


@dataclass(frozen=True, eq=False)
class Var:
    id: int
    hint: str = "_"
    kind: str = "term"
    # for kind "val": the tag (constant or tag variable) of the enclosing literal
    owner: object = None

    # identity is the id alone; these sit on hot paths of the solver
    def __eq__(self, other) -> bool:
        return type(other) is Var and other.id == self.id

    def __hash__(self) -> int:
        return hash(self.id)

    def __repr__(self) -> str:
        return f"Var({self.hint}#{self.id})"


@dataclass(frozen=True)
class Lit:
    tag: Union[str, Var]
    value: object


@dataclass(frozen=True)
class Cons:
    head: "Term"
    tail: "Term"


@dataclass(frozen=True)
class Tuple:
    elems: tuple


@dataclass(frozen=True)
class ErrorVal:
    name: str


Term = Union[Lit, Cons, Tuple, Var, ErrorVal]

NIL = Lit(LIST, NIL_MARK)
TRUE = Lit(ATOM, "true")
FALSE = Lit(ATOM, "false")


def atom(name: str) -> Lit:
    return Lit(ATOM, name)


def integer(n: int) -> Lit:
    return Lit(INT, n)


def real(x) -> Lit:
    return Lit(FLOAT, Fraction(x))


def mklist(items, tail: Term = NIL) -> Term:
    out = tail
    for item in reversed(list(items)):
        out = Cons(item, out)
    return out


class _Counter:
    """Monotone id source shared by every fresh-variable request."""

    def __init__(self, start: int = 0) -> None:
        self._lock = threading.Lock()
        self._it = itertools.count(start)

    def next(self) -> int:
        with self._lock:
            return next(self._it)

    def reset(self, start: int) -> None:
        with self._lock:
            self._it = itertools.count(start)


_counter = _Counter(int(os.environ.get("SYMERL_SEED", "0") or 0))


def reset_fresh(start: int | None = None) -> None:
    """Restart fresh-variable numbering (defaults to ``$SYMERL_SEED`` or 0)."""
    if start is None:
        start = int(os.environ.get("SYMERL_SEED", "0") or 0)
    _counter.reset(start)


def fresh_var(hint: str = "_", kind: str = "term", owner=None) -> Var:
    return Var(_counter.next(), hint, kind, owner)


def fresh_val(tag, hint: str = "V") -> Var:
    return fresh_var(hint, "val", tag)


def fresh_lit(tag=None, hint: str = "V") -> Lit:
    """A literal whose payload is a fresh variable; ``lit(Type, V)`` when no tag is given."""
    if tag is None:
        tag = fresh_var("Type", "tag")
    if tag == LIST:
        return NIL
    return Lit(tag, fresh_val(tag, hint))


def term_vars(t: Term) -> Iterator[Var]:
    stack = [t]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            yield t
        elif isinstance(t, Lit):
            if isinstance(t.value, Var):
                stack.append(t.value)
            if isinstance(t.tag, Var):
                stack.append(t.tag)
        elif isinstance(t, Cons):
            stack.append(t.tail)
            stack.append(t.head)
        elif isinstance(t, Tuple):
            stack.extend(reversed(t.elems))


def term_is_ground(t: Term) -> bool:
    return next(term_vars(t), None) is None


def term_depth(t: Term) -> int:
    if isinstance(t, Cons):
        return 1 + max(term_depth(t.head), term_depth(t.tail))
    if isinstance(t, Tuple):
        return 1 + max((term_depth(e) for e in t.elems), default=0)
    return 1


def is_numeric_lit(t: Term) -> bool:
    return isinstance(t, Lit) and t.tag in NUMERIC_TAGS and not isinstance(t.value, Var)


def format_number(v) -> str:
    if not isinstance(v, Fraction):
        return str(v)
    if v.denominator == 1:
        return f"{v.numerator}.0"
    d, twos, fives = v.denominator, 0, 0
    while d % 2 == 0:
        d, twos = d // 2, twos + 1
    while d % 5 == 0:
        d, fives = d // 5, fives + 1
    if d != 1:
        return repr(float(v))
    places = max(twos, fives)
    scaled = abs(v.numerator) * 10**places // v.denominator
    sign = "-" if v < 0 else ""
    digits = str(scaled).rjust(places + 1, "0")
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def format_atom(name: str) -> str:
    if name and name[0].islower() and all(c.isalnum() or c in "_@" for c in name):
        return name
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


def format_term(t: Term, names: Mapping[int, str] | None = None) -> str:
    """Render a term in the fact notation, e.g. ``cons(lit(int,1),lit(list,nil))``."""
    names = names or {}

    def var(v: Var) -> str:
        return names.get(v.id) or f"_{v.hint.lstrip('@_') or 'G'}{v.id}"

    def go(t: Term) -> str:
        if isinstance(t, Var):
            return var(t)
        if isinstance(t, Lit):
            tag = var(t.tag) if isinstance(t.tag, Var) else t.tag
            if isinstance(t.value, Var):
                val = var(t.value)
            elif t.tag == ATOM:
                val = format_atom(t.value)
            else:
                val = format_number(t.value)
            return f"lit({tag},{val})"
        if isinstance(t, Cons):
            return f"cons({go(t.head)},{go(t.tail)})"
        if isinstance(t, Tuple):
            return "tuple([" + ",".join(go(e) for e in t.elems) + "])"
        if isinstance(t, ErrorVal):
            return f"error({format_atom(t.name)})"
        raise TypeError(f"not a term: {t!r}")

    return go(t)


@dataclass(frozen=True)
class Env:
    """Program-variable bindings plus the error flag threaded through evaluation."""

    bindings: Mapping[str, Term] = field(default_factory=dict)
    error: bool = False

    def lookup(self, name: str) -> Term:
        try:
            return self.bindings[name]
        except KeyError:
            raise LookupError(f"unbound program variable {name}") from None

    def bind(self, name: str, value: Term) -> "Env":
        new = dict(self.bindings)
        new[name] = value
        return Env(new, self.error)

    def bind_many(self, pairs) -> "Env":
        new = dict(self.bindings)
        new.update(pairs)
        return Env(new, self.error)

    def with_error(self, flag: bool) -> "Env":
        if flag == self.error:
            return self
        return Env(self.bindings, flag)


def env_bind(env: Env, name: str, value: Term) -> Env:
    return env.bind(name, value)


def set_error_flag(env: Env, flag: bool) -> Env:
    return env.with_error(flag)


def get_error_flag(env: Env) -> bool:
    return env.error


@dataclass(frozen=True)
class Config:
    env: Env
    expr: object
