"""From a parsed module to the executable function table.

Translation renames every function's parameters to compiler-style names
(``@c0``, ``@c1``, ...), appends a catch-all clause raising ``match_fail`` to
every case expression and rejects programs outside the supported subset.
"""

from __future__ import annotations

from dataclasses import dataclass

from .frontend import Diagnostic, ParseError
from .syntax import (
    Apply, Call, Case, Clause, ConsE, FunDef, FunName, Let, Literal, PVar,
    PrimOp, SourceModule, Try, TupleE, VarRef, pattern_vars, subexprs,
)
from .terms import ATOM, TRUE, Lit, format_atom, format_number

ARITH = {"+": 2, "-": 2, "*": 2, "div": 2, "rem": 2}
COMPARE = {"<": 2, "=<": 2, ">": 2, ">=": 2}
EQUALITY = {"==": 2, "/=": 2, "=:=": 2, "=/=": 2}
BOOLEAN = {"and": 2, "or": 2, "not": 1}
TYPE_TESTS = {"is_integer": 1, "is_float": 1, "is_number": 1, "is_atom": 1,
              "is_list": 1, "is_tuple": 1, "is_boolean": 1}
BUILTINS = {**ARITH, **COMPARE, **EQUALITY, **BOOLEAN, **TYPE_TESTS}
PRIMOPS = {"match_fail"}


class TranslationError(ParseError):
    pass


class FunctionNotFound(KeyError):
    pass


@dataclass(frozen=True)
class FunTable:
    module: str
    functions: dict  # FunName -> FunDef

    def __contains__(self, fname: FunName) -> bool:
        return fname in self.functions


def lookup_fun(table: FunTable, fname: FunName) -> tuple[tuple, object]:
    try:
        f = table.functions[fname]
    except KeyError:
        raise FunctionNotFound(f"function {fname} is not defined in module {table.module}") from None
    return f.params, f.body


def insert_catchall(case: Case, var: str = "@c") -> Case:
    """Append ``V when 'true' -> primop 'match_fail'({'case_clause', V})``."""
    fallback = Clause(
        PVar(var),
        Literal(TRUE),
        PrimOp("match_fail", (TupleE((Literal(Lit(ATOM, "case_clause")), VarRef(var))),)),
    )
    return Case(case.scrutinee, case.clauses + (fallback,))


class _Translator:
    def __init__(self, mod: SourceModule):
        self.mod = mod
        self.names = {f.fname for f in mod.functions}
        self.diags: list[str] = []
        self.counter = 0

    def gensym(self) -> str:
        name = f"@c{self.counter}"
        self.counter += 1
        return name

    def error(self, msg: str):
        self.diags.append(msg)

    def function(self, f: FunDef) -> FunDef:
        self.counter = 0
        self.where = f.fname
        renaming = {}
        for p in f.params:
            renaming[p] = self.gensym()
        body = self.expr(f.body, renaming)
        return FunDef(f.fname, tuple(renaming[p] for p in f.params), body, f.params)

    def expr(self, e, ren: dict):
        if isinstance(e, VarRef):
            return VarRef(ren.get(e.name, e.name))
        if isinstance(e, Literal):
            return e
        if isinstance(e, ConsE):
            return ConsE(self.expr(e.head, ren), self.expr(e.tail, ren))
        if isinstance(e, TupleE):
            return TupleE(tuple(self.expr(x, ren) for x in e.elems))
        if isinstance(e, Let):
            if len(e.vars) != 1:
                self.error(f"let binds {len(e.vars)} variables but its value has arity 1 in {self.where}")
            rhs = self.expr(e.rhs, ren)
            inner = {k: v for k, v in ren.items() if k not in e.vars}
            return Let(e.vars, rhs, self.expr(e.body, inner))
        if isinstance(e, Case):
            clauses = []
            for c in e.clauses:
                names = pattern_vars(c.pattern)
                if len(set(names)) != len(names):
                    dup = sorted({n for n in names if names.count(n) > 1})
                    self.error(f"non-linear pattern (repeated {', '.join(dup)}) in {self.where}")
                inner = {k: v for k, v in ren.items() if k not in names}
                self.check_guard(c.guard)
                clauses.append(Clause(c.pattern, self.expr(c.guard, inner), self.expr(c.body, inner)))
            case = Case(self.expr(e.scrutinee, ren), tuple(clauses))
            return insert_catchall(case, self.gensym())
        if isinstance(e, Apply):
            if e.fname not in self.names:
                self.error(f"unresolved function {e.fname}")
            if len(e.args) != e.fname.arity:
                self.error(f"apply of {e.fname} with {len(e.args)} arguments")
            return Apply(e.fname, tuple(self.expr(a, ren) for a in e.args))
        if isinstance(e, Call):
            if e.module != "erlang":
                self.error(f"call to module '{e.module}' is not supported (only 'erlang')")
            elif BUILTINS.get(e.fname) != len(e.args):
                self.error(f"unsupported builtin erlang:{e.fname}/{len(e.args)}")
            return Call(e.module, e.fname, tuple(self.expr(a, ren) for a in e.args))
        if isinstance(e, PrimOp):
            if e.name not in PRIMOPS:
                self.error(f"unsupported primop '{e.name}'")
            return PrimOp(e.name, tuple(self.expr(a, ren) for a in e.args))
        if isinstance(e, Try):
            body = self.expr(e.body, ren)
            ok = self.expr(e.ok_body, {k: v for k, v in ren.items() if k != e.ok_var})
            handler = self.expr(e.handler, {k: v for k, v in ren.items() if k != e.catch_var})
            return Try(body, e.ok_var, ok, e.catch_var, handler)
        raise TypeError(f"not an expression: {e!r}")

    def check_guard(self, g):
        for sub in subexprs(g):
            if isinstance(sub, (Apply, Let, Case, Try, PrimOp)):
                kind = type(sub).__name__.lower()
                self.error(f"{kind} is not allowed in a guard in {self.where}")
                return


def translate_module(mod: SourceModule) -> FunTable:
    """Build the function table; raises ``TranslationError`` on rejected programs."""
    tr = _Translator(mod)
    table = {f.fname: tr.function(f) for f in mod.functions}
    if tr.diags:
        raise TranslationError([Diagnostic("error", 1, 1, m) for m in tr.diags])
    return FunTable(mod.name, table)


# -- fact dump ------------------------------------------------------------------

def _fact_lit(v: Lit) -> str:
    if v.tag == ATOM:
        return f"lit(atom,{_qa(v.value)})"
    if v.tag == "list":
        return "lit(list,nil)"
    return f"lit({v.tag},{format_number(v.value)})"


def _qa(name: str) -> str:
    q = format_atom(name)
    return q if q.startswith("'") else f"'{name}'"


def _fact_pat(p) -> str:
    from .syntax import PCons, PLit, PTuple
    if isinstance(p, PVar):
        return f"var('{p.name}')"
    if isinstance(p, PLit):
        return _fact_lit(p.value)
    if isinstance(p, PCons):
        return f"cons({_fact_pat(p.head)},{_fact_pat(p.tail)})"
    if isinstance(p, PTuple):
        return "tuple([" + ",".join(_fact_pat(x) for x in p.elems) + "])"
    raise TypeError(p)


def _fact(e) -> str:
    if isinstance(e, VarRef):
        return f"var('{e.name}')"
    if isinstance(e, Literal):
        return _fact_lit(e.value)
    if isinstance(e, ConsE):
        return f"cons({_fact(e.head)},{_fact(e.tail)})"
    if isinstance(e, TupleE):
        return "tuple([" + ",".join(_fact(x) for x in e.elems) + "])"
    if isinstance(e, Let):
        vs = ",".join(f"var('{v}')" for v in e.vars)
        return f"let([{vs}],{_fact(e.rhs)},{_fact(e.body)})"
    if isinstance(e, Case):
        cls = ",".join(
            f"clause([{_fact_pat(c.pattern)}],{_fact(c.guard)},{_fact(c.body)})" for c in e.clauses
        )
        return f"case({_fact(e.scrutinee)},[{cls}])"
    if isinstance(e, Apply):
        args = ",".join(_fact(a) for a in e.args)
        return f"apply(var('{e.fname.name}',{e.fname.arity}),[{args}])"
    if isinstance(e, Call):
        args = ",".join(_fact(a) for a in e.args)
        return f"call(lit(atom,{_qa(e.module)}),lit(atom,{_qa(e.fname)}),[{args}])"
    if isinstance(e, PrimOp):
        args = ",".join(_fact(a) for a in e.args)
        return f"primop(lit(atom,{_qa(e.name)}),[{args}])"
    if isinstance(e, Try):
        return (f"try({_fact(e.body)},[var('{e.ok_var}')],{_fact(e.ok_body)},"
                f"[var('{e.catch_var}')],{_fact(e.handler)})")
    raise TypeError(e)


def dump_facts(table: FunTable) -> str:
    """One ``fundef(...)`` fact per function, in the shape of the generated Prolog facts."""
    lines = []
    for f in table.functions.values():
        pars = ",".join(f"var('{p}')" for p in f.params)
        lines.append(
            f"fundef(lit(atom,{_qa(table.module)}),var('{f.fname.name}',{f.fname.arity}),"
            f"fun([{pars}],{_fact(f.body)}))."
        )
    return "\n".join(lines) + "\n"
