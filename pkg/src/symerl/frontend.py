"""Concrete syntax for the Core Erlang subset: lexer, parser and printer.

The syntax follows Core Erlang's printed form::

    module 'sum_list' ['sum'/1] =
      'sum'/1 = fun (L) ->
          case L of
            [] when 'true' -> 0 ;
            [H|T] when 'true' ->
                let <S> = apply 'sum'/1 (T)
                in call 'erlang':'+' (H, S)
          end
      end

Atoms are bare lowercase words or single-quoted; variables start with an
uppercase letter or ``_`` (names starting with ``@`` are reserved for the
translator).  ``%`` starts a line comment.  The export list is optional and
defaults to every function; functions may be separated by commas.

The same lexer also reads terms in fact notation
(``cons(lit(int,N),lit(list,nil))``), used for input skeletons and witnesses.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .syntax import (
    Apply, Call, Case, Clause, ConsE, FunDef, FunName, Let, Literal, PCons,
    PLit, PTuple, PVar, PrimOp, SourceModule, Try, TupleE, VarRef, free_vars,
)
from .terms import (
    ATOM, FLOAT, INT, LIST, NIL, NIL_MARK, TAGS, TRUE, Cons, ErrorVal, Lit,
    Tuple, fresh_var, format_number,
)

KEYWORDS = {
    "module", "fun", "end", "let", "in", "case", "of", "when", "apply",
    "call", "primop", "try", "catch",
}


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


class ParseError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class Token:
    kind: str  # atom, var, int, float, kw, punct, eof
    text: str
    value: object
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|%[^\n]*)
  | (?P<float>-?\d+\.\d+(?:[eE][+-]?\d+)?)
  | (?P<int>-?\d+)
  | (?P<qatom>'(?:[^'\\\n]|\\.)*')
  | (?P<word>[a-z][A-Za-z0-9_@]*)
  | (?P<var>[A-Z_][A-Za-z0-9_@]*)
  | (?P<punct>->|[()\[\]{}|,;=/:<>])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError([Diagnostic("error", line, col, f"unexpected character {text[pos]!r}")])
        kind = m.lastgroup
        s = m.group()
        if kind == "float":
            tokens.append(Token("float", s, Fraction(s), line, col))
        elif kind == "int":
            tokens.append(Token("int", s, int(s), line, col))
        elif kind == "qatom":
            tokens.append(Token("atom", s, re.sub(r"\\(.)", r"\1", s[1:-1]), line, col))
        elif kind == "word":
            tokens.append(Token("kw" if s in KEYWORDS else "atom", s, s, line, col))
        elif kind == "var":
            tokens.append(Token("var", s, s, line, col))
        elif kind == "punct":
            tokens.append(Token("punct", s, s, line, col))
        newlines = s.count("\n")
        if newlines:
            line += newlines
            line_start = pos + s.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", None, line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0
        self.positions: dict[int, tuple[int, int]] = {}

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def fail(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ParseError([Diagnostic("error", tok.line, tok.col, msg)])

    def at(self, text: str) -> bool:
        return self.tok.kind in ("punct", "kw") and self.tok.text == text

    def eat(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.fail(f"expected '{text}' but found '{found}'")
        tok = self.tok
        self.i += 1
        return tok

    def take(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            found = self.tok.text or "end of input"
            self.fail(f"expected {what} but found '{found}'")
        tok = self.tok
        self.i += 1
        return tok

    def mark(self, node, tok: Token):
        self.positions[id(node)] = (tok.line, tok.col)
        return node

    # -- module level --------------------------------------------------------

    def module(self) -> SourceModule:
        self.eat("module")
        name = self.take("atom", "module name").value
        exports = None
        if self.at("["):
            self.eat("[")
            exports = []
            if not self.at("]"):
                exports.append(self.fname())
                while self.at(","):
                    self.eat(",")
                    exports.append(self.fname())
            self.eat("]")
        self.eat("=")
        functions: list[FunDef] = []
        seen: dict[FunName, Token] = {}
        while self.tok.kind != "eof":
            start = self.tok
            fdef = self.fundef()
            if fdef.fname in seen:
                self.fail(f"duplicate definition of function {fdef.fname}", start)
            seen[fdef.fname] = start
            functions.append(fdef)
            if self.at(","):
                self.eat(",")
        if exports is None:
            exports = [f.fname for f in functions]
        for e in exports:
            if e not in seen:
                first = self.toks[0]
                self.fail(f"export of undefined function {e}", first)
        return SourceModule(name, tuple(exports), tuple(functions))

    def fname(self) -> FunName:
        name = self.take("atom", "function name").value
        self.eat("/")
        arity = self.take("int", "arity").value
        if arity < 0:
            self.fail("arity must be non-negative")
        return FunName(name, arity)

    def fundef(self) -> FunDef:
        start = self.tok
        fname = self.fname()
        self.eat("=")
        self.eat("fun")
        self.eat("(")
        params = []
        if not self.at(")"):
            params.append(self.take("var", "parameter").value)
            while self.at(","):
                self.eat(",")
                params.append(self.take("var", "parameter").value)
        self.eat(")")
        if len(params) != fname.arity:
            self.fail(f"function {fname} declares {len(params)} parameters", start)
        if len(set(params)) != len(params):
            self.fail(f"repeated parameter name in {fname}", start)
        self.eat("->")
        body = self.expr()
        self.eat("end")
        return FunDef(fname, tuple(params), body, tuple(params))

    # -- expressions ---------------------------------------------------------

    def args(self) -> tuple:
        self.eat("(")
        out = []
        if not self.at(")"):
            out.append(self.expr())
            while self.at(","):
                self.eat(",")
                out.append(self.expr())
        self.eat(")")
        return tuple(out)

    def expr(self):
        tok = self.tok
        k = tok.kind
        if k == "var":
            self.i += 1
            return self.mark(VarRef(tok.value), tok)
        if k == "int":
            self.i += 1
            return Literal(Lit(INT, tok.value))
        if k == "float":
            self.i += 1
            return Literal(Lit(FLOAT, tok.value))
        if k == "atom":
            self.i += 1
            if self.at("/"):
                self.fail("function values are not supported in this subset", tok)
            return Literal(Lit(ATOM, tok.value))
        if self.at("("):
            self.eat("(")
            e = self.expr()
            self.eat(")")
            return e
        if self.at("["):
            self.eat("[")
            if self.at("]"):
                self.eat("]")
                return Literal(NIL)
            items = [self.expr()]
            while self.at(","):
                self.eat(",")
                items.append(self.expr())
            tail = Literal(NIL)
            if self.at("|"):
                self.eat("|")
                tail = self.expr()
            self.eat("]")
            for item in reversed(items):
                tail = ConsE(item, tail)
            return tail
        if self.at("{"):
            self.eat("{")
            items = []
            if not self.at("}"):
                items.append(self.expr())
                while self.at(","):
                    self.eat(",")
                    items.append(self.expr())
            self.eat("}")
            return TupleE(tuple(items))
        if self.at("let"):
            self.eat("let")
            vars_ = []
            if self.at("<"):
                self.eat("<")
                vars_.append(self.take("var", "variable").value)
                while self.at(","):
                    self.eat(",")
                    vars_.append(self.take("var", "variable").value)
                self.eat(">")
            else:
                vars_.append(self.take("var", "variable").value)
            self.eat("=")
            rhs = self.expr()
            self.eat("in")
            body = self.expr()
            return self.mark(Let(tuple(vars_), rhs, body), tok)
        if self.at("case"):
            self.eat("case")
            scrut = self.expr()
            self.eat("of")
            clauses = []
            if not self.at("end"):
                clauses.append(self.clause())
                while self.at(";"):
                    self.eat(";")
                    clauses.append(self.clause())
            self.eat("end")
            return self.mark(Case(scrut, tuple(clauses)), tok)
        if self.at("apply"):
            self.eat("apply")
            fname = self.fname()
            return self.mark(Apply(fname, self.args()), tok)
        if self.at("call"):
            self.eat("call")
            mod = self.take("atom", "module name").value
            self.eat(":")
            name = self.take("atom", "function name").value
            return self.mark(Call(mod, name, self.args()), tok)
        if self.at("primop"):
            self.eat("primop")
            name = self.take("atom", "primop name").value
            return self.mark(PrimOp(name, self.args()), tok)
        if self.at("try"):
            self.eat("try")
            body = self.expr()
            self.eat("of")
            ok_var = self.take("var", "variable").value
            self.eat("->")
            ok_body = self.expr()
            self.eat("catch")
            catch_var = self.take("var", "variable").value
            self.eat("->")
            handler = self.expr()
            return self.mark(Try(body, ok_var, ok_body, catch_var, handler), tok)
        self.fail(f"expected an expression but found '{tok.text or 'end of input'}'")

    def clause(self) -> Clause:
        tok = self.tok
        pat = self.pattern()
        guard = Literal(TRUE)
        if self.at("when"):
            self.eat("when")
            guard = self.expr()
        self.eat("->")
        body = self.expr()
        return self.mark(Clause(pat, guard, body), tok)

    def pattern(self):
        tok = self.tok
        k = tok.kind
        if k == "var":
            self.i += 1
            return PVar(tok.value)
        if k == "int":
            self.i += 1
            return PLit(Lit(INT, tok.value))
        if k == "float":
            self.i += 1
            return PLit(Lit(FLOAT, tok.value))
        if k == "atom":
            self.i += 1
            return PLit(Lit(ATOM, tok.value))
        if self.at("["):
            self.eat("[")
            if self.at("]"):
                self.eat("]")
                return PLit(NIL)
            items = [self.pattern()]
            while self.at(","):
                self.eat(",")
                items.append(self.pattern())
            tail = PLit(NIL)
            if self.at("|"):
                self.eat("|")
                tail = self.pattern()
            self.eat("]")
            for item in reversed(items):
                tail = PCons(item, tail)
            return tail
        if self.at("{"):
            self.eat("{")
            items = []
            if not self.at("}"):
                items.append(self.pattern())
                while self.at(","):
                    self.eat(",")
                    items.append(self.pattern())
            self.eat("}")
            return PTuple(tuple(items))
        self.fail(f"expected a pattern but found '{tok.text or 'end of input'}'")


def _scope_diagnostics(mod: SourceModule, positions) -> list[Diagnostic]:
    diags = []
    for f in mod.functions:
        for name, node in free_vars(f.body, frozenset(f.params)):
            line, col = positions.get(id(node), (1, 1))
            diags.append(Diagnostic("error", line, col, f"variable {name} is unbound in {f.fname}"))
    return diags


def parse_module(text) -> SourceModule:
    """Parse module source; raises ``ParseError`` carrying positioned diagnostics."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError([Diagnostic("error", 1, 1, f"input is not valid UTF-8: {exc.reason}")]) from None
    parser = _Parser(tokenize(text))
    try:
        mod = parser.module()
    except RecursionError:
        raise ParseError([Diagnostic("error", 1, 1, "input nested too deeply")]) from None
    diags = _scope_diagnostics(mod, parser.positions)
    if diags:
        raise ParseError(diags)
    return mod


def parse_expr(text: str):
    parser = _Parser(tokenize(text))
    e = parser.expr()
    parser.take("eof", "end of input")
    return e


# -- printer ------------------------------------------------------------------

def _q(name: str) -> str:
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


def _lit(v: Lit) -> str:
    if v.tag == ATOM:
        return _q(v.value)
    if v.tag == LIST:
        return "[]"
    return format_number(v.value)


def _pat(p) -> str:
    if isinstance(p, PVar):
        return p.name
    if isinstance(p, PLit):
        return _lit(p.value)
    if isinstance(p, PCons):
        return f"[{_pat(p.head)}|{_pat(p.tail)}]"
    return "{" + ", ".join(_pat(e) for e in p.elems) + "}"


def _expr(e, ind: int) -> str:
    pad = " " * ind
    if isinstance(e, VarRef):
        return e.name
    if isinstance(e, Literal):
        return _lit(e.value)
    if isinstance(e, ConsE):
        return f"[{_expr(e.head, ind)}|{_expr(e.tail, ind)}]"
    if isinstance(e, TupleE):
        return "{" + ", ".join(_expr(x, ind) for x in e.elems) + "}"
    if isinstance(e, Let):
        vs = "<" + ", ".join(e.vars) + ">"
        return (f"let {vs} = {_expr(e.rhs, ind + 4)}\n"
                f"{pad}in {_expr(e.body, ind + 3)}")
    if isinstance(e, Case):
        lines = [f"case {_expr(e.scrutinee, ind + 5)} of"]
        for i, c in enumerate(e.clauses):
            sep = " ;" if i < len(e.clauses) - 1 else ""
            lines.append(f"{pad}  {_pat(c.pattern)} when {_expr(c.guard, ind + 4)} ->\n"
                         f"{pad}      {_expr(c.body, ind + 6)}{sep}")
        lines.append(f"{pad}end")
        return "\n".join(lines)
    if isinstance(e, Apply):
        return f"apply {_q(e.fname.name)}/{e.fname.arity} (" + ", ".join(_expr(a, ind) for a in e.args) + ")"
    if isinstance(e, Call):
        return f"call {_q(e.module)}:{_q(e.fname)} (" + ", ".join(_expr(a, ind) for a in e.args) + ")"
    if isinstance(e, PrimOp):
        return f"primop {_q(e.name)} (" + ", ".join(_expr(a, ind) for a in e.args) + ")"
    if isinstance(e, Try):
        return (f"try {_expr(e.body, ind + 4)}\n"
                f"{pad}of {e.ok_var} -> {_expr(e.ok_body, ind + 4)}\n"
                f"{pad}catch {e.catch_var} -> {_expr(e.handler, ind + 4)}")
    raise TypeError(f"not an expression: {e!r}")


def pretty_print(mod: SourceModule) -> str:
    exports = ", ".join(f"{_q(f.name)}/{f.arity}" for f in mod.exports)
    out = [f"module {_q(mod.name)} [{exports}] ="]
    for i, f in enumerate(mod.functions):
        sep = "," if i < len(mod.functions) - 1 else ""
        out.append(f"  {_q(f.fname.name)}/{f.fname.arity} = fun ({', '.join(f.params)}) ->\n"
                   f"      {_expr(f.body, 6)}\n"
                   f"  end{sep}")
    return "\n".join(out) + "\n"


# -- fact-notation terms ------------------------------------------------------

class _TermReader:
    def __init__(self, text: str):
        self.p = _Parser(tokenize(text))
        self.vars: dict[tuple[str, str], object] = {}

    def var(self, name: str, kind: str, owner=None):
        if name == "_":
            return fresh_var("_", kind, owner)
        key = (name, kind)
        if key not in self.vars:
            self.vars[key] = fresh_var(name.lstrip("_") or "_", kind, owner)
        return self.vars[key]

    def term(self):
        p = self.p
        tok = p.tok
        if tok.kind == "var":
            p.i += 1
            return self.var(tok.value, "term")
        if tok.kind != "atom":
            p.fail(f"expected a term but found '{tok.text or 'end of input'}'")
        p.i += 1
        head = tok.value
        p.eat("(")
        if head == "lit":
            t = p.tok
            if t.kind == "var":
                p.i += 1
                tag = self.var(t.value, "tag")
            elif t.kind == "atom" and t.value in TAGS:
                p.i += 1
                tag = t.value
            else:
                p.fail("expected a type tag")
            p.eat(",")
            t = p.tok
            p.i += 1
            if t.kind == "var":
                value = self.var(t.value, "val", tag)
            elif tag == INT and t.kind == "int":
                value = t.value
            elif tag == FLOAT and t.kind in ("float", "int"):
                value = Fraction(t.value)
            elif tag == ATOM and t.kind == "atom":
                value = t.value
            elif tag == LIST and t.kind == "atom" and t.value == NIL_MARK:
                value = NIL_MARK
            else:
                p.fail(f"bad payload '{t.text}' for tag {tag}", t)
            result = Lit(tag, value)
        elif head == "cons":
            h = self.term()
            p.eat(",")
            result = Cons(h, self.term())
        elif head == "tuple":
            p.eat("[")
            items = []
            if not p.at("]"):
                items.append(self.term())
                while p.at(","):
                    p.eat(",")
                    items.append(self.term())
            p.eat("]")
            result = Tuple(tuple(items))
        elif head == "error":
            result = ErrorVal(p.take("atom", "error name").value)
        else:
            p.fail(f"unknown term constructor {head}", tok)
        p.eat(")")
        return result


def parse_term(text: str):
    """Read one term in fact notation; upper-case names become logic variables."""
    r = _TermReader(text)
    t = r.term()
    r.p.take("eof", "end of input")
    return t


def parse_term_list(text: str) -> list:
    """Read ``[t1, ..., tn]``; variables with the same name are shared."""
    r = _TermReader(text)
    r.p.eat("[")
    items = []
    if not r.p.at("]"):
        items.append(r.term())
        while r.p.at(","):
            r.p.eat(",")
            items.append(r.term())
    r.p.eat("]")
    r.p.take("eof", "end of input")
    return items
