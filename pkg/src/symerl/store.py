"""Constraint store: bindings, non-matching constraints, tag domains, arithmetic.

A store is persistent: every operation returns a new store (or ``None`` when
the result is unsatisfiable) and leaves its argument untouched, so branches
of the symbolic search can share ancestors freely.

Constraint kinds:

* bindings -- a triangular substitution from variable ids to terms, with
  occurs check;
* ``NotMatch(t, pat, locals)`` -- ``t`` is not an instance of ``pat`` for any
  value of the pattern-local variables ``locals`` (plain disequality when
  ``locals`` is empty);
* tag exclusions -- a tag variable is not one of the listed tags;
* numeric joins -- ``result`` is ``int`` when every operand tag is ``int``,
  else ``float``;
* linear constraints over literal payload variables (``LinCon``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from . import linarith
from .linarith import LinCon, SAT, UNKNOWN, UNSAT
from .terms import (
    ATOM, FLOAT, INT, LIST, NIL, NIL_MARK, TAGS, Cons, ErrorVal,
    Lit, Term, Tuple, Var, fresh_lit, fresh_var,
    term_vars,
)

DEFAULT_WITNESS_DEPTH = 4
DEFAULT_NODE_LIMIT = 20000


@dataclass(frozen=True)
class NotMatch:
    term: Term
    pat: Term
    locals: frozenset = frozenset()


@dataclass(frozen=True)
class Join:
    result: object
    operands: tuple


class _Fail(Exception):
    pass


def _is_payload(x) -> bool:
    return not isinstance(x, (Lit, Cons, Tuple, ErrorVal, Var))


class ConstraintStore:
    """Immutable-by-convention constraint store; see the module docstring."""

    __slots__ = ("subst", "nms", "excl", "joins", "lins", "int_bound")

    def __init__(self, int_bound: int = linarith.DEFAULT_INT_BOUND):
        self.subst: dict = {}
        self.nms: tuple = ()
        self.excl: dict = {}
        self.joins: tuple = ()
        self.lins: tuple = ()
        self.int_bound = int_bound

    status = "sat-or-unknown"

    def _copy(self) -> "ConstraintStore":
        s = ConstraintStore.__new__(ConstraintStore)
        s.subst = dict(self.subst)
        s.nms = self.nms
        s.excl = dict(self.excl)
        s.joins = self.joins
        s.lins = self.lins
        s.int_bound = self.int_bound
        return s

    def snapshot(self) -> "ConstraintStore":
        return self

    # -- dereferencing --------------------------------------------------------

    def walk(self, t):
        subst = self.subst
        while type(t) is Var and t.id in subst:
            t = subst[t.id]
        return t

    def resolve(self, t):
        """Apply the substitution all the way down."""
        t = self.walk(t)
        if isinstance(t, Lit):
            tag, val = self.walk(t.tag), self.walk(t.value)
            if tag is t.tag and val is t.value:
                return t
            return Lit(tag, val)
        if isinstance(t, Cons):
            return Cons(self.resolve(t.head), self.resolve(t.tail))
        if isinstance(t, Tuple):
            return Tuple(tuple(self.resolve(e) for e in t.elems))
        return t

    deref = resolve

    def tag_of(self, v: Var):
        """The (dereferenced) tag owning payload variable ``v``."""
        return self.walk(v.owner) if v.owner is not None else None

    def domain(self, tag_var) -> tuple:
        tag_var = self.walk(tag_var)
        if isinstance(tag_var, str):
            return (tag_var,)
        ex = self.excl.get(tag_var.id, frozenset())
        return tuple(t for t in TAGS if t not in ex)

    # -- unification core -----------------------------------------------------

    def _occurs(self, vid: int, t) -> bool:
        stack = [t]
        while stack:
            t = self.walk(stack.pop())
            if isinstance(t, Var):
                if t.id == vid:
                    return True
            elif isinstance(t, Cons):
                stack += [t.head, t.tail]
            elif isinstance(t, Tuple):
                stack += t.elems
        return False

    def _unify_raw(self, a, b, trail: list, locals_: frozenset = frozenset()) -> bool:
        subst = self.subst
        stack = [(a, b)]
        while stack:
            a, b = stack.pop()
            a = self.walk(a)
            b = self.walk(b)
            if a is b:
                continue
            av, bv = isinstance(a, Var), isinstance(b, Var)
            if av and bv and a.id == b.id:
                continue
            if bv:
                # bind pattern locals first, otherwise the newer variable
                al, bl = av and a.id in locals_, b.id in locals_
                if not av or (bl and not al) or (al == bl and b.id > a.id):
                    a, b, av, bv = b, a, bv, av
            if av:
                if a.kind == "tag":
                    if isinstance(b, str):
                        if b not in TAGS or b in self.excl.get(a.id, ()):
                            return False
                    elif not (bv and b.kind == "tag"):
                        return False
                elif a.kind == "val":
                    if not (_is_payload(b) or (bv and b.kind == "val")):
                        return False
                else:
                    if _is_payload(b) or (bv and b.kind != "term"):
                        return False
                    if not bv and self._occurs(a.id, b):
                        return False
                subst[a.id] = b
                trail.append(a)
                continue
            if isinstance(a, Lit):
                if not isinstance(b, Lit):
                    return False
                stack.append((a.value, b.value))
                stack.append((a.tag, b.tag))
            elif isinstance(a, Cons):
                if not isinstance(b, Cons):
                    return False
                stack.append((a.tail, b.tail))
                stack.append((a.head, b.head))
            elif isinstance(a, Tuple):
                if not isinstance(b, Tuple) or len(a.elems) != len(b.elems):
                    return False
                stack.extend(zip(reversed(a.elems), reversed(b.elems)))
            elif isinstance(a, ErrorVal):
                if not (isinstance(b, ErrorVal) and a.name == b.name):
                    return False
            else:
                if type(a) is not type(b) or a != b:
                    return False
        return True

    def _nm_status(self, nm: NotMatch):
        """('discharged' | 'entailed' | 'suspended', [(var, value) global bindings])."""
        trail: list = []
        ok = self._unify_raw(nm.term, nm.pat, trail, nm.locals)
        binds = [(v, self.subst[v.id]) for v in trail if v.id not in nm.locals]
        for v in trail:
            del self.subst[v.id]
        if not ok:
            return "discharged", []
        if not binds:
            return "entailed", []
        return "suspended", binds

    # -- propagation ----------------------------------------------------------

    def _settle(self, trail: list, arith: bool) -> "ConstraintStore | None":
        """Restore invariants after bindings/exclusions; mutates self (a fresh copy)."""
        # tag domains and joins only change when a tag (or payload) variable moved
        changed = not trail or any(v.kind != "term" for v in trail)
        while changed:
            changed = False
            # tag variables bound to tag variables: merge exclusions
            for v in trail:
                vid = v.id
                val = self.walk(self.subst.get(vid))
                if vid in self.excl:
                    ex = self.excl.pop(vid)
                    if isinstance(val, Var):
                        merged = self.excl.get(val.id, frozenset()) | ex
                        self.excl[val.id] = merged
                    elif isinstance(val, str) and val in ex:
                        return None
            trail = []
            for vid, ex in list(self.excl.items()):
                if vid in self.subst:
                    continue
                left = [t for t in TAGS if t not in ex]
                if not left:
                    return None
                if len(left) == 1:
                    del self.excl[vid]
                    self.subst[vid] = left[0]
                    trail.append(Var(vid, kind="tag"))
                    changed = True
            # numeric joins
            joins = []
            for j in self.joins:
                res = self._settle_join(j, trail)
                if res is False:
                    return None
                if res is not True:
                    joins.append(res)
                else:
                    changed = changed or bool(trail)
            if len(joins) != len(self.joins):
                changed = True
            self.joins = tuple(joins)
            if trail:
                changed = True
                arith = True
        # non-matching constraints
        kept = []
        for nm in self.nms:
            st, _ = self._nm_status(nm)
            if st == "entailed":
                return None
            if st == "suspended":
                kept.append(nm)
        self.nms = tuple(kept)
        if arith and self.lins:
            status, _ = linarith.solve(self._core_lins(), self._int_vars(), self.int_bound)
            if status == UNSAT:
                return None
        return self

    def _settle_join(self, j: Join, trail: list):
        """True when discharged, False on conflict, else the (possibly same) join."""
        ops = [self.walk(t) for t in j.operands]
        res = self.walk(j.result)

        def force(t, tag):
            if isinstance(t, str):
                return t == tag
            if tag in self.excl.get(t.id, ()):
                return False
            self.subst[t.id] = tag
            trail.append(t)
            return True

        if any(o == FLOAT for o in ops):
            return force(res, FLOAT) and True
        if all(o == INT for o in ops):
            return force(res, INT) and True
        if res == INT:
            return all(force(o, INT) for o in ops) and True
        if res == FLOAT:
            open_ = [o for o in ops if isinstance(o, Var)]
            if len(open_) == 1 and all(o == INT for o in ops if not isinstance(o, Var)):
                return force(open_[0], FLOAT) and True
        return j

    def _norm_lin(self, c: LinCon) -> LinCon:
        subst = self.subst
        if not any(v.id in subst for v, _ in c.coeffs):
            return c
        coeffs: dict = {}
        rhs = c.rhs
        for v, k in c.coeffs:
            t = self.walk(v)
            if isinstance(t, Var):
                coeffs[t] = coeffs.get(t, 0) + k
            else:
                rhs -= k * Fraction(t)
        return LinCon.make(coeffs, c.rel, rhs)

    def _norm_lins(self) -> list[LinCon]:
        return [self._norm_lin(c) for c in self.lins]

    def _core_lins(self, pinned=(), dropped: list | None = None, norm: list | None = None) -> list[LinCon]:
        """Normalized constraints minus equalities that merely define an otherwise unused variable.

        Dropping ``v = e`` when ``v`` occurs nowhere else preserves satisfiability
        (``v`` can always take the value of ``e``), provided ``e`` is integral
        whenever ``v`` must be.  Dropped ``(v, constraint)`` pairs are appended
        to ``dropped`` in elimination order.
        """
        cons = [c for c in (self._norm_lins() if norm is None else norm) if c.coeffs]
        pinned = set(pinned)
        count: dict = {}
        for c in cons:
            for v, _ in c.coeffs:
                count[v] = count.get(v, 0) + 1
        alive = [True] * len(cons)
        changed = True
        while changed:
            changed = False
            # newest first: chains of definitions unwind in a single pass
            for i in range(len(cons) - 1, -1, -1):
                c = cons[i]
                if not alive[i] or c.rel != "=":
                    continue
                for v, k in c.coeffs:
                    if count[v] == 1 and v not in pinned and self._definable(c, v, k):
                        alive[i] = False
                        changed = True
                        if dropped is not None:
                            dropped.append((v, c))
                        for w, _ in c.coeffs:
                            count[w] -= 1
                        break
        return [c for c, a in zip(cons, alive) if a]

    @staticmethod
    def _extend_model(model: dict, dropped: list) -> dict:
        """Give values to the variables of dropped definitions (latest first)."""
        model = dict(model)
        for v, c in reversed(dropped):
            k = dict(c.coeffs)[v]
            rest = Fraction(0)
            for w, cw in c.coeffs:
                if w != v:
                    rest += cw * model.setdefault(w, Fraction(0))
            model[v] = (c.rhs - rest) / k
        return model

    def _definable(self, c: LinCon, v, k) -> bool:
        if self.tag_of(v) != INT:
            return True
        if abs(k) != 1 or c.rhs.denominator != 1:
            return False
        return all(cw.denominator == 1 and self.tag_of(w) == INT for w, cw in c.coeffs if w != v)

    def _int_vars(self) -> list:
        out = []
        for c in self.lins:
            for v, _ in c.coeffs:
                t = self.walk(v)
                if isinstance(t, Var) and self.tag_of(t) == INT:
                    out.append(t)
        return out

    # -- public operations ----------------------------------------------------

    def unify(self, t1, t2) -> "ConstraintStore | None":
        return self.unify_many([(t1, t2)])

    def unify_many(self, pairs) -> "ConstraintStore | None":
        """Unify several pairs, propagating once at the end."""
        s = self._copy()
        trail: list = []
        for t1, t2 in pairs:
            if not s._unify_raw(t1, t2, trail):
                return None
        if not trail:
            return s
        arith = bool(s.lins) and any(v.kind != "term" for v in trail)
        return s._settle(trail, arith)

    def not_match_status(self, t, pat, locals_: Iterable = ()) -> str:
        nm = NotMatch(t, pat, frozenset(v.id if isinstance(v, Var) else v for v in locals_))
        return self._copy()._nm_status(nm)[0]

    def add_not_match(self, t, pat, locals_: Iterable = ()) -> "ConstraintStore | None":
        """Require that ``t`` is no instance of ``pat`` (``locals_`` existential).

        Returns the same store when the constraint is already entailed
        (discharged), ``None`` when it is violated.
        """
        nm = NotMatch(t, pat, frozenset(v.id if isinstance(v, Var) else v for v in locals_))
        s = self._copy()
        st, _ = s._nm_status(nm)
        if st == "discharged":
            return self
        if st == "entailed":
            return None
        s.nms = s.nms + (nm,)
        return s

    def add_tag_constraint(self, v, tag: str, positive: bool = True) -> "ConstraintStore | None":
        if tag not in TAGS:
            raise ValueError(f"unknown tag {tag!r}")
        v = self.walk(v)
        if isinstance(v, Lit):
            v = self.walk(v.tag)
        if isinstance(v, str):
            return self if (v == tag) == positive else None
        if isinstance(v, (Cons, Tuple, ErrorVal)):
            return None if positive else self
        if v.kind == "term":
            if positive:
                return self.unify(v, fresh_lit(tag))
            val = fresh_var("_", "val", tag)
            pat = NIL if tag == LIST else Lit(tag, val)
            return self.add_not_match(v, pat, [val])
        if v.kind != "tag":
            raise TypeError(f"tag constraint on payload variable {v!r}")
        if positive:
            return self.unify(v, tag)
        ex = self.excl.get(v.id, frozenset())
        if tag in ex:
            return self
        s = self._copy()
        s.excl[v.id] = ex | {tag}
        return s._settle([], False)

    def add_join(self, result, operands) -> "ConstraintStore | None":
        s = self._copy()
        s.joins = s.joins + (Join(result, tuple(operands)),)
        return s._settle([], False)

    def add_lin(self, c: LinCon) -> "ConstraintStore | None":
        c = self._norm_lin(c)
        if not c.coeffs:
            return self if linarith._cmp(Fraction(0), c.rel, c.rhs) else None
        s = self._copy()
        s.lins = s.lins + (c,)
        if self._is_definition(c):
            return s
        status, _ = linarith.solve(s._core_lins(), s._int_vars(), s.int_bound)
        return None if status == UNSAT else s

    def _is_definition(self, c: LinCon) -> bool:
        """``x = e`` with ``x`` new and integral coefficients keeps the system satisfiable."""
        if c.rel != "=":
            return False
        used = {v for old in self.lins for v, _ in self._norm_lin(old).coeffs}
        for v, k in c.coeffs:
            if v in used or abs(k) != 1:
                continue
            rest_ok = all(cw.denominator == 1 for w, cw in c.coeffs if w != v) and c.rhs.denominator == 1
            if rest_ok or self.tag_of(v) != INT:
                return True
        return False

    # -- satisfiability -------------------------------------------------------

    def check_sat(self, depth: int = DEFAULT_WITNESS_DEPTH, node_limit: int = DEFAULT_NODE_LIMIT):
        """Full decision with witness search; returns a ``CheckResult``."""
        return _WitnessSearch(depth, node_limit).run(self)

    def residual(self, inputs, extra: dict | None = None) -> "ResidualAnswer":
        return residual(self, inputs, extra)


EMPTY = ConstraintStore


# -- witness search -------------------------------------------------------------

@dataclass
class CheckResult:
    status: str
    store: ConstraintStore | None = None
    model: dict = field(default_factory=dict)

    @property
    def sat(self) -> bool:
        return self.status == SAT

    def ground(self, t) -> Term:
        """Ground ``t`` using the witness, filling unconstrained holes by default policy."""
        s = self.store

        def tag(t):
            t = s.walk(t)
            if isinstance(t, str):
                return t
            return s.domain(t)[0]

        def val(v, tg):
            v = s.walk(v)
            if not isinstance(v, Var):
                return v
            if v in self.model:
                m = self.model[v]
                return int(m) if tg == INT else Fraction(m)
            if tg == INT:
                return 0
            if tg == FLOAT:
                return Fraction(0)
            if tg == LIST:
                return NIL_MARK
            return "a"

        def go(t):
            t = s.walk(t)
            if isinstance(t, Var):
                if t.kind == "term":
                    return Lit(ATOM, "a")
                raise TypeError(f"cannot ground {t!r} as a term")
            if isinstance(t, Lit):
                tg = tag(t.tag)
                return Lit(tg, val(t.value, tg))
            if isinstance(t, Cons):
                return Cons(go(t.head), go(t.tail))
            if isinstance(t, Tuple):
                return Tuple(tuple(go(e) for e in t.elems))
            return t

        return go(t)


class _Budget(Exception):
    pass


def _store_atoms(s: ConstraintStore) -> list[str]:
    seen: dict = {}

    def scan(t):
        stack = [t]
        while stack:
            t = stack.pop()
            if isinstance(t, Lit):
                if t.tag == ATOM and isinstance(t.value, str):
                    seen[t.value] = None
            elif isinstance(t, Cons):
                stack += [t.head, t.tail]
            elif isinstance(t, Tuple):
                stack += t.elems
            elif isinstance(t, str):
                pass

    for v in s.subst.values():
        if isinstance(v, (Lit, Cons, Tuple)):
            scan(v)
        elif isinstance(v, str) and not v in TAGS and v != NIL_MARK:
            seen[v] = None
    for nm in s.nms:
        scan(nm.term)
        scan(nm.pat)
    return list(seen)


def _fresh_atoms(taken, n: int) -> list[str]:
    out = []
    i = 0
    while len(out) < n:
        name = "abcdefghijklmnopqrstuvwxyz"[i] if i < 26 else f"a{i}"
        if name not in taken:
            out.append(name)
        i += 1
    return out


def _tuple_arities(s: ConstraintStore) -> list[int]:
    found = set()

    def scan(t):
        stack = [t]
        while stack:
            t = stack.pop()
            if isinstance(t, Tuple):
                found.add(len(t.elems))
                stack += t.elems
            elif isinstance(t, Cons):
                stack += [t.head, t.tail]

    for v in s.subst.values():
        scan(v)
    for nm in s.nms:
        scan(nm.term)
        scan(nm.pat)
    other = 0
    while other in found:
        other += 1
    return sorted(found) + [other]


class _WitnessSearch:
    def __init__(self, depth: int, node_limit: int):
        self.depth = depth
        self.nodes = node_limit
        self.incomplete = False
        self.var_depth: dict = {}

    def run(self, s: ConstraintStore | None) -> CheckResult:
        if s is None:
            return CheckResult(UNSAT)
        try:
            res = self.search(s)
        except _Budget:
            return CheckResult(UNKNOWN)
        if res is not None:
            return res
        return CheckResult(UNKNOWN if self.incomplete else UNSAT)

    def tick(self):
        self.nodes -= 1
        if self.nodes < 0:
            raise _Budget

    def search(self, s: ConstraintStore):
        self.tick()
        blocked = []
        for nm in s.nms:
            st, binds = s._copy()._nm_status(nm)
            if st == "entailed":
                return None
            if st == "suspended":
                blocked.append(binds)
        # stage 1: instantiate a term variable blocking a non-match constraint
        for binds in blocked:
            for var, _ in binds:
                if var.kind == "term":
                    return self.instantiate(s, var)
        # stage 2: enumerate tag variables that matter, first those blocking a
        # non-match constraint, then the arithmetic ones (greedily at first)
        tags = self.open_tags(s, blocked)
        if not tags:
            tags = self.arith_tags(s)
            if len(tags) > 1:
                greedy = s.unify_many([(tv, s.domain(tv)[0]) for tv in tags])
                if greedy is not None:
                    r = self.search(greedy)
                    if r is not None:
                        return r
        for tv in tags:
            for tag in s.domain(tv):
                s2 = s.unify(tv, tag)
                if s2 is None:
                    continue
                r = self.search(s2)
                if r is not None:
                    return r
            return None
        # stage 3: atom / nil payloads
        for binds in blocked:
            for var, value in binds:
                if var.kind != "val":
                    continue
                tg = s.tag_of(var)
                if tg in (ATOM, LIST):
                    return self.enumerate_payload(s, var, tg)
        # stage 4: numeric disequalities and arithmetic
        return self.arith(s, blocked)

    def _all_vars(self, s):
        # vars reachable from constraints; cached per store
        cache = getattr(self, "_vcache", None)
        if cache is not None and cache[0] is s:
            return cache[1]
        found = {}
        for nm in s.nms:
            for t in (nm.term, nm.pat):
                for v in term_vars(s.resolve(t)):
                    found.setdefault(v.id, v)
        for j in s.joins:
            for t in (j.result,) + j.operands:
                t = s.walk(t)
                if isinstance(t, Var):
                    found.setdefault(t.id, t)
        for c in s._norm_lins():
            for v, _ in c.coeffs:
                found.setdefault(v.id, v)
                owner = s.walk(v.owner) if v.owner is not None else None
                if isinstance(owner, Var):
                    found.setdefault(owner.id, owner)
        vals = list(found.values())
        self._vcache = (s, vals)
        return vals

    def instantiate(self, s: ConstraintStore, var: Var):
        d = self.var_depth.get(var.id, 0)
        shapes = [fresh_lit()]
        if d + 1 < self.depth:
            h, t = fresh_var("H"), fresh_var("T")
            shapes.append(Cons(h, t))
            for k in _tuple_arities(s):
                shapes.append(Tuple(tuple(fresh_var("E") for _ in range(k))))
        else:
            self.incomplete = True
        for shape in shapes:
            for v in term_vars(shape):
                self.var_depth[v.id] = d + 1
            s2 = s.unify(var, shape)
            if s2 is None:
                continue
            r = self.search(s2)
            if r is not None:
                return r
        return None

    def open_tags(self, s: ConstraintStore, blocked) -> list:
        out = []
        seen = set()

        def add(t):
            t = s.walk(t)
            if isinstance(t, Var) and t.kind == "tag" and t.id not in seen:
                seen.add(t.id)
                out.append(t)

        for binds in blocked:
            for v, value in binds:
                if v.kind == "tag":
                    add(v)
                elif v.kind == "val" and v.owner is not None:
                    add(v.owner)
                if isinstance(value, Var) and value.kind == "val" and value.owner is not None:
                    add(value.owner)
                elif isinstance(value, Var) and value.kind == "tag":
                    add(value)
        return out

    def arith_tags(self, s: ConstraintStore) -> list:
        out = []
        seen = set()

        def add(t):
            t = s.walk(t)
            if isinstance(t, Var) and t.kind == "tag" and t.id not in seen:
                seen.add(t.id)
                out.append(t)

        for j in s.joins:
            add(j.result)
            for o in j.operands:
                add(o)
        for c in s._norm_lins():
            for v, _ in c.coeffs:
                if v.owner is not None:
                    add(v.owner)
        return out

    def enumerate_payload(self, s: ConstraintStore, var: Var, tg: str):
        if tg == LIST:
            cands = [NIL_MARK]
        else:
            known = _store_atoms(s)
            n_vars = sum(1 for v in self._all_vars(s) if v.kind == "val")
            cands = known + _fresh_atoms(set(known), n_vars + 1)
        for c in cands:
            s2 = s.unify(var, c)
            if s2 is None:
                continue
            r = self.search(s2)
            if r is not None:
                return r
        return None

    def arith(self, s: ConstraintStore, blocked):
        lins = s._norm_lins()
        disj = []
        for binds in blocked:
            options = []
            for var, value in binds:
                value = s.walk(value)
                if isinstance(value, Var):
                    options.append(LinCon.make({var: 1, value: -1}, "!=", 0))
                else:
                    options.append(LinCon.make({var: 1}, "!=", Fraction(value)))
            disj.append(options)
        int_vars = set()
        for c in lins:
            for v, _ in c.coeffs:
                if s.tag_of(v) == INT:
                    int_vars.add(v)
        for options in disj:
            for o in options:
                for v, _ in o.coeffs:
                    if s.tag_of(v) == INT:
                        int_vars.add(v)
        return self._choose(s, lins, disj, 0, [], sorted(int_vars, key=lambda v: v.id))

    def _choose(self, s, lins, disj, i, chosen, int_vars):
        self.tick()
        if i == len(disj):
            pinned = {v for c in chosen for v, _ in c.coeffs}
            dropped: list = []
            core = s._core_lins(pinned, dropped, lins)
            status, model = linarith.solve(core + chosen, int_vars, s.int_bound)
            if status == UNKNOWN:
                self.incomplete = True
            if status != SAT:
                return None
            res = CheckResult(SAT, s, s._extend_model(model, dropped))
            return res if _verify(res) else None
        for o in disj[i]:
            pinned = {v for c in chosen + [o] for v, _ in c.coeffs}
            status, _ = linarith.solve(s._core_lins(pinned, norm=lins) + chosen + [o], (), s.int_bound)
            if status == UNSAT:
                continue
            r = self._choose(s, lins, disj, i + 1, chosen + [o], int_vars)
            if r is not None:
                return r
        return None


def _verify(res: CheckResult) -> bool:
    """Ground every constraint with the witness and check it."""
    s = res.store
    g = ConstraintStore(s.int_bound)
    for nm in s.nms:
        t = res.ground(nm.term)
        pat = s.resolve(nm.pat)
        # global variables of the pattern must be ground too
        trail: list = []
        gp = _ground_globals(res, pat, nm.locals)
        if g._copy()._unify_raw(t, gp, trail, nm.locals):
            return False
    for c in s._norm_lins():
        model = {}
        for v, _ in c.coeffs:
            model[v] = res.model.get(v, 0)
        if not c.holds(model):
            return False
    for j in s.joins:
        ops = [s.domain(o)[0] for o in j.operands]
        r = s.domain(j.result)[0]
        if r != (INT if all(o == INT for o in ops) else FLOAT):
            return False
    return True


def _ground_globals(res: CheckResult, pat, locals_):
    s = res.store
    pat = s.walk(pat)
    if isinstance(pat, Var):
        if pat.id in locals_:
            return pat
        return res.ground(pat) if pat.kind == "term" else pat
    if isinstance(pat, Lit):
        tag = s.walk(pat.tag)
        if isinstance(tag, Var) and tag.id not in locals_:
            tag = s.domain(tag)[0]
        val = s.walk(pat.value)
        if isinstance(val, Var) and val.id not in locals_:
            if val in res.model:
                m = res.model[val]
                val = int(m) if tag == INT else Fraction(m)
            else:
                val = res.ground(Lit(tag, val)).value if isinstance(tag, str) else val
        return Lit(tag, val)
    if isinstance(pat, Cons):
        return Cons(_ground_globals(res, pat.head, locals_), _ground_globals(res, pat.tail, locals_))
    if isinstance(pat, Tuple):
        return Tuple(tuple(_ground_globals(res, e, locals_) for e in pat.elems))
    return pat


# -- residual answers -------------------------------------------------------------

@dataclass
class ResidualAnswer:
    """Input skeleton plus projected constraints, renderable in fact notation."""

    inputs: list
    tag_excl: list  # (tag var, [tags])
    nms: list  # NotMatch with resolved term/pat
    lins: list  # LinCon over payload vars
    joins: list
    extra: dict = field(default_factory=dict)  # name -> value (e.g. Err)

    def variables(self) -> list:
        order: dict = {}
        for t in self.inputs:
            for v in term_vars(t):
                order.setdefault(v.id, v)
        return list(order.values())

    def _items(self):
        """Constraints in display order: per variable, by kind."""
        first = {v.id: i for i, v in enumerate(self.variables())}
        keyed = []
        for tv, tags in self.tag_excl:
            keyed.append(((first.get(tv.id, 1 << 30), 0, 0), ("tag", tv, tags)))
        for n, nm in enumerate(self.nms):
            vs = [first[v.id] for v in term_vars(nm.term) if v.id in first]
            keyed.append(((min(vs, default=1 << 30), 1, -n), ("nm", nm)))
        for n, c in enumerate(self.lins):
            vs = [first[v.id] for v, _ in c.coeffs if v.id in first]
            keyed.append(((min(vs, default=1 << 30), 2, n), ("lin", c)))
        for n, j in enumerate(self.joins):
            keyed.append(((1 << 30, 3, n), ("join", j)))
        keyed.sort(key=lambda kv: kv[0])
        return [item for _, item in keyed]

    def render(self) -> tuple[str, list[str]]:
        """(``In=[...]``, [constraint strings]) with readable variable names."""
        items = self._items()
        counts: dict = {}
        seen_order: list = []

        def note(v):
            if v.id not in counts:
                seen_order.append(v)
            counts[v.id] = counts.get(v.id, 0) + 1

        for t in self.inputs:
            for v in term_vars(t):
                note(v)
        for item in items:
            for v in _item_vars(item):
                note(v)
        names: dict = {}
        used: set = set()
        for v in seen_order:
            base = _name_base(v.hint, v.kind)
            if counts[v.id] == 1:
                base = "_" + base
            name, k = base, 2
            while name in used:
                name = f"{base}{k}"
                k += 1
            used.add(name)
            names[v.id] = name
        from .terms import format_term
        head = "In=[" + ",".join(format_term(t, names) for t in self.inputs) + "]"
        return head, [_render_item(item, names) for item in items]

    def text_lines(self) -> list[str]:
        head, cons = self.render()
        lines = [head]
        for k, v in self.extra.items():
            lines.append(f"{k}={v}")
        if cons:
            lines.append(", ".join(cons))
        return [line + ("," if i < len(lines) - 1 else "") for i, line in enumerate(lines)]

    def admits(self, ground_inputs) -> bool:
        """Whether ground inputs satisfy the skeleton and every shown constraint."""
        binding: dict = {}
        if len(ground_inputs) != len(self.inputs):
            return False
        for sk, g in zip(self.inputs, ground_inputs):
            if not _match_ground(sk, g, binding):
                return False
        for tv, tags in self.tag_excl:
            if binding.get(tv.id) in tags:
                return False
        for nm in self.nms:
            t = _subst_ground(nm.term, binding)
            p = _subst_ground(nm.pat, binding)
            if _match_ground(p, t, {}, nm.locals):
                return False
        for c in self.lins:
            if not c.holds({v: binding[v.id] for v, _ in c.coeffs}):
                return False
        return True


def _match_ground(pat, g, binding: dict, only=None) -> bool:
    """One-way matching of a (partially) symbolic term against a ground term."""
    if isinstance(pat, Var):
        if only is not None and pat.id not in only:
            return False
        if pat.id in binding:
            return _ground_eq(binding[pat.id], g)
        binding[pat.id] = g
        return True
    if isinstance(pat, Lit):
        if not isinstance(g, Lit):
            return False
        return _match_ground(pat.tag, g.tag, binding, only) and _match_ground(pat.value, g.value, binding, only)
    if isinstance(pat, Cons):
        return isinstance(g, Cons) and _match_ground(pat.head, g.head, binding, only) and \
            _match_ground(pat.tail, g.tail, binding, only)
    if isinstance(pat, Tuple):
        return isinstance(g, Tuple) and len(pat.elems) == len(g.elems) and all(
            _match_ground(p, x, binding, only) for p, x in zip(pat.elems, g.elems))
    if isinstance(pat, ErrorVal):
        return pat == g
    return type(pat) is type(g) and pat == g


def _ground_eq(a, b) -> bool:
    return type(a) is type(b) and a == b


def _subst_ground(t, binding):
    if isinstance(t, Var):
        return binding.get(t.id, t)
    if isinstance(t, Lit):
        return Lit(_subst_ground(t.tag, binding), _subst_ground(t.value, binding))
    if isinstance(t, Cons):
        return Cons(_subst_ground(t.head, binding), _subst_ground(t.tail, binding))
    if isinstance(t, Tuple):
        return Tuple(tuple(_subst_ground(e, binding) for e in t.elems))
    return t


def _name_base(hint: str, kind: str) -> str:
    base = "".join(c for c in hint if c.isalnum() or c == "_").lstrip("_")
    if not base:
        base = {"tag": "Type", "val": "V"}.get(kind, "X")
    if base[0].isdigit():
        base = "X" + base
    return base[0].upper() + base[1:]


def _item_vars(item):
    kind = item[0]
    if kind == "tag":
        return [item[1]]
    if kind == "nm":
        return list(term_vars(item[1].term)) + list(term_vars(item[1].pat))
    if kind == "lin":
        return [v for v, _ in item[1].coeffs]
    j = item[1]
    return [t for t in (j.result,) + j.operands if isinstance(t, Var)]


def _render_item(item, names) -> str:
    from .terms import format_term
    kind = item[0]
    if kind == "tag":
        return ", ".join(f"dif({names[item[1].id]},{t})" for t in item[2])
    if kind == "nm":
        nm = item[1]
        return f"dif({format_term(nm.term, names)},{format_term(nm.pat, names)})"
    if kind == "lin":
        return render_lin(item[1], names)
    j = item[1]
    nm = lambda t: names.get(t.id, "_") if isinstance(t, Var) else t
    return f"num_join({nm(j.result)},[{','.join(nm(o) for o in j.operands)}])"


def render_lin(c: LinCon, names) -> str:
    coeffs = list(c.coeffs)
    rhs = c.rhs
    rel = {"=": "=", "!=": "=\\=", "<": "<", "<=": "=<"}[c.rel]
    if coeffs and all(k < 0 for _, k in coeffs) and c.rel in ("<", "<="):
        coeffs = [(v, -k) for v, k in coeffs]
        rhs = -rhs
        rel = {"<": ">", "=<": ">="}[rel]
    parts = []
    for i, (v, k) in enumerate(coeffs):
        name = names.get(v.id, f"_V{v.id}")
        mag = abs(k)
        term = name if mag == 1 else f"{_num(mag)}*{name}"
        if i == 0:
            parts.append(("-" if k < 0 else "") + term)
        else:
            parts.append(("- " if k < 0 else "+ ") + term)
    return f"{' '.join(parts)} {rel} {_num(rhs)}"


def _num(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _nm_key(t, p, locals_) -> tuple:
    """Identity of a non-match constraint up to renaming of its locals."""
    order: dict = {}

    def canon(x):
        if isinstance(x, Var):
            if x.id in locals_:
                return ("local", order.setdefault(x.id, len(order)))
            return ("var", x.id)
        if isinstance(x, Lit):
            return ("lit", canon(x.tag), canon(x.value))
        if isinstance(x, Cons):
            return ("cons", canon(x.head), canon(x.tail))
        if isinstance(x, Tuple):
            return ("tuple",) + tuple(canon(e) for e in x.elems)
        return ("const", type(x).__name__, x)

    return canon(t), canon(p)


def residual(s: ConstraintStore, inputs, extra: dict | None = None) -> ResidualAnswer:
    """Project the store onto the variables reachable from ``inputs``."""
    resolved = [s.resolve(t) for t in inputs]
    reach: dict = {}
    for t in resolved:
        for v in term_vars(t):
            reach.setdefault(v.id, v)
    tag_excl = []
    for v in list(reach.values()):
        if v.kind == "tag" and v.id in s.excl:
            tags = [t for t in TAGS if t in s.excl[v.id]]
            if tags:
                tag_excl.append((v, tags))
    nms = []
    seen_nm: set = set()
    for nm in s.nms:
        t, p = s.resolve(nm.term), s.resolve(nm.pat)
        globals_ = [v for v in list(term_vars(t)) + list(term_vars(p)) if v.id not in nm.locals]
        if globals_ and all(v.id in reach for v in globals_):
            key = _nm_key(t, p, nm.locals)
            if key not in seen_nm:
                seen_nm.add(key)
                nms.append(NotMatch(t, p, nm.locals))
    lins = []
    if s.lins:
        keep = {v for v in reach.values() if v.kind == "val"}
        core = s._core_lins(keep)
        lins = [c for c in linarith.project(core, keep) if c.coeffs] if core else []
    joins = []
    for j in s.joins:
        ts = [s.walk(t) for t in (j.result,) + j.operands]
        if all(not isinstance(t, Var) or t.id in reach for t in ts):
            joins.append(Join(ts[0], tuple(ts[1:])))
    return ResidualAnswer(resolved, tag_excl, nms, lins, joins, dict(extra or {}))
