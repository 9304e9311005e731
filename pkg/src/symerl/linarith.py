"""Exact linear arithmetic over the rationals, with bounded integer search.

Constraints have the form ``sum(c_i * x_i) REL rhs`` with ``REL`` one of
``=``, ``!=``, ``<``, ``<=``; variables are hashable keys, coefficients and
right-hand sides are ``Fraction``.  Equalities are removed by Gaussian
elimination, inequalities by Fourier-Motzkin elimination, and disequalities
are split into ``<`` / ``>`` at check time.  Integer variables are handled by
taking the rational model when it is already integral, and otherwise by
enumerating each integer variable over ``[-bound, bound]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

SAT, UNSAT, UNKNOWN = "sat", "unsat", "unknown"
RELS = ("=", "!=", "<", "<=")
DEFAULT_INT_BOUND = 64


@dataclass(frozen=True)
class LinCon:
    coeffs: tuple  # sorted ((var, Fraction), ...), no zero entries
    rel: str
    rhs: Fraction

    @staticmethod
    def make(coeffs, rel: str, rhs) -> "LinCon":
        if rel not in RELS:
            raise ValueError(f"bad relation {rel!r}")
        acc: dict = {}
        for v, c in (coeffs.items() if isinstance(coeffs, dict) else coeffs):
            acc[v] = acc.get(v, 0) + Fraction(c)
        items = tuple(sorted(((v, c) for v, c in acc.items() if c != 0), key=lambda vc: repr(vc[0])))
        return LinCon(items, rel, Fraction(rhs))

    @property
    def vars(self) -> set:
        return {v for v, _ in self.coeffs}

    def holds(self, model) -> bool:
        lhs = sum((c * Fraction(model[v]) for v, c in self.coeffs), Fraction(0))
        return _cmp(lhs, self.rel, self.rhs)

    def substitute(self, values: dict) -> "LinCon":
        rhs = self.rhs
        out = []
        for v, c in self.coeffs:
            if v in values:
                rhs -= c * Fraction(values[v])
            else:
                out.append((v, c))
        return LinCon(tuple(out), self.rel, rhs)


def _cmp(lhs, rel, rhs) -> bool:
    if rel == "=":
        return lhs == rhs
    if rel == "!=":
        return lhs != rhs
    if rel == "<":
        return lhs < rhs
    return lhs <= rhs


# An inequality row: (coeffs dict, rhs, strict) meaning sum < rhs (strict) or <= rhs.
Row = tuple


def _eliminate_equalities(cons: list[LinCon]):
    """Solve equalities; returns (defs, remaining rows) or None when inconsistent.

    ``defs`` is an ordered list of (var, coeffs, const) meaning
    ``var = const - sum(coeffs)`` in terms of variables defined later or free.
    """
    solved: dict = {}  # var -> (dict coeffs over free vars, const)

    def subst(coeffs: dict, const: Fraction):
        out: dict = {}
        for v, c in coeffs.items():
            if v in solved:
                dc, dk = solved[v]
                const -= c * dk
                for w, cw in dc.items():
                    out[w] = out.get(w, 0) - c * cw
            else:
                out[v] = out.get(v, 0) + c
        return {v: c for v, c in out.items() if c != 0}, const

    for con in cons:
        if con.rel != "=":
            continue
        coeffs, const = subst(dict(con.coeffs), con.rhs)
        if not coeffs:
            if const != 0:
                return None
            continue
        pivot = next(iter(coeffs))
        pc = coeffs.pop(pivot)
        # pivot = const/pc - sum(c/pc * w)
        new_c = {w: c / pc for w, c in coeffs.items()}
        new_k = const / pc
        for v, (dc, dk) in list(solved.items()):
            if pivot in dc:
                f = dc.pop(pivot)
                dk = dk - f * new_k
                for w, cw in new_c.items():
                    dc[w] = dc.get(w, 0) - f * cw
                solved[v] = ({w: c for w, c in dc.items() if c != 0}, dk)
        solved[pivot] = (new_c, new_k)

    rows = []
    for con in cons:
        if con.rel == "=":
            continue
        coeffs, const = subst(dict(con.coeffs), con.rhs)
        rows.append((coeffs, const, con.rel))
    return solved, rows


def _to_ineq(rows) -> list[Row] | None:
    out = []
    for coeffs, rhs, rel in rows:
        if rel == "!=":
            raise ValueError("disequalities must be split before elimination")
        strict = rel == "<"
        if not coeffs:
            if not _cmp(Fraction(0), rel, rhs):
                return None
            continue
        out.append((coeffs, rhs, strict))
    return out


def _fm(rows: list[Row], order: list) -> list[list[Row]] | None:
    """Fourier-Motzkin elimination; returns the row set at each stage or None if unsat."""
    stages = [rows]
    current = rows
    for x in order:
        pos, neg, rest = [], [], []
        for r in current:
            c = r[0].get(x, 0)
            (pos if c > 0 else neg if c < 0 else rest).append(r)
        seen = set()
        new = list(rest)
        for pc, pk, ps in pos:
            a = pc[x]
            for nc, nk, ns in neg:
                b = -nc[x]
                coeffs: dict = {}
                for w, c in pc.items():
                    if w != x:
                        coeffs[w] = coeffs.get(w, 0) + c / a
                for w, c in nc.items():
                    if w != x:
                        coeffs[w] = coeffs.get(w, 0) + c / b
                coeffs = {w: c for w, c in coeffs.items() if c != 0}
                rhs = pk / a + nk / b
                strict = ps or ns
                if not coeffs:
                    if strict and not (0 < rhs) or not strict and not (0 <= rhs):
                        return None
                    continue
                key = (tuple(sorted(coeffs.items(), key=lambda vc: repr(vc[0]))), rhs, strict)
                if key in seen:
                    continue
                seen.add(key)
                new.append((coeffs, rhs, strict))
        stages.append(new)
        current = new
    return stages


def _pick(lo, lo_strict, hi, hi_strict):
    """A value in the interval, preferring integers close to zero."""
    def ok(x):
        if lo is not None and (x < lo or (lo_strict and x == lo)):
            return False
        if hi is not None and (x > hi or (hi_strict and x == hi)):
            return False
        return True

    if ok(0):
        return Fraction(0)
    if lo is not None and lo > 0:
        cand = Fraction(math.floor(lo) + 1) if lo_strict or lo != math.floor(lo) else Fraction(lo)
        if lo_strict and cand == lo:
            cand += 1
        if ok(cand):
            return cand
    if hi is not None and hi < 0:
        cand = Fraction(math.ceil(hi) - 1) if hi_strict or hi != math.ceil(hi) else Fraction(hi)
        if hi_strict and cand == hi:
            cand -= 1
        if ok(cand):
            return cand
    if lo is not None and hi is not None:
        return (lo + hi) / 2
    if lo is not None:
        return lo + 1
    return hi - 1


def _bounds(rows: list[Row], x, model):
    lo = hi = None
    lo_s = hi_s = False
    for coeffs, rhs, strict in rows:
        c = coeffs.get(x, 0)
        if c == 0:
            continue
        rest = rhs - sum((cw * model[w] for w, cw in coeffs.items() if w != x), Fraction(0))
        bound = rest / c
        if c > 0:
            if hi is None or bound < hi or (bound == hi and strict):
                hi, hi_s = bound, strict
        else:
            if lo is None or bound > lo or (bound == lo and strict):
                lo, lo_s = bound, strict
    return lo, lo_s, hi, hi_s


def rational_model(cons: Iterable[LinCon]) -> dict | None:
    """A rational model of ``=``, ``<``, ``<=`` constraints, or None if unsatisfiable."""
    cons = list(cons)
    elim = _eliminate_equalities(cons)
    if elim is None:
        return None
    solved, rows = elim
    ineq = _to_ineq(rows)
    if ineq is None:
        return None
    order = []
    for coeffs, _, _ in ineq:
        for v in coeffs:
            if v not in order:
                order.append(v)
    stages = _fm(ineq, order)
    if stages is None:
        return None
    model: dict = {}
    for i in range(len(order) - 1, -1, -1):
        x = order[i]
        lo, lo_s, hi, hi_s = _bounds(stages[i], x, model)
        model[x] = _pick(lo, lo_s, hi, hi_s)
    allvars = set()
    for con in cons:
        allvars |= con.vars
    for v in allvars:
        if v not in model and v not in solved:
            model[v] = Fraction(0)
    for v, (dc, dk) in solved.items():
        for w in dc:
            model.setdefault(w, Fraction(0))
    for v, (dc, dk) in solved.items():
        model[v] = dk - sum((c * model[w] for w, c in dc.items()), Fraction(0))
    return model


def project_interval(cons: list[LinCon], x):
    """Bounds (lo, lo_strict, hi, hi_strict) of ``x`` over the rational solutions."""
    elim = _eliminate_equalities(cons)
    if elim is None:
        return None
    solved, rows = elim
    if x in solved:
        # x is determined by other variables; add its definition as two inequalities
        dc, dk = solved[x]
        coeffs = dict(dc)
        coeffs[x] = Fraction(1)
        rows = rows + [(coeffs, dk, "<="), ({w: -c for w, c in coeffs.items()}, -dk, "<=")]
    ineq = _to_ineq(rows)
    if ineq is None:
        return None
    order = []
    for coeffs, _, _ in ineq:
        for v in coeffs:
            if v != x and v not in order:
                order.append(v)
    stages = _fm(ineq, order)
    if stages is None:
        return None
    return _bounds(stages[-1], x, {})


def _integral(model: dict, int_vars) -> bool:
    return all(model[v].denominator == 1 for v in int_vars if v in model)


def _int_search(cons: list[LinCon], int_vars: list, bound: int):
    """Enumerate integer values; returns (status, model)."""
    live = [v for v in int_vars if any(v in c.vars for c in cons)]
    model = rational_model(cons)
    if model is None:
        return UNSAT, None
    if _integral(model, live):
        return SAT, model
    if not live:
        return SAT, model
    x = live[0]
    iv = project_interval(cons, x)
    if iv is None:
        return UNSAT, None
    lo, lo_s, hi, hi_s = iv
    complete = True
    if lo is None:
        lo_i, complete = -bound, False
    else:
        lo_i = math.floor(lo) + 1 if lo_s else math.ceil(lo)
    if hi is None:
        hi_i, complete = bound, False
    else:
        hi_i = math.ceil(hi) - 1 if hi_s else math.floor(hi)
    if lo_i < -bound:
        lo_i, complete = -bound, False
    if hi_i > bound:
        hi_i, complete = bound, False
    cands = sorted(range(lo_i, hi_i + 1), key=lambda n: (abs(n), n < 0))
    for n in cands:
        sub = [c.substitute({x: n}) for c in cons]
        if any(not c.coeffs and not _cmp(Fraction(0), c.rel, c.rhs) for c in sub):
            continue
        status, m = _int_search([c for c in sub if c.coeffs], [v for v in live if v != x], bound)
        if status == SAT:
            m = dict(m)
            m[x] = Fraction(n)
            for c in cons:
                for v in c.vars:
                    m.setdefault(v, Fraction(0))
            return SAT, m
        if status == UNKNOWN:
            complete = False
    return (UNSAT if complete else UNKNOWN), None


def solve(cons: Iterable[LinCon], int_vars: Iterable = (), bound: int = DEFAULT_INT_BOUND):
    """Decide a conjunction; returns ``(status, model)``.

    ``unsat`` is only reported when the system has no rational solution or no
    integer solution exists at all (the enumeration covered every candidate);
    if integer candidates outside ``[-bound, bound]`` were skipped the answer
    is ``unknown``.
    """
    cons = list(cons)
    int_vars = list(dict.fromkeys(int_vars))
    for c in cons:
        if not c.coeffs and not _cmp(Fraction(0), c.rel, c.rhs):
            return UNSAT, None
    cons = [c for c in cons if c.coeffs]
    neqs = [c for c in cons if c.rel == "!="]
    rest = [c for c in cons if c.rel != "!="]
    base = rational_model(rest)
    if base is None:
        return UNSAT, None
    return _split(rest, neqs, int_vars, bound, base)


def _split(rest, neqs, int_vars, bound, model):
    if model is not None:
        model = dict(model)
        for c in neqs:
            for v in c.vars:
                model.setdefault(v, Fraction(0))
        for v in int_vars:
            model.setdefault(v, Fraction(0))
    if model is not None and all(c.holds(model) for c in neqs) and _integral(model, int_vars):
        return SAT, model
    if not neqs:
        return _int_search(rest, int_vars, bound)
    # split the first violated (or first) disequality
    pick = next((c for c in neqs if model is None or not c.holds(model)), neqs[0])
    others = [c for c in neqs if c is not pick]
    result = UNSAT
    for side in ("<", ">"):
        if side == "<":
            branch = LinCon(pick.coeffs, "<", pick.rhs)
        else:
            branch = LinCon(tuple((v, -c) for v, c in pick.coeffs), "<", -pick.rhs)
        sub = rest + [branch]
        m = rational_model(sub)
        if m is None:
            continue
        status, m2 = _split(sub, others, int_vars, bound, m)
        if status == SAT:
            return SAT, m2
        if status == UNKNOWN:
            result = UNKNOWN
    return result, None


def project(cons: list[LinCon], keep) -> list[LinCon]:
    """Eliminate every variable not in ``keep`` (exact rational projection).

    Disequalities mentioning eliminated variables are dropped.
    """
    keep = set(keep)
    eqs = [c for c in cons if c.rel == "="]
    others = [c for c in cons if c.rel != "="]
    # Gaussian step: pivot on eliminable variables first
    solved: dict = {}
    remaining_eqs = []
    work = list(eqs)
    while work:
        con = work.pop(0)
        coeffs = dict(con.coeffs)
        rhs = con.rhs
        for v in list(coeffs):
            if v in solved:
                c = coeffs.pop(v)
                dc, dk = solved[v]
                rhs -= c * dk
                for w, cw in dc.items():
                    coeffs[w] = coeffs.get(w, 0) - c * cw
        coeffs = {v: c for v, c in coeffs.items() if c != 0}
        elim = [v for v in coeffs if v not in keep]
        if not elim:
            if coeffs:
                remaining_eqs.append(LinCon.make(coeffs, "=", rhs))
            continue
        p = elim[0]
        pc = coeffs.pop(p)
        d = ({w: c / pc for w, c in coeffs.items()}, rhs / pc)
        for v, (vc, vk) in list(solved.items()):
            if p in vc:
                f = vc.pop(p)
                vk = vk - f * d[1]
                for w, cw in d[0].items():
                    vc[w] = vc.get(w, 0) - f * cw
                solved[v] = ({w: c for w, c in vc.items() if c != 0}, vk)
        solved[p] = d
        remaining_eqs = [LinCon.make(*_sub(c, solved)) for c in remaining_eqs]

    def apply(c: LinCon) -> LinCon:
        return LinCon.make(*_sub(c, solved))

    out = [c for c in (apply(c) for c in remaining_eqs) if c.coeffs]
    ineqs = []
    for c in others:
        c = apply(c)
        if not c.coeffs:
            continue
        if c.rel == "!=":
            if c.vars <= keep:
                out.append(c)
            continue
        ineqs.append((dict(c.coeffs), c.rhs, c.rel == "<"))
    order = []
    for coeffs, _, _ in ineqs:
        for v in coeffs:
            if v not in keep and v not in order:
                order.append(v)
    stages = _fm(ineqs, order) if ineqs else [[]]
    if stages is None:
        return [LinCon((), "<", Fraction(0))]
    for coeffs, rhs, strict in stages[-1]:
        out.append(LinCon.make(coeffs, "<" if strict else "<=", rhs))
    return out


def _sub(c: LinCon, solved: dict):
    coeffs: dict = {}
    rhs = c.rhs
    for v, k in c.coeffs:
        if v in solved:
            dc, dk = solved[v]
            rhs -= k * dk
            for w, cw in dc.items():
                coeffs[w] = coeffs.get(w, 0) - k * cw
        else:
            coeffs[v] = coeffs.get(v, 0) + k
    return coeffs, c.rel, rhs
