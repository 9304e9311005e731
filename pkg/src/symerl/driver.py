"""Verification driver: skeletons, answer confirmation, verdicts and reports."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from .concrete import OutOfFuel, concrete_run
from .frontend import parse_module, parse_term, parse_term_list
from .interpreter import run
from .linarith import DEFAULT_INT_BOUND, SAT, UNSAT
from .store import DEFAULT_WITNESS_DEPTH, ConstraintStore, ResidualAnswer
from .syntax import FunName
from .terms import INT, NIL, Cons, Lit, format_term, fresh_val, fresh_var, reset_fresh
from .translator import FunTable, lookup_fun, translate_module

CONFIRMED = "confirmed"
UNCONFIRMED = "unconfirmed"


@dataclass
class Skeleton:
    inputs: list
    label: str


@dataclass
class Answer:
    error: str
    input: str
    constraints: list
    witness: str | None
    status: str
    residual: ResidualAnswer | None = field(default=None, repr=False, compare=False)
    skeleton: str = field(default="general", compare=False)

    def text_block(self) -> list[str]:
        lines = [self.input, f"Err={self.error}"]
        if self.constraints:
            lines.append(", ".join(self.constraints))
        return [line + ("," if i < len(lines) - 1 else "") for i, line in enumerate(lines)]


@dataclass
class SkeletonStatus:
    label: str
    answers: int
    bound_exhausted: bool

    @property
    def certified(self) -> bool:
        return self.answers == 0 and not self.bound_exhausted


@dataclass
class Verdict:
    function: str
    bound: int
    answers: list
    skeletons: list
    truncated: bool = False
    elapsed: float = 0.0

    @property
    def certified(self) -> bool:
        return not self.answers and not self.truncated and all(s.certified for s in self.skeletons)

    @property
    def exit_code(self) -> int:
        if self.answers:
            return 1
        return 0 if self.certified else 3


# -- skeletons --------------------------------------------------------------------

def general_skeleton(hints) -> Skeleton:
    return Skeleton([fresh_var(h) for h in hints], "general")


def int_list_skeleton(m: int):
    """Proper lists of fresh integers, lengths ``m, m-1, ..., 0``."""
    if m < 0:
        raise ValueError("list length must be non-negative")
    for n in range(m, -1, -1):
        items = [Lit(INT, fresh_val(INT, "N")) for _ in range(n)]
        out = NIL
        for item in reversed(items):
            out = Cons(item, out)
        yield Skeleton([out], f"int-list length {n}")


def term_skeleton(text: str, arity: int) -> Skeleton:
    text = text.strip()
    inputs = parse_term_list(text) if text.startswith("[") else [parse_term(text)]
    if len(inputs) != arity:
        raise ValueError(f"skeleton has {len(inputs)} inputs but the function takes {arity}")
    return Skeleton(inputs, f"term {text}")


def skeletons(spec: str, hints):
    """Expand ``general`` / ``int-list:M`` / ``term:<literal>``."""
    if spec == "general":
        return [general_skeleton(hints)]
    if spec.startswith("int-list:"):
        if len(hints) != 1:
            raise ValueError("int-list skeletons need a function of arity 1")
        return int_list_skeleton(int(spec.split(":", 1)[1]))
    if spec.startswith("term:"):
        return [term_skeleton(spec.split(":", 1)[1], len(hints))]
    raise ValueError(f"unknown skeleton {spec!r}")


# -- confirmation -----------------------------------------------------------------

def concretize(check, inputs) -> list:
    """Ground input list from a ``check_sat`` witness (default policy for holes)."""
    return [check.ground(t) for t in inputs]


def confirm(table: FunTable, fname: FunName, witness, error: str, fuel: int) -> bool:
    try:
        out = concrete_run(table, fname, witness, fuel)
    except OutOfFuel:
        return False
    return out.error == error


def _witness_text(witness) -> str:
    return "[" + ",".join(format_term(t) for t in witness) + "]"


# -- verification -----------------------------------------------------------------

def load(path_or_text, is_text: bool = False) -> FunTable:
    text = path_or_text if is_text else Path(path_or_text).read_text(encoding="utf-8")
    return translate_module(parse_module(text))


def parse_fun(spec: str) -> FunName:
    name, _, arity = spec.rpartition("/")
    if not name or not arity.isdigit():
        raise ValueError(f"expected NAME/ARITY, got {spec!r}")
    return FunName(name.strip("'"), int(arity))


def verify_table(table: FunTable, fname: FunName, bound: int, skeleton: str = "general",
                 max_answers: int | None = None, witness_depth: int = DEFAULT_WITNESS_DEPTH,
                 int_bound: int = DEFAULT_INT_BOUND) -> Verdict:
    reset_fresh()
    start = time.perf_counter()
    params, _ = lookup_fun(table, fname)
    hints = table.functions[fname].param_hints or params
    answers: list[Answer] = []
    statuses: list[SkeletonStatus] = []
    seen: set = set()
    truncated = False
    for sk in skeletons(skeleton, hints):
        outcome = run(table, fname, sk.inputs, bound, ConstraintStore(int_bound))
        count = 0
        for b in outcome:
            if not b.error:
                continue
            check = b.store.check_sat(witness_depth)
            if check.status == UNSAT:
                continue
            res = b.store.residual(sk.inputs)
            head, cons = res.render()
            key = (b.result.name, head, tuple(cons))
            if key in seen:
                continue
            seen.add(key)
            witness, status = None, UNCONFIRMED
            if check.status == SAT:
                ground = concretize(check, sk.inputs)
                witness = _witness_text(ground)
                if confirm(table, fname, ground, b.result.name, bound):
                    status = CONFIRMED
            answers.append(Answer(b.result.name, head, cons, witness, status, res, sk.label))
            count += 1
            if max_answers is not None and len(answers) >= max_answers:
                truncated = True
                break
        statuses.append(SkeletonStatus(sk.label, count, outcome.bound_exhausted))
        if truncated:
            break
    return Verdict(str(fname), bound, answers, statuses, truncated, time.perf_counter() - start)


def verify(module_path, fname, bound: int, skeleton: str = "general", **limits) -> Verdict:
    table = load(module_path)
    if isinstance(fname, str):
        fname = parse_fun(fname)
    return verify_table(table, fname, bound, skeleton, **limits)


# -- reports ----------------------------------------------------------------------

def render_text(v: Verdict) -> str:
    """Answer blocks, one per error; deterministic (no timing information)."""
    out = [f"% {v.function}, bound {v.bound}"]
    for i, a in enumerate(v.answers, 1):
        out.append("")
        wit = f", witness {a.witness}" if a.witness else ""
        out.append(f"% answer {i}: {a.error}, {a.status}{wit}")
        out.extend(a.text_block())
    out.append("")
    for s in v.skeletons:
        state = "certified" if s.certified else ("bound exhausted" if s.bound_exhausted else "errors")
        out.append(f"% {s.label}: {s.answers} answers, {state}")
    if v.certified:
        out.append(f"no errors found: correct up to bound {v.bound}")
    elif v.answers:
        more = " (stopped at --max-answers)" if v.truncated else ""
        out.append(f"{len(v.answers)} error answers{more}")
    else:
        out.append(f"no errors found, but the search was cut by bound {v.bound}")
    return "\n".join(out) + "\n"


def to_json(v: Verdict) -> dict:
    return {
        "function": v.function,
        "bound": v.bound,
        "certified": v.certified,
        "truncated": v.truncated,
        "elapsed": round(v.elapsed, 6),
        "skeletons": [
            {"label": s.label, "answers": s.answers, "bound_exhausted": s.bound_exhausted}
            for s in v.skeletons
        ],
        "answers": [
            {"error": a.error, "input": a.input, "constraints": list(a.constraints),
             "witness": a.witness, "status": a.status}
            for a in v.answers
        ],
    }


def render_json(v: Verdict) -> str:
    return json.dumps(to_json(v), indent=2, ensure_ascii=False) + "\n"


def render(v: Verdict, fmt: str = "text") -> str:
    if fmt == "json":
        return render_json(v)
    if fmt == "text":
        return render_text(v)
    raise ValueError(f"unknown format {fmt!r}")


def read_json(text: str) -> Verdict:
    """Inverse of ``render_json``."""
    d = json.loads(text)
    answers = [Answer(a["error"], a["input"], list(a["constraints"]), a["witness"], a["status"])
               for a in d["answers"]]
    sks = [SkeletonStatus(s["label"], s["answers"], s["bound_exhausted"]) for s in d["skeletons"]]
    return Verdict(d["function"], d["bound"], answers, sks, d["truncated"], d["elapsed"])
