"""Bounded symbolic verification for a first-order Core Erlang subset."""

from .concrete import OutOfFuel, RunResult, concrete_run
from .driver import Answer, Verdict, render, verify, verify_table
from .frontend import ParseError, parse_module, pretty_print
from .interpreter import run
from .store import ConstraintStore
from .translator import translate_module

__all__ = [
    "Answer", "ConstraintStore", "OutOfFuel", "ParseError", "RunResult", "Verdict", "concrete_run",
    "parse_module", "pretty_print", "render", "run", "translate_module", "verify",
    "verify_table",
]
__version__ = "0.1.0"
