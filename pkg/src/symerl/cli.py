"""``symerl`` command line."""

from __future__ import annotations

import argparse
import sys

from .driver import load, parse_fun, render, verify_table
from .frontend import ParseError
from .linarith import DEFAULT_INT_BOUND
from .store import DEFAULT_WITNESS_DEPTH
from .translator import FunctionNotFound, dump_facts

EXIT_DIAGNOSTICS = 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="symerl", description="Bounded symbolic verifier for a Core Erlang subset.")
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="search for inputs that crash a function")
    v.add_argument("file", help="module source (.cerl-min)")
    v.add_argument("--fun", required=True, help="entry point as NAME/ARITY")
    v.add_argument("--bound", type=int, required=True, help="step budget (function applications)")
    v.add_argument("--max-answers", type=int, default=None)
    v.add_argument("--skeleton", default="general", help="general | int-list:M | term:<literal>")
    v.add_argument("--format", choices=("text", "json"), default="text")
    v.add_argument("--dump-facts", action="store_true", help="print the translated fundef facts first")
    v.add_argument("--witness-depth", type=int, default=DEFAULT_WITNESS_DEPTH)
    v.add_argument("--int-enum-bound", type=int, default=DEFAULT_INT_BOUND)
    return p


def _diag(msg: str) -> int:
    print(f"symerl: {msg}", file=sys.stderr)
    return EXIT_DIAGNOSTICS


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.bound < 0:
        return _diag("--bound must be non-negative")
    try:
        table = load(args.file)
        fname = parse_fun(args.fun)
        if args.dump_facts:
            sys.stdout.write(dump_facts(table))
        verdict = verify_table(table, fname, args.bound, args.skeleton, args.max_answers,
                               args.witness_depth, args.int_enum_bound)
    except ParseError as err:
        for d in err.diagnostics:
            print(f"{args.file}:{d}", file=sys.stderr)
        return EXIT_DIAGNOSTICS
    except (OSError, ValueError, FunctionNotFound) as err:
        return _diag(str(err).strip('"'))
    sys.stdout.write(render(verdict, args.format))
    return verdict.exit_code


if __name__ == "__main__":
    sys.exit(main())
