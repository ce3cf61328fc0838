"""Command-line typechecker: `omni-infer check FILE`."""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from typing import Optional

from .congen import GenError, GenState, builtin_env, generate_binding
from .constraint_lang import MatchOrigin, show_constraint
from .core_types import Scheme, free_vars, show_type, types_equivalent
from .solver import InternalError, SolveResult, UnboundVariable, solve
from .surface import Binding, ParseError, Program, parse

EXIT_OK, EXIT_TYPE, EXIT_AMBIGUOUS, EXIT_PARSE, EXIT_INTERNAL = 0, 1, 2, 3, 4
ROOT = "α0"


@dataclass
class BindingResult:
    name: str
    outcome: str  # accept | ambiguous | error
    scheme: Optional[Scheme] = None
    error: Optional[Exception] = None
    inner: list = field(default_factory=list)  # (depth, name, Scheme)
    constraint: object = None
    solve: Optional[SolveResult] = None
    expect: object = None

    @property
    def met(self) -> bool:
        e = self.expect
        if e is None:
            return self.outcome == "accept"
        if e.kind != self.outcome:
            return False
        if e.kind == "accept" and e.scheme is not None:
            return types_equivalent(self.scheme.body, e.scheme)
        return True

    def describe(self) -> str:
        if self.outcome == "accept":
            return f"{self.name} : {show_type(self.scheme.body)}"
        err = self.error
        if self.outcome == "ambiguous" or err.msg.startswith(err.kind):
            text = err.msg
        else:
            text = f"{getattr(err, 'kind', 'error')}: {getattr(err, 'msg', str(err))}"
        span = getattr(err, "span", None)
        if span is not None:
            text += f" (at {span})"
        return f"{self.name} : {text}"


def infer_binding(b: Binding, prog: Program, env: dict, order: str = "left",
                  trace: bool = False, instrument: bool = False) -> BindingResult:
    st = GenState(prog.labels, env=dict(env))
    try:
        c = generate_binding(b.term, st, ROOT)
    except GenError as e:
        err = UnboundVariable(e.msg, MatchOrigin("unbound", e.msg, e.span))
        return BindingResult(b.name, "error", error=err, expect=b.expect)
    res = solve(c, prog.labels, env, order=order, trace=trace, instrument=instrument)
    out = BindingResult(b.name, "error", constraint=c, solve=res, expect=b.expect)
    if res.ok:
        t = res.assignment[ROOT]
        out.outcome = "accept"
        out.scheme = Scheme(tuple(free_vars(t)), t)
        for ul in st.lets:
            if ul.var in res.let_schemes:
                out.inner.append((ul.depth, ul.name, res.let_schemes[ul.var]))
    else:
        out.error = res.error
        out.outcome = "ambiguous" if res.error.kind == "ambiguous" else "error"
    return out


def check_program(prog: Program, order: str = "left", trace: bool = False,
                  instrument: bool = False) -> list:
    """Infer every top-level binding in order; accepted ones extend the environment."""
    env = builtin_env()
    results = []
    for b in prog.bindings:
        r = infer_binding(b, prog, env, order, trace, instrument)
        if r.outcome == "accept":
            env[b.name] = r.scheme
        results.append(r)
    return results


def check_source(src: str, **kw) -> list:
    return check_program(parse(src), **kw)


def _exit_code(results: list) -> int:
    for r in results:
        if isinstance(r.error, InternalError):
            return EXIT_INTERNAL
    for r in results:
        if not r.met:
            return EXIT_AMBIGUOUS if r.outcome == "ambiguous" else EXIT_TYPE
    return EXIT_OK


def _oracle_check(prog: Program, results: list, depth: int, out) -> bool:
    from .oracle import BudgetExceeded, GroundUniverse, Oracle
    universe = GroundUniverse(prog.labels, depth)
    env = builtin_env()
    ok = True
    for b, r in zip(prog.bindings, results):
        oracle = Oracle(universe, prog.labels, env)
        try:
            verdict = oracle.typable(b.term)
        except BudgetExceeded:
            print(f"  oracle {b.name}: skipped (budget)", file=out)
        else:
            agree = verdict == (r.outcome == "accept")
            if not agree:
                ok = False
            print(f"  oracle {b.name}: {'typable' if verdict else 'untypable'}"
                  f"{'' if agree else '  MISMATCH'}", file=out)
        if r.outcome == "accept":
            env[b.name] = r.scheme
    return ok


def run_check(args, out=None) -> int:
    out = out or sys.stdout
    try:
        with open(args.file, encoding="utf-8") as fh:
            src = fh.read()
    except OSError as e:
        print(f"cannot read {args.file}: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    try:
        prog = parse(src)
    except ParseError as e:
        print(f"parse error at {e.line}:{e.col}: {e.msg}", file=out)
        return EXIT_PARSE
    try:
        results = check_program(prog, order=args.order, trace=args.trace_solver)
    except Exception as e:  # an invariant broke somewhere
        print(f"internal error: {e!r}", file=out)
        return EXIT_INTERNAL
    for r in results:
        if args.emit_constraints and r.constraint is not None:
            print(f"(* {r.name} *) {show_constraint(r.constraint)}", file=out)
        if args.trace_solver and r.solve is not None:
            for line in r.solve.trace:
                print(f"  {line}", file=out)
        print(r.describe(), file=out)
        if args.print_types:
            for depth, name, sch in r.inner:
                print(f"{'  ' * depth}{name} : {show_type(sch.body)}", file=out)
        if r.expect is not None and not r.met:
            print(f"  expected {r.expect.kind}{': ' + r.expect.text if r.expect.text else ''}", file=out)
    code = _exit_code(results)
    if args.oracle_check and not _oracle_check(prog, results, args.universe_depth, out):
        return EXIT_INTERNAL
    return code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="omni-infer", description="Omnidirectional type inference for OML.")
    sub = ap.add_subparsers(dest="command", required=True)
    ck = sub.add_parser("check", help="typecheck a .oml file")
    ck.add_argument("file")
    ck.add_argument("--print-types", action="store_true", help="also print inner let schemes")
    ck.add_argument("--emit-constraints", action="store_true", help="dump generated constraints")
    ck.add_argument("--trace-solver", action="store_true", help="print one line per solver rule")
    ck.add_argument("--oracle-check", action="store_true", help="cross-check with the brute-force oracle")
    ck.add_argument("--universe-depth", type=int, default=2)
    ck.add_argument("--order", choices=("left", "right"), default="left",
                    help="conjunct scheduling order")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "check":
        return run_check(args)
    return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
