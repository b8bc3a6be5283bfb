"""Command-line front end.

    pdverify verify safety FILE [--method cegar|ice|pd-houdini] [--pool FILE]
    pdverify verify termination FILE [--method term-ice|term-cegar]
    pdverify solve qlra FILE
    pdverify solve fixpoint FILE [--term-depth N] [--domain-bound D]
    pdverify check PROBLEM CERTIFICATE

Exit codes: 0 witness (safe, terminating, valid; certificate accepted),
10 counter-witness (unsafe, invalid; certificate rejected), 20 unknown or
budget exhausted, 2 input error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence, TextIO

from .cegar import CegarConfig, run_cegar
from .certificates import (
    Accept,
    KindMismatch,
    certificate_for,
    check_certificate,
    parse_certificate,
)
from .fixpoint import FixConfig, ReductionCapExceeded, run_fix
from .houdini import HoudiniConfig, IllFormed, run_pd_houdini
from .ice import IceConfig, run_ice
from .lagrangian import ConfigError, OracleError
from .lra import SortMismatch
from .parsing import default_pool, read_file
from .qlra import FkConfig, run_fk
from .results import Result, Status
from .sexpr import ParseError
from .systems import Dwf, ExplicitTS, Single, Trace, UndecidableCombination, fmt_state
from .termination import TerminationConfig, run_termination

EXIT_WITNESS = 0
EXIT_COUNTER = 10
EXIT_UNKNOWN = 20
EXIT_INPUT = 2

DEFAULT_ITERS = 20
METHODS = {
    "safety": ("cegar", "ice", "pd-houdini"),
    "termination": ("term-cegar", "term-ice"),
    "qlra": ("qlra",),
    "fixpoint": ("fixpoint",),
}
# problem file format by certificate kind
CHECK_FORMATS = {
    "predicates": "system",
    "invariant": "system",
    "trace": "system",
    "ranking": "system",
    "dwf": "system",
    "houdini": "pair",
    "skeleton-sat": "sentence",
    "skeleton-unsat": "sentence",
    "fix-valid": "fixpoint",
    "fix-invalid": "fixpoint",
}


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _common(p: argparse.ArgumentParser, methods: Sequence[str]) -> None:
    p.add_argument("input", help="problem file")
    p.add_argument("--method", choices=methods, default=methods[0])
    p.add_argument("--max-iters", type=int, default=None, help="iteration budget (0 = give up at once)")
    p.add_argument("--seed", type=int, default=None, help="tie-breaking seed (fallback: $PDVERIFY_SEED, then 0)")
    p.add_argument("--emit-trace", metavar="PATH", help="write the iteration trace as JSON")
    p.add_argument("--certificate", metavar="PATH", help="write the certificate s-expression here")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="pdverify", description="Primal-dual verification and solving.")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    verify = sub.add_parser("verify", help="safety or termination of a transition system")
    vsub = verify.add_subparsers(dest="problem", required=True, parser_class=_Parser)
    safety = vsub.add_parser("safety")
    _common(safety, METHODS["safety"])
    safety.add_argument("--pool", metavar="FILE", help="predicate pool (default: interval/octagon-like pool)")
    safety.add_argument("--max-coef", type=int, default=1)
    safety.add_argument("--max-offset", type=int, default=4)
    term = vsub.add_parser("termination")
    _common(term, METHODS["termination"])
    term.add_argument("--max-coef", type=int, default=1)
    term.add_argument("--max-offset", type=int, default=0)

    solve = sub.add_parser("solve", help="quantified arithmetic or fixpoint validity")
    ssub = solve.add_subparsers(dest="problem", required=True, parser_class=_Parser)
    qlra = ssub.add_parser("qlra")
    _common(qlra, METHODS["qlra"])
    fix = ssub.add_parser("fixpoint")
    _common(fix, METHODS["fixpoint"])
    fix.add_argument("--term-depth", type=int, default=1)
    fix.add_argument("--max-coef", type=int, default=1)
    fix.add_argument("--max-offset", type=int, default=2)
    fix.add_argument("--domain-bound", type=int, default=None, help="cross-check with the bounded oracle")

    check = sub.add_parser("check", help="check a certificate against a problem file")
    check.add_argument("input", help="problem file")
    check.add_argument("cert", help="certificate file")
    return top


def resolve_seed(seed: Optional[int], env=os.environ) -> int:
    if seed is not None:
        return seed
    raw = env.get("PDVERIFY_SEED")
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"PDVERIFY_SEED must be an integer, got {raw!r}")


def exit_code(status: Status) -> int:
    return {1: EXIT_WITNESS, -1: EXIT_COUNTER}.get(status.polarity, EXIT_UNKNOWN)


def _nonneg(args, *names) -> None:
    for n in names:
        v = getattr(args, n.replace("-", "_"), None)
        if v is not None and v < 0:
            raise InputError(f"--{n} must be non-negative")


def solve_problem(args) -> tuple[Result, object, Optional[FixConfig]]:
    """Parse the input and run the selected method; returns (result, problem, fix config)."""
    _nonneg(args, "max-iters", "max-coef", "max-offset", "term-depth", "domain-bound")
    seed = resolve_seed(args.seed)
    iters = args.max_iters
    method = args.method
    if method == "pd-houdini":
        problem = read_file(args.input, "pair")
    elif args.problem in ("safety", "termination"):
        problem = read_file(args.input, "system")
    elif args.problem == "qlra":
        problem = read_file(args.input, "sentence")
    else:
        problem = read_file(args.input, "fixpoint")
    if iters == 0:
        return Result(Status.BUDGET, note="zero iteration budget"), problem, None
    iters = iters or DEFAULT_ITERS

    if method == "cegar" or method == "ice":
        pool = read_file(args.pool, "pool") if args.pool else default_pool(problem, args.max_coef, args.max_offset)
        if method == "cegar":
            return run_cegar(problem, pool, CegarConfig(iters, seed)), problem, None
        return run_ice(problem, pool, IceConfig(iters, seed)), problem, None
    if method == "pd-houdini":
        return run_pd_houdini(problem, HoudiniConfig(iters, seed)), problem, None
    if method in ("term-ice", "term-cegar"):
        if not isinstance(problem, ExplicitTS):
            raise InputError("termination needs an explicit system (:states ...)")
        cfg = TerminationConfig(iters, seed, args.max_coef, args.max_offset)
        return run_termination(problem, method.split("-")[1], cfg), problem, None
    if method == "qlra":
        return run_fk(problem, FkConfig(iters, seed)), problem, None
    fix_cfg = FixConfig(iters, seed, args.term_depth, args.max_coef, args.max_offset, domain_bound=args.domain_bound)
    return run_fix(problem, fix_cfg), problem, fix_cfg


def _describe_witness(result: Result):
    w = result.witness
    if w is None:
        return None
    if isinstance(w, Single):
        return str(w.rank)
    if isinstance(w, Dwf):
        return [str(r) for r in w.ranks]
    if isinstance(w, Trace):
        return [fmt_state(s) for s in w.states]
    if result.status.polarity == 1:
        return result.describe_y(w)
    return result.describe_x(w)


def _run_verify(args, out: TextIO) -> int:
    result, problem, fix_cfg = solve_problem(args)
    cert = certificate_for(args.method, result, fix_cfg)
    if args.emit_trace:
        with open(args.emit_trace, "w", encoding="utf-8") as fh:
            json.dump(result.json_trace(), fh, indent=2, default=str)
    lines = [f"verdict: {result.status.value}", f"method: {args.method}", f"iterations: {len(result.trace)}"]
    described = _describe_witness(result)
    if described is not None:
        lines.append(f"witness: {json.dumps(described, default=str)}")
    if result.note:
        lines.append(f"note: {result.note}")
    if cert is not None:
        text = cert.to_text()
        if args.certificate:
            with open(args.certificate, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
            lines.append(f"certificate: {args.certificate}")
        else:
            lines.append(f"certificate: {text}")
    if args.emit_trace:
        lines.append(f"trace: {args.emit_trace}")
    out.write("\n".join(lines) + "\n")
    return exit_code(result.status)


def _run_check(args, out: TextIO) -> int:
    with open(args.cert, encoding="utf-8") as fh:
        cert = parse_certificate(fh.read())
    problem = read_file(args.input, CHECK_FORMATS[cert.kind])
    res = check_certificate(problem, cert)
    if isinstance(res, Accept):
        out.write(f"accept: {cert.kind}\n")
        return EXIT_WITNESS
    detail = "" if res.detail is None else f" {res.detail}"
    out.write(f"reject: {res.reason}{detail}\n")
    return EXIT_COUNTER


INPUT_ERRORS = (InputError, ParseError, OSError, KindMismatch, UndecidableCombination, SortMismatch, IllFormed,
                ConfigError, ValueError, ReductionCapExceeded)


def run_command(argv: Sequence[str], out: TextIO = None, err: TextIO = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(list(argv))
        if args.command == "check":
            return _run_check(args, out)
        return _run_verify(args, out)
    except OracleError as e:
        err.write(f"pdverify: internal oracle failure: {e}\n")
        return EXIT_UNKNOWN
    except INPUT_ERRORS as e:
        err.write(f"pdverify: error: {e}\n")
        return EXIT_INPUT
    except SystemExit as e:  # --help
        return int(e.code or 0)


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
