"""Command-line entry point: ``quadindec <command> ...``.

Exit codes: 0 success, 1 usage error, 2 computation error, 3 verification
failure.  Results go to stdout, diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .cf_engine import PeriodLimitExceeded, expand
from .families import FAMILIES, DomainError, instantiate, verify_instance
from .indec_engine import NoResidueRoot, RangeError, TheoremViolation, analyze
from .quad_core import NotSquarefree, field
from .scanner import ScanConfig, ScanSummary, scan, summarize_file
from .verify_suite import ORACLE_D_LIMIT, GuardrailExceeded, oracle_compare, run_identity_battery

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE, EXIT_VERIFY = 0, 1, 2, 3

log = logging.getLogger("quadindec")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _D(text: str) -> int:
    try:
        D = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if D <= 1:
        raise argparse.ArgumentTypeError(f"D must exceed 1, got {D}")
    return D


def _pos(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="quadindec", description="Indecomposables in real quadratic fields.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    e = sub.add_parser("expand", help="continued fraction of xi")
    e.add_argument("D", type=_D)
    e.add_argument("--max-period", type=_pos)

    a = sub.add_parser("analyze", help="AnalysisRecord as JSON")
    a.add_argument("D", type=_D)
    a.add_argument("--max-period", type=_pos)

    v = sub.add_parser("verify", help="identity battery (and lattice oracle)")
    v.add_argument("D", type=_D)
    v.add_argument("--oracle", action="store_true",
                   help=f"also compare against lattice enumeration (D <= {ORACLE_D_LIMIT})")
    v.add_argument("--max-period", type=_pos)

    s = sub.add_parser("scan", help="search a range of D")
    s.add_argument("--min", dest="d_min", type=_D, required=True)
    s.add_argument("--max", dest="d_max", type=_D, required=True)
    s.add_argument("--class", dest="classes", type=int, action="append", choices=(1, 2, 3))
    s.add_argument("--max-period", type=_pos)
    s.add_argument("--only-counterexamples", action="store_true")
    s.add_argument("--jobs", type=_pos, default=1)
    s.add_argument("--out", required=True)
    s.add_argument("--format", choices=("jsonl", "csv"))
    s.add_argument("--checkpoint")
    s.add_argument("--resume", action="store_true")

    f = sub.add_parser("family", help="instantiate (and verify) a parametric family")
    f.add_argument("family", choices=sorted(FAMILIES))
    f.add_argument("--m", type=_nonneg, required=True)
    f.add_argument("--n", type=_nonneg, required=True)
    f.add_argument("--verify", action="store_true")

    m = sub.add_parser("summarize", help="counts from a results file")
    m.add_argument("--in", dest="inp", required=True)
    m.add_argument("--json", action="store_true", help="full summary as JSON")
    return p


def _print_json(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def cmd_expand(args) -> int:
    exp = expand(field(args.D), args.max_period)
    _print_json({"D": args.D, "u0": exp.u0, "period": list(exp.period), "s": exp.s})
    return EXIT_OK


def cmd_analyze(args) -> int:
    _print_json(analyze(args.D, args.max_period).to_json())
    return EXIT_OK


def cmd_verify(args) -> int:
    rep = run_identity_battery(args.D, args.max_period)
    out = rep.to_json()
    ok = rep.ok
    if args.oracle:
        if args.D > ORACLE_D_LIMIT:
            print(f"oracle skipped: D > {ORACLE_D_LIMIT}", file=sys.stderr)
        else:
            orc = oracle_compare(args.D)
            out["checks"] += orc.to_json()["checks"]
            ok = ok and orc.ok
    out["ok"] = ok
    _print_json(out)
    if not ok:
        names = sorted({c["name"] for c in out["checks"] if not c["pass"]})
        print(f"verification failed: {', '.join(names)}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_scan(args) -> int:
    fmt = args.format or ("csv" if args.out.endswith(".csv") else "jsonl")
    try:
        cfg = ScanConfig(
            d_min=args.d_min, d_max=args.d_max, classes=tuple(args.classes or (1, 2, 3)),
            max_period=args.max_period, only_counterexamples=args.only_counterexamples,
            jobs=args.jobs, out_path=args.out, checkpoint_path=args.checkpoint, fmt=fmt,
        )
    except ValueError as exc:
        raise UsageError(str(exc))

    def progress(done, total):
        log.info("segment %d/%d", done, total)

    summary = scan(cfg, resume=args.resume, progress=progress)
    _print_summary(summary, as_json=True)
    return EXIT_OK


def _print_summary(summary: ScanSummary, as_json: bool) -> None:
    print(summary.counts_line())
    if as_json:
        _print_json(summary.to_json())


def cmd_family(args) -> int:
    inst = instantiate(args.family, args.m, args.n)
    if args.verify:
        verify_instance(inst)
    _print_json(inst.to_json())
    if args.verify:
        if inst.squarefree is False:
            print(f"D = {inst.D} is not squarefree; instance excluded", file=sys.stderr)
        elif not inst.ok:
            print(f"verification failed: {', '.join(inst.failures())}", file=sys.stderr)
            return EXIT_VERIFY
    return EXIT_OK


def cmd_summarize(args) -> int:
    path = Path(args.inp)
    if not path.exists():
        raise UsageError(f"no such file: {path}")
    summary = summarize_file(path)
    side = Path(str(path) + ".skipped")
    if side.exists():
        summary.skipped = sum(1 for ln in side.open() if ln.strip())
    _print_summary(summary, args.json)
    return EXIT_OK


COMMANDS = {
    "expand": cmd_expand,
    "analyze": cmd_analyze,
    "verify": cmd_verify,
    "scan": cmd_scan,
    "family": cmd_family,
    "summarize": cmd_summarize,
}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.cmd](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NotSquarefree as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except (PeriodLimitExceeded, DomainError, RangeError, NoResidueRoot, GuardrailExceeded,
            ArithmeticError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except TheoremViolation as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
