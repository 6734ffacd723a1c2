"""Command-line front end.

Exit codes: 0 ok, 2 bad input, 3 construction unsupported, 4 malformed
document, 5 bound violation, 6 oracle cap refusal.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from .audit import audit
from .construction import UnsupportedConstructionError, build_strategy, derive_params
from .game import (DeterministicStrategy, StrategyDocumentError, classical_guarantee, evaluate,
                   quantum_upper_bound, trivial_strategy, trivial_win_count)
from .oracle import DEFAULT_CAP, OracleCapError, optimal_classical_value
from .prime_field import NotPrimeError, PrimeModulus, is_prime

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_UNSUPPORTED = 3
EXIT_MALFORMED = 4
EXIT_VIOLATION = 5
EXIT_CAP = 6

log = logging.getLogger("chshq")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _prime(value: int | None, flag: str = "--p") -> int:
    if value is None:
        raise CliError(f"{flag} is required", EXIT_BAD_INPUT)
    try:
        return PrimeModulus(value).p
    except NotPrimeError as exc:
        raise CliError(str(exc), EXIT_BAD_INPUT) from None


def cmd_construct(args) -> int:
    p = _prime(args.p)
    strategy, report = build_strategy(p, threads=args.threads)
    log.info("construction at p=%d took %.2fs", p, report.elapsed)
    text = _dumps(report.to_document(args.timing))
    if args.out:
        out = Path(args.out)
        out.write_text(strategy.dumps() + "\n")
        out.with_suffix(".report.json").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def _load_strategy(path: str) -> DeterministicStrategy:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_MALFORMED) from None
    try:
        return DeterministicStrategy.loads(text)
    except StrategyDocumentError as exc:
        raise CliError(f"{path}: {exc}", EXIT_MALFORMED) from None


def cmd_evaluate(args) -> int:
    if args.strategy and args.builtin:
        raise CliError("give either --strategy or --builtin, not both", EXIT_BAD_INPUT)
    if args.strategy:
        strategy = _load_strategy(args.strategy)
        if args.p is not None and args.p != strategy.q:
            raise CliError(f"document has q={strategy.q} but --p {args.p} was given", EXIT_MALFORMED)
        if not is_prime(strategy.q):
            raise CliError(f"document modulus {strategy.q} is not prime", EXIT_MALFORMED)
    else:
        p = _prime(args.p)
        if args.builtin == "trivial":
            strategy = trivial_strategy(p)
        else:
            strategy, _ = build_strategy(p, with_evaluation=False)
    report = evaluate(strategy, args.threads)
    log.info("evaluated q=%d in %.2fs", report.q, report.elapsed)
    _emit(_dumps(report.to_document(args.timing)), args.out)
    return EXIT_OK


def cmd_audit(args) -> int:
    p = _prime(args.p)
    rep = audit(derive_params(p))
    if args.format == "csv":
        _emit(rep.k_csv(), args.out)
    else:
        _emit(_dumps(rep.to_document()), args.out)
    for v in rep.violations:
        log.error("violation: %s", v)
    return EXIT_VIOLATION if rep.violations else EXIT_OK


def cmd_oracle(args) -> int:
    q = _prime(args.p, "--q")
    try:
        res = optimal_classical_value(q, cap=args.cap, threads=args.threads)
    except OracleCapError as exc:
        raise CliError(str(exc), EXIT_CAP) from None
    _emit(_dumps(res.to_document()), args.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    q = args.p
    if q is None or q < 2:
        raise CliError(f"--q must be an integer >= 2, got {q}", EXIT_BAD_INPUT)
    prime = is_prime(q)
    g = classical_guarantee(q)
    trivial = trivial_win_count(q)
    rows = [
        ("quantum_upper_bound", f"{quantum_upper_bound(q):.12g}",
         "prime" if prime else "formula value only"),
        ("classical_guarantee_win_floor", str(g.win_floor), g.note),
        ("classical_guarantee_probability", f"{g.win_floor / (q * q):.6g}", g.note),
        ("trivial_win_count", str(trivial), "2q - 1"),
        ("trivial_probability", f"{trivial / (q * q):.12g}", "(2q - 1)/q^2"),
    ]
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["quantity", "value", "note"])
        w.writerows(rows)
        _emit(buf.getvalue(), args.out)
    else:
        doc = {
            "q": q,
            "prime": prime,
            "quantum_upper_bound": quantum_upper_bound(q),
            "quantum_upper_bound_note": "prime" if prime else "formula value only",
            "classical_guarantee": g.to_document(),
            "trivial_win_count": trivial,
            "trivial_probability": f"{trivial}/{q * q}",
        }
        _emit(_dumps(doc), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chshq", description="Classical strategies for CHSH_q games.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, out_help="write output here instead of stdout"):
        sp.add_argument("--p", "--q", dest="p", type=int, help="field size (prime)")
        sp.add_argument("--out", help=out_help)
        sp.add_argument("--threads", type=int, default=None, help="worker threads (default: all CPUs)")
        sp.add_argument("--timing", action="store_true", help="include wall-clock timings in the output")
        return sp

    sp = common(sub.add_parser("construct", help="build the explicit strategy"),
                "strategy document path; the report goes next to it as *.report.json")
    sp.set_defaults(func=cmd_construct)

    sp = common(sub.add_parser("evaluate", help="exact win count of a strategy"))
    sp.add_argument("--strategy", help="strategy document (JSON)")
    sp.add_argument("--builtin", choices=["explicit", "trivial"])
    sp.set_defaults(func=cmd_evaluate)

    sp = common(sub.add_parser("audit", help="duplicate-slope census and bounds"))
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    sp.set_defaults(func=cmd_audit)

    sp = common(sub.add_parser("oracle", help="exact optimal classical value for tiny q"))
    sp.add_argument("--cap", type=int, default=DEFAULT_CAP, help="largest q to scan")
    sp.set_defaults(func=cmd_oracle)

    sp = common(sub.add_parser("bounds", help="closed-form reference values"))
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    sp.set_defaults(func=cmd_bounds)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_BAD_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_BAD_INPUT
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except UnsupportedConstructionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED


if __name__ == "__main__":
    sys.exit(main())
