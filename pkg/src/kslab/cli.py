"""Command line front end.

Every subcommand prints a machine-readable report to stdout.  Exit codes
form a stable contract: 0 on success, 2 when a verification check fails,
1 on usage or input errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from typing import Any, Sequence

from .errors import VerificationError
from .experiment import evaluate_experiment, ingest_correlators
from .fine_model import run_fine_suite
from .hv_oracle import (
    bruteforce_report,
    ghz_certificate,
    peres_mermin_certificate,
    verify_hvkn,
)
from .inequalities import (
    multipartite_bound,
    multipartite_report,
    scan,
    scan_to_csv,
    scan_to_json,
    two_partite_report,
)
from .pauli import LambdaIndex, lambda_element, pauli_mul, verify_sum_identities
from .states import parse_state_spec

EXIT_PASS = 0
EXIT_USAGE = 1
EXIT_VERIFICATION = 2

_KIND_NAMES = {"two": "two-partite", "multi": "multipartite"}
_IDENTITY_RANGE = range(2, 9)
_HVKN_RANGE = range(2, 9)

Payload = dict[str, Any] | None


class _Parser(argparse.ArgumentParser):
    """Parser whose usage failures exit 1 instead of argparse's default 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _cmd_group(args: argparse.Namespace) -> tuple[Payload, bool]:
    n = args.n
    order = 1 << n
    elements = [lambda_element(LambdaIndex(n, p)) for p in range(order)]
    closure = True
    first_break = None
    for p in range(order):
        for q in range(order):
            if pauli_mul(elements[p], elements[q]) != elements[p ^ q]:
                closure = False
                first_break = {"p": p, "q": q}
                break
        if not closure:
            break
    payload: dict[str, Any] = {
        "n": n,
        "order": order,
        "closure": closure,
        "elements": [
            {"p": p, "word": e.to_text()} for p, e in enumerate(elements)
        ],
    }
    if first_break is not None:
        payload["first_break"] = first_break
    return payload, closure


def _cmd_bound(args: argparse.Namespace) -> tuple[Payload, bool]:
    payload: dict[str, Any] = {"n": args.n, "bound": multipartite_bound(args.n)}
    if args.bruteforce:
        report = bruteforce_report(args.n, workers=args.workers)
        payload.update(report.to_dict())
        payload["agree"] = report.bound_bruteforce == report.bound_formula
    return payload, True


def _cmd_violate(args: argparse.Namespace) -> tuple[Payload, bool]:
    state = parse_state_spec(args.state)
    kind = args.kind or ("two" if state.n == 2 else "multi")
    if kind == "two":
        report = two_partite_report(state)
        payload = {"state": args.state, **report.to_dict()}
        payload["fidelity"] = report.fidelity
    else:
        report = multipartite_report(state)
        payload = {"state": args.state, **report.to_dict()}
    return payload, True


def _cmd_scan(args: argparse.Namespace) -> tuple[Payload, bool]:
    rows = scan(args.n_min, args.n_max)
    text = scan_to_csv(rows) if args.format == "csv" else scan_to_json(rows)
    sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return None, True


def _cmd_check(args: argparse.Namespace) -> tuple[Payload, bool]:
    with open(args.file, encoding="utf-8") as handle:
        records = ingest_correlators(handle)
    if not records:
        raise ValueError(f"no correlator rows in {args.file!r}")
    report = evaluate_experiment(
        records, _KIND_NAMES[args.kind], len(records[0].letters), k=args.k
    )
    return {"file": args.file, "k": args.k, **report.to_dict()}, True


def _cmd_verify(args: argparse.Namespace) -> tuple[Payload, bool]:
    if args.suite == "identities":
        reports = [verify_sum_identities(n) for n in _IDENTITY_RANGE]
        ok = all(r.ok for r in reports)
        detail = [dataclasses.asdict(r) for r in reports]
    elif args.suite == "hvkn":
        reports = [verify_hvkn(n) for n in _HVKN_RANGE]
        ok = all(r.ok for r in reports)
        detail = [r.to_dict() for r in reports]
    elif args.suite == "fine":
        suite = run_fine_suite()
        return suite, bool(suite["ok"])
    else:
        certificates = [peres_mermin_certificate(), ghz_certificate()]
        ok = all(c.satisfying_count == 0 for c in certificates)
        detail = [c.to_dict() for c in certificates]
    return {"suite": args.suite, "ok": ok, "reports": detail}, ok


_HANDLERS = {
    "group": _cmd_group,
    "bound": _cmd_bound,
    "violate": _cmd_violate,
    "scan": _cmd_scan,
    "check": _cmd_check,
    "verify": _cmd_verify,
}


def build_parser() -> _Parser:
    parser = _Parser(
        prog="kslab",
        description="Kochen-Specker inequality laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    group = sub.add_parser("group", help="sign-group table with a closure check")
    group.add_argument("--n", type=int, required=True, help="number of sites")

    bound = sub.add_parser("bound", help="classical bound for n sites")
    bound.add_argument("--n", type=int, required=True, help="number of sites")
    bound.add_argument(
        "--bruteforce",
        action="store_true",
        help="also enumerate every assignment and compare",
    )
    bound.add_argument(
        "--workers", type=int, default=None, help="parallel workers for the sweep"
    )

    violate = sub.add_parser("violate", help="evaluate an inequality on a state")
    violate.add_argument(
        "--state",
        required=True,
        help="ghz:n=5,alpha=0.6,beta=0.8 | product:+++++ | "
        "werner:lambda=0.5 | dense:@file",
    )
    violate.add_argument(
        "--kind",
        choices=sorted(_KIND_NAMES),
        default=None,
        help="inequality family (default: two when n = 2, multi otherwise)",
    )

    scan_cmd = sub.add_parser("scan", help="GHZ and product-state reports over a range")
    scan_cmd.add_argument("--from", dest="n_min", type=int, required=True)
    scan_cmd.add_argument("--to", dest="n_max", type=int, required=True)
    scan_cmd.add_argument("--format", choices=("csv", "json"), default="csv")

    check = sub.add_parser("check", help="evaluate measured correlators from a CSV")
    check.add_argument("--file", required=True, help="CSV with word,value,sigma rows")
    check.add_argument("--kind", choices=sorted(_KIND_NAMES), required=True)
    check.add_argument(
        "--k", type=float, default=3.0, help="significance threshold in sigmas"
    )

    verify = sub.add_parser("verify", help="run a built-in verification suite")
    verify.add_argument(
        "--suite",
        choices=("identities", "hvkn", "fine", "certificates"),
        required=True,
    )
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        payload, ok = _HANDLERS[args.command](args)
    except VerificationError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if payload is not None:
        print(json.dumps(payload, indent=2))
    return EXIT_PASS if ok else EXIT_VERIFICATION


if __name__ == "__main__":
    sys.exit(main())
