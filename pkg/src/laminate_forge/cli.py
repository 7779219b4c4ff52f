"""Command-line front door.

Exit status: 0 on success, 1 on usage or parameter errors, 2 when a
construction or verification invariant fails (the invariant is named on
stderr).
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import List, Optional

from .constants import constants_run, detect_bounded
from .errors import InvalidParams, LaminateError
from .laminate import Laminate, SplitCertificate, validate_certificate
from .sets import Params

USAGE, VIOLATION = 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; our contract reserves 2 for invariants
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="laminate-forge", description="Build and check staircase laminates.")
    p.add_argument("--threads", type=_positive_int, default=None,
                   help="worker processes (default: $LAMINATE_FORGE_THREADS or 1)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s3 = sub.add_parser("staircase3d", help="exact 3-D staircase stages")
    s3.add_argument("--jmax", type=_positive_int, required=True)
    s3.add_argument("--epsilon", type=float, default=0.1)
    s3.add_argument("--seed", type=int, default=0)
    s3.add_argument("--out", type=Path, default=Path("report.json"))
    s3.add_argument("--figures", type=Path, default=None, help="write tail plots here (needs matplotlib)")

    sn = sub.add_parser("staircase-nd", help="n-D staircase stages")
    sn.add_argument("--n", type=int, required=True)
    sn.add_argument("--m1", type=int, required=True)
    sn.add_argument("--m2", type=int, required=True)
    sn.add_argument("--jmax", type=_positive_int, required=True)
    sn.add_argument("--epsilon-prime", type=float, default=0.1)
    sn.add_argument("--ctilde", type=float, default=2.0)
    sn.add_argument("--no-bounds", action="store_true", help="skip the stage mass checks")
    sn.add_argument("--seed", type=int, default=0)
    sn.add_argument("--sweep", action="append", default=[], metavar="LEMMA",
                    help="also run a seeded contract sweep for LEMMA (repeatable)")
    sn.add_argument("--samples", type=_positive_int, default=10)
    sn.add_argument("--grid", type=_positive_int, default=6)
    sn.add_argument("--out", type=Path, default=Path("report.json"))
    sn.add_argument("--figures", type=Path, default=None)

    c = sub.add_parser("constants", help="run the constant recurrences")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--ctilde", type=float, required=True)
    c.add_argument("--epsilon-prime", type=float, required=True)
    c.add_argument("--jmax", type=_positive_int, required=True)
    c.add_argument("--out", type=Path, default=Path("trace.csv"))

    v = sub.add_parser("verify", help="check a split certificate against a claimed laminate")
    v.add_argument("--cert", type=Path, required=True)
    v.add_argument("--laminate", type=Path, required=True)

    t = sub.add_parser("tails", help="tail tables of the exact 3-D stages as CSV")
    t.add_argument("--jmax", type=_positive_int, required=True)
    t.add_argument("--out", type=Path, default=Path("tails.csv"))
    return p


def _load_json(path: Path):
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def _figures(report: dict, directory: Optional[Path]) -> None:
    if directory is None:
        return
    try:
        from .report import write_figures
        write_figures(report, directory)
    except ImportError:
        raise UsageError("--figures needs matplotlib (pip install 'artifact[figures]')") from None


def cmd_staircase3d(args) -> int:
    from .report import staircase3d_report, write_report
    from .staircase3d import build_sequence_3d
    stages = build_sequence_3d(args.jmax, args.epsilon, args.threads)
    report = staircase3d_report(stages, args.seed)
    write_report(report, args.out)
    _figures(report, args.figures)
    print(f"wrote {len(stages)} stages to {args.out}")
    return 0


def cmd_staircase_nd(args) -> int:
    from .report import staircase_nd_report, write_report
    from .staircase_nd import build_sequence_nd
    from .sweeps import LEMMAS, run_sweep
    params = Params(args.n, args.m1, args.m2)
    for lemma in args.sweep:
        if lemma not in LEMMAS:
            raise UsageError(f"unknown lemma {lemma!r}; choose from {', '.join(LEMMAS)}")
    stages = build_sequence_nd(params, args.jmax, args.epsilon_prime, args.ctilde,
                               check_bounds=not args.no_bounds, threads=args.threads)
    sweeps = [run_sweep(lem, params, args.samples, args.grid, args.seed, threads=args.threads)
              for lem in args.sweep]
    report = staircase_nd_report(stages, params, args.seed, sweeps)
    write_report(report, args.out)
    _figures(report, args.figures)
    print(f"wrote {len(stages)} stages to {args.out}")
    bad = [s.lemma for s in sweeps if not s.ok]
    if bad:
        print(f"lemma contract not met: {', '.join(bad)}", file=sys.stderr)
        return VIOLATION
    return 0


def cmd_constants(args) -> int:
    trace = constants_run(args.epsilon_prime, args.ctilde, args.n, args.jmax)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["j", "M_j", "max_i_C2", "log10_M_j", "log10_max_i_C2"])
        for row in trace.rows_csv():
            w.writerow([row[0]] + [repr(x) for x in row[1:]])
    rep = detect_bounded(trace)
    print(json.dumps(rep.to_json(), sort_keys=True))
    return 0


def cmd_verify(args) -> int:
    try:
        cert = SplitCertificate.from_json(_load_json(args.cert))
        # the claim is checked against the certificate, not on its own
        lam = Laminate.from_json(_load_json(args.laminate), check=False)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed input: {exc}") from None
    res = validate_certificate(cert, lam)
    if not res:
        print(f"invalid: {res.reason}", file=sys.stderr)
        return VIOLATION
    print("valid")
    return 0


def cmd_tails(args) -> int:
    from .analysis import default_thresholds, tail, tail_inverse
    from .staircase3d import build_sequence_3d
    stages = build_sequence_3d(args.jmax, threads=args.threads)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["stage", "t", "tail", "tail_inverse"])
        for st in stages:
            ts = default_thresholds(st.j)
            for (t, a), (_, b) in zip(tail(st.nu, ts).rows(), tail_inverse(st.nu, ts).rows()):
                w.writerow([st.j, repr(t), repr(a), repr(b)])
    return 0


COMMANDS = {"staircase3d": cmd_staircase3d, "staircase-nd": cmd_staircase_nd,
            "constants": cmd_constants, "verify": cmd_verify, "tails": cmd_tails}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, InvalidParams, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except LaminateError as exc:
        print(f"invariant violated ({type(exc).__name__}): {exc}", file=sys.stderr)
        return VIOLATION


if __name__ == "__main__":
    sys.exit(main())
