"""
Command-line front end.

    bipartite-walk simulate --m 100 --n 100 --layout opposite --steps 60 --out curve.csv
    bipartite-walk analyze  --m 100 --n 50
    bipartite-walk sweep    --m 2:50 --n 2:50 --out grid.csv
    bipartite-walk verify

Exit status: 0 on success, 2 on argument or output-path errors, 1 when
``verify`` finds a failing property.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import formatting
from .analysis import Source, VerifyLimits, curve, scan_peak, sweep_fmax, verify, write_curves_csv
from .exceptions import ConfigurationError, DegenerateBasisError
from .reduced import transfer_time
from .walk import Layout, WalkParams, evolve, initial_state, write_state_csv

log = logging.getLogger("bipartite_walk")

FALLBACK_STEPS = 100


class UsageError(Exception):
    """Bad arguments detected after parsing; reported with exit status 2."""


def parse_range(text: str) -> list[int]:
    """``"a:b"`` -> ``[a, ..., b]`` (inclusive); a bare integer is a one-element range."""
    try:
        if ":" in text:
            lo, hi = (int(p) for p in text.split(":", 1))
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or an inclusive range a:b, got {text!r}")
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty range {text!r}: start exceeds end")
    return list(range(lo, hi + 1))


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _add_common(p: argparse.ArgumentParser, walk: bool = True) -> None:
    if walk:
        p.add_argument("--m", type=_positive, required=True, help="vertices in the sender's part")
        p.add_argument("--n", type=_positive, required=True, help="vertices in the other part")
        p.add_argument("--layout", choices=[l.value for l in Layout], default=Layout.OPPOSITE.value)
        p.add_argument("--sender", type=_positive, default=1, help="1-based sender vertex (part 1)")
        p.add_argument("--receiver", type=_positive, default=None,
                       help="1-based receiver vertex (default 2 for same, 1 for opposite)")
    p.add_argument("--out", type=Path, default=None, help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--quiet", action="store_true", help="suppress progress messages")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bipartite-walk",
        description="State transfer by coined quantum walks on complete bipartite graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="fidelity curve from the full simulator")
    _add_common(p)
    p.add_argument("--steps", type=_positive, default=None, help="walk steps (default 4*T_opt)")
    p.add_argument("--source", action="append", choices=[s.value for s in Source],
                   help="curve source; repeat for several (default: full)")
    p.add_argument("--snapshot", type=Path, default=None,
                   help="also write the final state as CSV part,position,coin,re,im")

    p = sub.add_parser("analyze", help="transfer time, F_max and attained fidelity")
    _add_common(p)
    p.add_argument("--curve-steps", type=_positive, default=None,
                   help="include the analytic curve over steps 1..N")
    p.add_argument("--no-scan", action="store_true", help="skip the simulated peak scan")

    p = sub.add_parser("sweep", help="grid of F_max over part sizes")
    _add_common(p, walk=False)
    p.add_argument("--m", type=parse_range, required=True, help="inclusive range a:b")
    p.add_argument("--n", type=parse_range, required=True, help="inclusive range a:b")

    p = sub.add_parser("verify", help="run the cross-validation battery")
    _add_common(p, walk=False)
    p.add_argument("--max-oracle-size", type=_positive, default=VerifyLimits.max_oracle_size,
                   help="largest m*n checked against the dense oracle")
    p.add_argument("--norm-steps", type=_positive, default=VerifyLimits.norm_steps)
    return parser


def _params(args) -> WalkParams:
    try:
        return WalkParams(args.m, args.n, args.layout, args.sender, args.receiver)
    except ConfigurationError as exc:
        raise UsageError(str(exc)) from None


def _default_steps(params: WalkParams) -> int:
    try:
        return 4 * transfer_time(params).T_opt
    except DegenerateBasisError:
        return FALLBACK_STEPS


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        out.write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write output file {str(out)!r}: {exc.strerror or exc}") from None
    log.info("wrote %s", out)


def _flat_csv(d: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in d.items():
        if isinstance(v, (list, dict)):
            continue
        w.writerow([k, formatting.format_float(v) if isinstance(v, float) else v])
    return buf.getvalue()


def _cmd_simulate(args) -> int:
    params = _params(args)
    steps = args.steps or _default_steps(params)
    sources = args.source or [Source.FULL_SIMULATION.value]
    try:
        curves = curve(params, steps, sources)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if (args.format or "csv") == "csv":
        text = write_curves_csv(curves)
    else:
        text = formatting.dumps({
            "m": params.m, "n": params.n, "layout": params.layout.value,
            "sender": params.sender, "receiver": params.receiver, "steps": steps,
            "curves": [{"source": c.source.value,
                        "points": [{"step": s, "fidelity": f} for s, f in c.points]}
                       for c in curves],
        }) + "\n"
    _emit(text, args.out)
    if args.snapshot is not None:
        _emit(write_state_csv(evolve(initial_state(params), steps)), args.snapshot)
    return 0


def _cmd_analyze(args) -> int:
    params = _params(args)
    try:
        report = transfer_time(params, args.curve_steps)
    except DegenerateBasisError as exc:
        raise UsageError(f"no analytic transfer time: {exc}") from None
    doc = report.to_dict()
    if not args.no_scan:
        window = max(4 * report.T_opt, FALLBACK_STEPS)
        peak = scan_peak(params, window)
        doc.update(scan_window=window, first_peak_step=peak.first_step,
                   first_peak_fidelity=peak.first_value, global_peak_step=peak.global_step,
                   global_peak_fidelity=peak.global_value)
    text = formatting.dumps(doc) + "\n" if (args.format or "json") == "json" else _flat_csv(doc)
    _emit(text, args.out)
    return 0


def _cmd_sweep(args) -> int:
    try:
        grid = sweep_fmax(args.m, args.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    text = grid.to_csv() if (args.format or "csv") == "csv" else formatting.dumps(grid.to_dict()) + "\n"
    _emit(text, args.out)
    return 0


def _cmd_verify(args) -> int:
    limits = VerifyLimits(max_oracle_size=args.max_oracle_size, norm_steps=args.norm_steps)
    report = verify(limits, progress=lambda what: log.info("checking %s", what))
    if (args.format or "json") == "json":
        text = formatting.dumps(report.to_dict()) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "passed", "worst_residual", "tolerance", "cases"])
        for c in report.checks:
            w.writerow([c.name, c.passed, formatting.format_float(c.worst),
                        formatting.format_float(c.tolerance), c.cases])
        text = buf.getvalue()
    _emit(text, args.out)
    for c in report.checks:
        if not c.passed:
            print(f"FAIL {c.name}: worst residual {c.worst:.3e} > {c.tolerance:.0e}", file=sys.stderr)
    return 0 if report.passed else 1


COMMANDS = {"simulate": _cmd_simulate, "analyze": _cmd_analyze,
            "sweep": _cmd_sweep, "verify": _cmd_verify}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr, force=True)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
