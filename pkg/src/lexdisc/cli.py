"""Command-line surface: subcommands, file formats, run persistence.

Human-readable summaries go to stdout; machine payloads (JSON run records,
CSV tables) go to files named by flags.  Exit codes: 0 success, 1 check
failure or notable finding, 2 usage error.  All numeric CSV fields use 12
significant digits so repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import metadata

from . import lexmerge, strategies, verify
from .baskets import Basket
from .strategy import disc_of, disc_prefix

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

try:
    VERSION = metadata.version("lexdisc")
except metadata.PackageNotFoundError:  # pragma: no cover - source checkout
    VERSION = "0+unknown"


def _sig12(x: float) -> str:
    return format(float(x), ".12g")


def _canonical(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class RunRecord:
    """Envelope written to JSON files: what ran, with what, and the payload
    plus its checksum so tampering is detectable on re-read."""

    command: str
    parameters: dict
    version: str
    timestamp: str
    payload: dict
    checksum: str = field(default="")

    @staticmethod
    def create(command: str, parameters: dict, payload: dict) -> "RunRecord":
        return RunRecord(
            command=command,
            parameters=parameters,
            version=VERSION,
            timestamp=datetime.now(timezone.utc).isoformat(),
            payload=payload,
            checksum=hashlib.sha256(_canonical(payload).encode()).hexdigest(),
        )

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "parameters": self.parameters,
            "version": self.version,
            "timestamp": self.timestamp,
            "payload": self.payload,
            "checksum": self.checksum,
        }

    @staticmethod
    def from_json(obj: dict) -> "RunRecord":
        rec = RunRecord(
            command=obj["command"],
            parameters=obj["parameters"],
            version=obj["version"],
            timestamp=obj["timestamp"],
            payload=obj["payload"],
            checksum=obj["checksum"],
        )
        digest = hashlib.sha256(_canonical(rec.payload).encode()).hexdigest()
        if digest != rec.checksum:
            raise ValueError("payload checksum mismatch")
        return rec


def _render_basket(b: Basket) -> str:
    return "[" + ",".join(str(e) for e in b.elements) + "]"


def _render_collection(col) -> str:
    return "{" + ",".join(_render_basket(b) for b in col.baskets) + "}"


def _write_json(path: str, record: RunRecord) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_trace(path: str) -> lexmerge.Trace:
    """Accept either a bare trace payload or a RunRecord envelope."""
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    if isinstance(obj, dict) and "payload" in obj:
        obj = RunRecord.from_json(obj).payload
    return lexmerge.trace_from_json(obj)


def cmd_lexmerge(args) -> int:
    n = args.n
    trace = lexmerge.run(n)
    if args.trace:
        for i, col in enumerate(trace.collections):
            print(f"B_{i} = {_render_collection(col)}")
    else:
        print(f"n={n} m={trace.m} stages={len(trace.collections)}")
    print(f"disc = 2^(1-1/{trace.m}) = {_sig12(lexmerge.disc_value(trace))}")
    if args.json:
        record = RunRecord.create(
            "lexmerge", {"n": n}, lexmerge.trace_to_json(trace)
        )
        _write_json(args.json, record)
        print(f"trace written to {args.json}")
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = None
    if args.checks:
        names = [c.strip() for c in args.checks.split(",") if c.strip()]
        unknown = [c for c in names if c not in verify.ALL_CHECKS]
        if unknown:
            print(f"unknown checks: {', '.join(unknown)}", file=sys.stderr)
            return EXIT_USAGE
        checks = names
    if args.trace:
        try:
            trace = _load_trace(args.trace)
        except (OSError, ValueError, KeyError, lexmerge.TraceFormatError) as exc:
            print(f"malformed trace: {exc}", file=sys.stderr)
            return EXIT_USAGE
        runs = [(trace.n, verify.verify_trace(trace, checks=checks))]
    else:
        if not 1 <= args.n_from <= args.n_to:
            print("need 1 <= --from <= --to", file=sys.stderr)
            return EXIT_USAGE
        runs = [
            (n, verify.verify_all(n, checks=checks))
            for n in range(args.n_from, args.n_to + 1)
        ]
    all_ok = True
    for n, reports in runs:
        for rep in reports:
            status = rep.status.name
            line = f"n={n} {rep.check_name}: {status}"
            if not rep.passed:
                all_ok = False
                line += f" witness={rep.witness}"
            if args.verbose or not rep.passed:
                print(line)
    total = sum(len(r) for _, r in runs)
    print(f"{total} checks, {'all passed' if all_ok else 'FAILURES above'}")
    return EXIT_OK if all_ok else EXIT_FAIL


def _bounds_csv_lines(rows) -> list[str]:
    with_optimal = any(r.optimal is not None for r in rows)
    header = "n,lower_bound,lexmerge,dbe_bound" + (",optimal" if with_optimal else "")
    lines = [header]
    for r in rows:
        cells = [
            str(r.n),
            _sig12(r.lower_bound),
            _sig12(r.lexmerge_value),
            _sig12(r.dbe_bound),
        ]
        if with_optimal:
            cells.append(_sig12(r.optimal))
        lines.append(",".join(cells))
    return lines


def cmd_bounds(args) -> int:
    try:
        rows = strategies.bounds_table(
            args.n_from, args.n_to, include_optimal=args.with_optimal, tol=args.tol
        )
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    lines = _bounds_csv_lines(rows)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
        print(f"{len(rows)} rows written to {args.csv}")
    else:
        for line in lines:
            print(line)
    return EXIT_OK


def cmd_optimize(args) -> int:
    from . import optimizer

    try:
        report = optimizer.conjecture_report(args.n, tol=args.tol, jobs=args.jobs)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    print(f"n = {report.n}")
    print(f"optimal      = {_sig12(report.optimal)}")
    print(f"lower_bound  = {_sig12(report.lower_bound)}")
    print(f"lexmerge     = {_sig12(report.lexmerge_value)}")
    print(f"verdict      = {report.verdict}")
    if report.verdict == "below_conjecture":
        print("=" * 60)
        print("FINDING: searched optimum is below the merge-strategy value")
        print("=" * 60)
    if args.csv:
        header = "n,lower_bound,lexmerge,dbe_bound,optimal"
        row = ",".join(
            [
                str(report.n),
                _sig12(report.lower_bound),
                _sig12(report.lexmerge_value),
                _sig12(strategies.ub_dbe(report.n)),
                _sig12(report.optimal),
            ]
        )
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(header + "\n" + row + "\n")
    return EXIT_FAIL if report.verdict == "violates_lower_bound" else EXIT_OK


def cmd_dbe(args) -> int:
    n = args.n
    points = strategies.dbe_points(n)
    print("points: " + ", ".join(_sig12(x) for x in points.points))
    strat = strategies.strategy_from_points(points)
    final = sorted(strat.partition(n))
    print("gaps:   " + ", ".join(_sig12(g) for g in final))
    print(f"disc         = {_sig12(disc_of(strat))}")
    print(f"ub_dbe({n}) = {_sig12(strategies.ub_dbe(n))}")
    if args.prefix_disc:
        for t in range(1, n + 1):
            print(f"prefix {t}: {_sig12(disc_prefix(strat, t))}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lexdisc",
        description="Interval-splitting discrepancy toolkit: merge-strategy "
        "runs, lemma verification, bound tables, and exhaustive search.",
    )
    parser.add_argument("--version", action="version", version=VERSION)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lexmerge", help="run the merge strategy")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trace", action="store_true", help="print every stage")
    p.add_argument("--json", metavar="PATH", help="write JSON trace record")
    p.set_defaults(func=cmd_lexmerge)

    p = sub.add_parser("verify", help="run structural checks")
    p.add_argument("--from", dest="n_from", type=int, default=1)
    p.add_argument("--to", dest="n_to", type=int, default=1)
    p.add_argument("--trace", metavar="PATH", help="verify a stored JSON trace")
    p.add_argument("--checks", help="comma-separated subset of checks")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bounds", help="closed-form bound table")
    p.add_argument("--from", dest="n_from", type=int, required=True)
    p.add_argument("--to", dest="n_to", type=int, required=True)
    p.add_argument("--csv", metavar="PATH")
    p.add_argument("--with-optimal", action="store_true")
    p.add_argument("--tol", type=float, default=1e-7)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("optimize", help="exhaustive minimax search")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv", metavar="PATH")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("dbe", help="logarithmic circle sequence")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--prefix-disc", action="store_true")
    p.set_defaults(func=cmd_dbe)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; pass both through
        return int(exc.code or 0)
    if getattr(args, "n", 1) is not None and getattr(args, "n", 1) < 1:
        print("--n must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
