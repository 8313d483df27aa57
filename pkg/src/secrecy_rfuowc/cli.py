"""Command-line entry point: ``secrecy-rfuowc run --config <path> ...``.

Exit status: 0 on full success, 2 when a compared point is flagged, 1 on any
error (bad configuration or a failed grid point).
"""
from __future__ import annotations

import argparse
import sys

from .config import ENGINES, load_config
from .errors import SecrecyError
from .sweep import compare_report, run_sweep, to_bits, write_csv, write_jsonl

EXIT_OK, EXIT_ERROR, EXIT_FLAGGED = 0, 1, 2


def _engines(text: str) -> tuple[str, ...]:
    out = tuple(e.strip() for e in text.split(",") if e.strip())
    bad = [e for e in out if e not in ENGINES]
    if bad or not out:
        raise argparse.ArgumentTypeError(f"engines must be a subset of {','.join(ENGINES)}")
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="secrecy-rfuowc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="evaluate a scenario or sweep from a JSON config")
    run.add_argument("--config", required=True, help="path to the JSON configuration")
    run.add_argument("--seed", type=int, default=0, help="Monte-Carlo seed (default 0)")
    run.add_argument("--mc-samples", type=int, help="override sweep.mc_samples")
    run.add_argument("--engines", type=_engines, help="comma list from analytic,mc")
    run.add_argument("--out", help="output file (default stdout)")
    run.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    run.add_argument("--bits", action="store_true", help="report ASC in bits instead of nats")
    run.add_argument("--workers", type=int, help="worker processes (default: env or CPU count)")
    run.add_argument("--timing", action="store_true", help="fill the ms column (not byte-stable)")
    run.add_argument("--report", help="write the analytic-vs-mc comparison (JSON) here")
    return p


def _run(args) -> int:
    import dataclasses
    import json

    spec = load_config(args.config)
    changes = {}
    if args.engines:
        changes["engines"] = args.engines
    if args.mc_samples is not None:
        changes["mc_samples"] = args.mc_samples
    if changes:
        spec = dataclasses.replace(spec, **changes)
    rows = run_sweep(spec, seed=args.seed, workers=args.workers, timing=args.timing)
    if args.bits:
        rows = to_bits(rows)
    writer = write_csv if args.format == "csv" else write_jsonl
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer(rows, fh)
    else:
        writer(rows, sys.stdout)

    status = EXIT_OK
    if any(r.status != "ok" for r in rows):
        failed = sum(r.status != "ok" for r in rows)
        print(f"{failed} row(s) failed; see the status column", file=sys.stderr)
        status = EXIT_ERROR
    if set(spec.engines) >= {"analytic", "mc"}:
        try:
            report = compare_report(rows)
        except SecrecyError as exc:
            print(f"comparison skipped: {exc}", file=sys.stderr)
        else:
            print(report.render(), file=sys.stderr)
            if args.report:
                with open(args.report, "w") as fh:
                    json.dump(report.to_dict(), fh, indent=2)
            if report.n_flagged and status == EXIT_OK:
                status = EXIT_FLAGGED
    return status


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except (SecrecyError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
