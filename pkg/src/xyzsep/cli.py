"""Command line entry point: ``xyzsep sweep | report | verify | complete``."""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from pathlib import Path

import numpy as np

from . import model, sweep, verify
from .factorization import complete_spec


def _config(args) -> sweep.SweepConfig:
    if args.config:
        cfg = sweep.parse_config(Path(args.config).read_text())
        if args.twice_s is not None:
            raise SystemExit("--twice-s only applies to --fig presets")
    else:
        over = {}
        if args.twice_s is not None:
            over["twice_s"] = args.twice_s
        cfg = sweep.preset(args.fig, **over)
    over = {}
    if getattr(args, "grid", None):
        lo, hi, pts = args.grid.split(",")
        over["grid"] = (float(lo), float(hi), int(pts))
    if getattr(args, "workers", None):
        over["workers"] = args.workers
    if over:
        cfg = sweep.SweepConfig(**{**cfg.__dict__, **over})
    return cfg


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _add_source(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--config", help="key = value sweep configuration file")
    g.add_argument(
        "--fig",
        type=int,
        choices=sorted(sweep.PRESETS),
        help="built-in preset: 1 (s=1/2 uniform), 2 (s=3/2 uniform), 3 (s=3/2 alternating)",
    )
    p.add_argument("--twice-s", type=int, help="override 2s of a --fig preset")


def cmd_sweep(args) -> int:
    cfg = _config(args)
    with _output(args.output) as fh:
        summary = sweep.run_sweep(cfg, fh)
    for t in summary["transitions"]:
        lo, hi = t["between"]
        print(f"parity transition {t['from']:+d} -> {t['to']:+d} in scale ({lo:.6g}, {hi:.6g})", file=sys.stderr)
    for x in summary["flagged"]:
        print(f"near-degenerate sectors at scale {x:.6g} (row flagged)", file=sys.stderr)
    return 0


def cmd_report(args) -> int:
    cfg = _config(args)
    records = sweep.side_limit_report(cfg, epsilon=args.epsilon)
    with _output(args.output) as fh:
        fh.write(sweep.report_jsonl(records) if args.jsonl else sweep.format_report(records))
    return 0 if all(r["pass"] for r in records) else 1


def cmd_verify(args) -> int:
    results = verify.verify_suite(seed=args.seed, quick=args.quick)
    text = verify.results_jsonl(results) if args.jsonl else verify.format_results(results)
    sys.stdout.write(text)
    return 0 if all(r.passed for r in results) else 1


def cmd_complete(args) -> int:
    spec = model.load(args.spec)
    angles = np.array([float(a) for a in args.angles.split(",")])
    if angles.size != spec.n:
        raise SystemExit(f"expected {spec.n} angles, got {angles.size}")
    done = complete_spec(spec.twice_s, spec.vx, spec.vz, angles)
    with _output(args.output) as fh:
        fh.write(model.dumps(done))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xyzsep", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="field sweep of ground-state pair negativities (CSV)")
    _add_source(p)
    p.add_argument("--grid", help="min,max,points override")
    p.add_argument("--workers", type=int, help="worker processes for grid points")
    p.add_argument("-o", "--output", help="CSV file (default: stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="numeric vs analytic side limits at the separability point")
    _add_source(p)
    p.add_argument("--epsilon", type=float, help="side offset (default: epsilon_side of the config)")
    p.add_argument("--jsonl", action="store_true", help="one JSON record per line")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("verify", help="run the self-check suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quick", action="store_true")
    p.add_argument("--jsonl", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("complete", help="derive vy and fields of a spec from angles")
    p.add_argument("--spec", required=True, help="ModelSpec text file (vx, vz, spins are used)")
    p.add_argument("--angles", required=True, help="comma separated angles in radians")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_complete)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
