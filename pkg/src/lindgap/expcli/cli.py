"""Command line entry point.

Exit codes: 0 success, 2 usage or configuration error, 3 physics integrity
failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..errors import IntegrityError, ResourceError, UsageError
from ..qcore import InvalidStateError
from .config import config_schema, load_config
from .runner import compare, format_report, run_scenario, scan, sweep
from .svgplot import emit_plot
from .tables import read_trajectory

EXIT_OK, EXIT_USAGE, EXIT_INTEGRITY = 0, 2, 3


def _common(p):
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out-dir", help="directory for output files")
    p.add_argument("--self-check", action="store_true",
                   help="cross-validate every engine against its oracle")
    p.add_argument("--tolerance", type=float, help="state validation tolerance")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lindgap",
        description="Exact commuting-environment dynamics of two qubits versus GKSL dephasing.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("simulate", "run the scenario named in the config"),
        ("compare", "microscopic vs Lindblad comparison report"),
        ("sweep", "parameter sweep table"),
        ("scan-threshold", "bisect for the entanglement threshold lambda*"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="JSON configuration file")
        _common(p)
    p = sub.add_parser("plot", help="render a trajectory CSV as SVG")
    p.add_argument("trajectory", help="trajectory CSV written by simulate")
    p.add_argument("--output", help="SVG path (default: next to the CSV)")
    p.add_argument("--series", nargs="+", help="columns to plot")
    p.add_argument("--loglog", action="store_true", help="log-log axes, purity shown as 1 - purity")
    p.add_argument("--out-dir", help="directory for the SVG")
    sub.add_parser("schema", help="print the configuration schema")
    return parser


def _load(args, scenario=None):
    overrides = {"seed": args.seed, "tolerance": args.tolerance, "output.dir": args.out_dir}
    if args.self_check:
        overrides["self_check"] = True
    if scenario is not None:
        overrides["scenario"] = scenario
    return load_config(args.config, overrides)


def _run(args):
    if args.command == "schema":
        print(json.dumps(config_schema(), indent=2))
        return EXIT_OK
    if args.command == "plot":
        traj = read_trajectory(args.trajectory)
        src = Path(args.trajectory)
        out = Path(args.output) if args.output else src.with_suffix(".svg")
        if args.out_dir:
            out = Path(args.out_dir) / out.name
        emit_plot(traj, out, series=args.series, loglog=args.loglog)
        print(out)
        return EXIT_OK
    if args.command == "compare":
        report, files = compare(_load(args, "compare"))
        print(format_report(report))
    elif args.command == "scan-threshold":
        res, files = scan(_load(args, "threshold_scan"))
        print(f"lambda* = {res.lambda_star!r}  bracket = {res.bracket}")
    elif args.command == "sweep":
        summary, files = sweep(_load(args))
        print(summary)
    else:
        _, files = run_scenario(_load(args))
    for f in files:
        print(f)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except IntegrityError as exc:
        print(f"integrity error: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except (UsageError, ResourceError, InvalidStateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
