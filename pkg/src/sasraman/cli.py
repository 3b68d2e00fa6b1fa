"""Command line interface: ``sasraman run|check|schema|version``."""

import argparse
import json
import sys
import warnings

from . import __version__
from .errors import ConfigError, PhysicsWarning
from .runner import EXIT_CONFIG, EXIT_OK, EXIT_VALIDATION, run_scenario
from .scenario import SCHEMA, parse_scenario
from .selfcheck import CHECKS, format_report, report_json, self_check


def _warning_to_stderr(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sasraman",
        description="Correlated Stokes/anti-Stokes Raman pair simulations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file")
    run.add_argument("scenario", help="path to a JSON scenario")
    run.add_argument("--out-dir", help="output directory (default: scenario out_dir or '.')")
    run.add_argument("--seed", type=int, help="override the scenario seed")
    run.add_argument("--threads", type=int, default=1, help="scans evaluated in parallel")

    check = sub.add_parser("check", help="run the built-in validation suite")
    check.add_argument("--only", nargs="+", choices=sorted(CHECKS), help="subset of checks")
    check.add_argument("--json", action="store_true", help="print the JSON report")

    sub.add_parser("schema", help="print the scenario JSON schema")
    sub.add_parser("version", help="print the package version")
    return parser


def _run(args):
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        scenario = parse_scenario(args.scenario).with_seed(args.seed)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run_scenario(scenario, args.out_dir, threads=args.threads)
    except OSError as exc:
        print(f"error: cannot write {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    for path in result.files:
        print(path)
    for name, v in result.summary["validations"].items():
        if not v["passed"]:
            print(f"validation failed: {name} (value={v['value']!r})", file=sys.stderr)
    return result.status


def _check(args):
    report = self_check(only=args.only)
    print(report_json(report) if args.json else format_report(report))
    return EXIT_OK if report["all_passed"] else EXIT_VALIDATION


def main(argv=None):
    args = build_parser().parse_args(argv)
    warnings.showwarning = _warning_to_stderr
    warnings.simplefilter("always", PhysicsWarning)
    if args.command == "run":
        return _run(args)
    if args.command == "check":
        return _check(args)
    if args.command == "schema":
        print(json.dumps(SCHEMA, indent=2))
        return EXIT_OK
    print(__version__)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
