"""``levimag`` command line: run, list and validate scenarios.

Exit codes: 0 ok, 1 input/schema error, 2 numerical error.
"""

from __future__ import annotations

import argparse
import os
import sys

from .scenarios import (
    ScenarioError,
    ScenarioRunError,
    bundled_scenarios,
    resolve_scenario,
    run_scenario,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERICAL = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levimag",
        description="Levitated-magnet spin-mechanics design and simulation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario file or bundled scenario")
    run_p.add_argument("scenario", help="path to a scenario JSON or a bundled name")
    run_p.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
    run_p.add_argument("--out", default=None,
                       help="output directory (default: $LEVIMAG_OUT or cwd)")

    sub.add_parser("list", help="list bundled reproduction scenarios")

    val_p = sub.add_parser("validate", help="validate a scenario file")
    val_p.add_argument("scenario", help="path to a scenario JSON")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "list":
        for name, scenario in sorted(bundled_scenarios().items()):
            print(f"{name:24s} {scenario.get('description', '')}")
        return EXIT_OK

    if args.command == "validate":
        try:
            resolve_scenario(args.scenario)
        except ScenarioError as exc:
            print(f"invalid: {exc}", file=sys.stderr)
            return EXIT_INPUT
        print("ok")
        return EXIT_OK

    out_dir = args.out or os.environ.get("LEVIMAG_OUT") or os.getcwd()
    try:
        scenario = resolve_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        outputs = run_scenario(scenario, out_dir, seed=args.seed)
    except ScenarioError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ScenarioRunError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for name in outputs:
        print(name)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
