"""``phcov`` command line: run, check and list scenarios."""

import argparse
import sys

from .runner import BUILTINS, EXIT_INPUT_ERROR, run_scenario


def build_parser():
    parser = argparse.ArgumentParser(prog="phcov", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="integrate a scenario and write trajectory/ledger CSV")
    run.add_argument("scenario", help="scenario file")
    run.add_argument("--out-dir", default=".", help="directory for CSV output (default: .)")
    run.add_argument("--dt", type=float, help="override the file's time step")
    run.add_argument("--method", choices=["rk4", "midpoint"], help="override the file's integrator")

    check = sub.add_parser("check", help="run the scenario's checks without writing files")
    check.add_argument("scenario", help="scenario file")
    check.add_argument("--dt", type=float)
    check.add_argument("--method", choices=["rk4", "midpoint"])

    sub.add_parser("list", help="list builtin scenarios")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT_ERROR if exc.code else 0
    if args.command == "list":
        for name, b in BUILTINS.items():
            print(f"{name:22s} {b.description}")
        return 0
    write = args.command == "run"
    code, _ = run_scenario(args.scenario, getattr(args, "out_dir", None), args.dt, args.method, write)
    return code


if __name__ == "__main__":
    sys.exit(main())
