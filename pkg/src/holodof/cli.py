"""Command line entry point ``holodof``.

    holodof run <config.toml> --out <dir> [--seed U64] [--force] [--workers K]
    holodof dof <config.toml>
    holodof lattice <config.toml>

Exit codes: 0 success, 1 I/O error (including refusing to overwrite), 2
configuration error, 3 numerical failure.
``HOLODOF_WORKERS`` supplies ``--workers`` when the flag is absent.
"""

from __future__ import annotations

import argparse
import os
import sys

from .exceptions import ConfigError, InvalidArgumentError, NumericalFailureError
from .runner import lattice_csv, parse_config, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _workers(value):
    if value is None:
        value = os.environ.get("HOLODOF_WORKERS", "1")
    try:
        n = int(value)
    except ValueError:
        raise ConfigError(f"workers must be a positive integer, got {value!r}")
    if n < 1:
        raise ConfigError(f"workers must be a positive integer, got {n}")
    return n


def _seed(text):
    n = int(text, 0)
    if not 0 <= n < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return n


def build_parser():
    p = argparse.ArgumentParser(prog="holodof", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write results")
    run.add_argument("config")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed", type=_seed, help="override the master seed")
    run.add_argument("--force", action="store_true", help="overwrite existing result files")
    run.add_argument("--workers", help="threads for coefficient drawing")

    dof = sub.add_parser("dof", help="print the theoretical DoF")
    dof.add_argument("config")

    lat = sub.add_parser("lattice", help="dump the mode set as CSV")
    lat.add_argument("config")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = parse_config(args.config, seed=args.seed)
            report = run_scenario(cfg, args.out, force=args.force, workers=_workers(args.workers))
            eff = report.eta_effective
            print(f"N={report.N} M={report.M} modes={report.lattice['modes']} "
                  f"eta_theory={report.eta_theory:.6g} "
                  f"eta_trace_fraction={eff['trace_fraction']} "
                  f"eta_relative_floor={eff['relative_floor']}")
        elif args.command == "dof":
            cfg = parse_config(args.config)
            from .dof import theoretical_dof

            print(f"{theoretical_dof(cfg.aperture, half_spaces=cfg.half_spaces):.12g}")
        else:
            cfg = parse_config(args.config)
            sys.stdout.write(lattice_csv(cfg.scenario().lattice))
    except (ConfigError, InvalidArgumentError) as exc:
        print(f"holodof: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailureError as exc:
        print(f"holodof: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, FileExistsError) as exc:
        print(f"holodof: {exc}", file=sys.stderr)
        return 1
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
