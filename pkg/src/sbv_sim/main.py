#!/usr/bin/env python
"""

    sbv-sim: Sub-band vectoring simulator for multi-operator VDSL2

    Command line module

    Copyright (C) 2026 sbv-sim authors.

    This software is licensed under the MIT License; see LICENSE.txt
    in the distribution root for the full text.


    This is an executable program wrapper (main module) for the sbv-sim
    package. It can be used to run experiments from the command line,
    with the command 'sbv-sim'. The main() function of this module is
    registered as a console_script entry point in setup.py.

    Exit codes: 0 on success, 2 on a configuration error, 1 on any
    other error.

"""

from typing import List, Optional

import argparse
import logging
import sys

from .basics import ConfigError, SbvSimError
from .version import __version__
from .wrappers import OptionsDict, run_command


EXIT_CONFIG_ERROR = 2
EXIT_RUNTIME_ERROR = 1

LOG_FORMAT = "%(levelname)-7s %(name)s %(message)s"

# Define the command line arguments

parser = argparse.ArgumentParser(
    prog="sbv-sim",
    description="Simulates sub-band vectoring among co-located VDSL2 operators",
)
parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
parser.add_argument(
    "--verbose",
    "-v",
    action="count",
    default=0,
    help="Log progress (-v) or details (-vv) to stderr",
)

subparsers = parser.add_subparsers(dest="command", metavar="command")
subparsers.required = True


def _add_command(name: str, help: str) -> argparse.ArgumentParser:
    p = subparsers.add_parser(name, help=help)
    p.add_argument("config", help="Experiment configuration file")
    p.add_argument("--out", "-o", help="Output file (default: stdout)")
    p.add_argument("--seed", type=int, help="Master seed, overrides config and SBV_SIM_SEED")
    return p


run_parser = _add_command("run", "Run the configured experiment and write CSV")
run_parser.add_argument("--trials", type=int, help="Number of Monte Carlo trials")
run_parser.add_argument(
    "--dry-run",
    action="store_true",
    help="Validate the configuration and print the resolved scenario",
)
_add_command("plan", "Write the band plan as CSV")
_add_command("fairness", "Write the rate difference between operators against distance")
tones_parser = _add_command("tones", "Write per-tone diagnostics of one line")
tones_parser.add_argument(
    "--operator", type=int, default=0, help="Operator of the line (from 0)"
)


def _setup_logging(verbose: int) -> None:
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)


def main(argv: Optional[List[str]] = None) -> None:
    """Main function, called when the 'sbv-sim' command is invoked"""

    args = parser.parse_args(argv)
    _setup_logging(args.verbose)
    options: OptionsDict = {
        "command": args.command,
        "config": args.config,
        "seed": args.seed,
    }
    if args.command == "run":
        options["trials"] = args.trials
        options["dry_run"] = args.dry_run
    elif args.command == "tones":
        options["operator"] = args.operator
    try:
        result = run_command(**options)
        out = args.out or result.output
        if out:
            with open(out, "w", encoding="utf-8", newline="") as f:
                f.write(result.text)
            logging.getLogger(__name__).info("Wrote %s", out)
        else:
            sys.stdout.write(result.text)
    except ConfigError as e:
        print("sbv-sim: configuration error: {0}".format(e), file=sys.stderr)
        sys.exit(EXIT_CONFIG_ERROR)
    except (SbvSimError, ValueError, OSError) as e:
        print("sbv-sim: error: {0}".format(e), file=sys.stderr)
        sys.exit(EXIT_RUNTIME_ERROR)


if __name__ == "__main__":
    main()
