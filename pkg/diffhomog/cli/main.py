"""
This file is part of diffhomog.

Copyright (C) 2024 diffhomog contributors listed in AUTHORS.md.

diffhomog is free software: you can redistribute it and/or modify it under the
terms of the GNU General Public License as published by the Free
Software Foundation, version 3.

diffhomog is distributed in the hope that it will be useful, but WITHOUT ANY
WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A
PARTICULAR PURPOSE.  See the GNU General Public License for more details.

You should have received a copy of the GNU General Public License along
with diffhomog. If not, see <https://www.gnu.org/licenses/>.

---

Command line entry point ``diffhomog``.
"""

__all__ = ['main', 'build_parser', 'EXIT_OK', 'EXIT_RUNTIME', 'EXIT_CONFIG', 'EXIT_CHECK']

import argparse
import json
import logging
import sys

from pathos.pools import ProcessPool as Pool

from diffhomog._version import __version__
from diffhomog.cli.commands import COMMANDS, run_command
from diffhomog.cli.runconfig import load_config

LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_CHECK = 3

_HELP = {
    'astar1d': "homogenized constants of a 1D problem",
    'residual-mc': "Monte Carlo variance of the scaled residual against its Gaussian limit",
    'limit-check': "Gaussian shape of the scaled leading term",
    'moment-check': "moment bounds of the scaled psi integrals",
    'corrector-nd': "single corrector solve with a dump of the nodal values",
    'astar-convergence': "convergence study of the truncated homogenized matrix",
}


def _workers(value):
    count = int(value)
    if count < 1:
        raise argparse.ArgumentTypeError(f"need at least one worker, got {count}")
    return count


def build_parser():
    """Argument parser with one subcommand per experiment."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', default=None,
                        help="JSON run configuration, defaults are used when omitted")
    common.add_argument('--seed', type=int, default=None,
                        help="master seed in [0, 2**64), overrides the configuration")
    common.add_argument('--out', default=None,
                        help="output directory, overrides the configuration")
    common.add_argument('--workers', type=_workers, default=1,
                        help="number of worker processes, default 1")
    common.add_argument('--check', action='store_true',
                        help=f"exit with {EXIT_CHECK} when an acceptance check fails")

    parser = argparse.ArgumentParser(
        prog='diffhomog',
        description="Homogenization experiments with randomly deformed periodic media.")
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    subparsers = parser.add_subparsers(dest='command', required=True)
    for name in COMMANDS:
        subparsers.add_parser(name, parents=[common], help=_HELP[name])
    return parser


def main(argv=None):
    """Run one command and map its outcome to an exit code.

    Returns
    -------
    int
        EXIT_OK, EXIT_RUNTIME on a failed computation, EXIT_CONFIG on an
        invalid configuration and EXIT_CHECK on a failed acceptance check in
        --check mode.
    """
    args = build_parser().parse_args(argv)
    try:
        run_config = load_config(args.config, args.command, seed=args.seed, out=args.out)
    except ValueError as err:
        LOGGER.error("Invalid configuration: %s", err)
        return EXIT_CONFIG

    pool = None
    if args.workers > 1:
        pool = Pool(nodes=args.workers)
    try:
        summary = run_command(run_config, pool=pool)
    except ValueError as err:
        LOGGER.error("Invalid input: %s", err)
        return EXIT_CONFIG
    except Exception as err:  # pylint: disable=broad-except
        LOGGER.error("Run failed: %s", err)
        return EXIT_RUNTIME
    finally:
        if pool:
            pool.close()
            pool.join()
            pool.clear()

    sys.stdout.write(json.dumps(summary['results'], indent=2) + '\n')
    if args.check and not summary['passed']:
        return EXIT_CHECK
    return EXIT_OK
