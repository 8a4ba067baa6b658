"""
Command-line entry point.

    surveil run <config-file> [--out DIR] [--seed N] [--trials N]
    surveil validate <config-file>
    surveil traj <sbs-file> --n 5 --p 2 --out DIR

Exit status: 0 success, 1 configuration error, 2 numerical error, 3 I/O error.
"""

import logging
import sys

import click

from config import settings
from surveil import __version__
from surveil.commands import run, traj, validate


def configure_logging(verbose: bool = False):
    logging.basicConfig(
        level=logging.DEBUG if verbose else getattr(logging, settings.LOG_LEVEL, logging.INFO),
        format='%(asctime)s [%(levelname)s] %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S',
        stream=sys.stderr,
        force=True,
    )


@click.group()
@click.version_option(__version__, prog_name='surveil')
@click.option('-v', '--verbose', is_flag=True, help='Debug logging')
def cli(verbose):
    """Hierarchical UAV surveillance experiments."""
    configure_logging(verbose)


cli.add_command(run)
cli.add_command(validate)
cli.add_command(traj)


def main():
    cli()


if __name__ == '__main__':
    main()
