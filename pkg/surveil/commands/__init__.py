"""Subcommands of the surveil CLI."""

from .run import run
from .traj import traj
from .validate import validate

__all__ = ['run', 'traj', 'validate']
