"""Subcommands of the mbm-forensics executable."""

from .commands import COMMANDS, parse_grid

__all__ = ["COMMANDS", "parse_grid"]
