"""
Command-line interface for lane.
"""

from lane.cli.main import cli

__all__ = ["cli"]
