"""
Progress output.
Everything goes to stderr so stdout stays free for command results.
"""

import sys

from recon.config import Config


def status(message: str):
    """Print a progress line when verbose output is enabled."""
    if Config.VERBOSE:
        print(message, file=sys.stderr)


def banner(title: str):
    """Print a framed stage header."""
    status("\n" + "=" * 70)
    status(title)
    status("=" * 70)
