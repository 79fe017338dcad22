"""Certified Taylor estimates of quantum partition functions."""

from ._partfn import *  # noqa: F401,F403
from ._partfn import __version__  # noqa: F401
