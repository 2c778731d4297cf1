"""Median polish kriging surfaces: MPK (linear mean) and IMPK (biharmonic mean)."""

from ._core import *  # noqa: F401,F403
from ._core import PolishKrigeError, __doc__  # noqa: F401

__version__ = "0.1.0"
