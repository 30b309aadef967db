"""Numerical laboratory for off-policy n-step TD and natural policy-gradient
methods on finite MDPs. Thin wrapper over the compiled core."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401

__version__ = "0.1.0"
