"""Continuum-robot shape sensing from a simulated 4x4 e-textile sensor."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
