"""Exhaustive enumeration of consistent decision trees."""

from ._core import *  # noqa: F401,F403
from ._core import ForestscopeError, __doc__  # noqa: F401
