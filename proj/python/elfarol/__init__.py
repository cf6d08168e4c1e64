"""Spatial El Farol Bar simulator: engine, trace recorder, and analysis."""

from elfarol._core import *  # noqa: F401,F403
from elfarol._core import __version__  # noqa: F401
