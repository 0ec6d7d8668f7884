"""Rough functional data: FPCA phase transitions, the eigengap-ratio test and the deformed MP law."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
