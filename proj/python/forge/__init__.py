"""Explicit-3D spatial reasoning toolkit (Python bindings of the C++ core)."""

from ._core import *  # noqa: F401,F403
from ._core import ForgeError, __version__  # noqa: F401
