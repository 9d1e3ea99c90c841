"""Python bindings for the provkit C++ core."""

from ._provkit import *  # noqa: F401,F403
from ._provkit import __version__  # noqa: F401
