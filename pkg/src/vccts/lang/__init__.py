"""The toy concurrent language: syntax, parser and reference interpreter."""

from .ast import *  # noqa: F401,F403
from .interp import *  # noqa: F401,F403
from .parser import *  # noqa: F401,F403
from .ast import __all__ as _a
from .interp import __all__ as _i
from .parser import __all__ as _p

__all__ = sorted(set(_a) | set(_i) | set(_p))
