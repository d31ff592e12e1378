"""Kernel selection: the compiled extension when available, else pure Python.

Set ``VCCTS_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("VCCTS_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

refine_colors = _impl.refine_colors
max_bipartite_matching = _impl.max_bipartite_matching
