"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``WEAKRAND_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _purepy

BACKENDS = {"python": _purepy}

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None
else:
    BACKENDS["cython"] = _compiled

if _compiled is not None and not os.environ.get("WEAKRAND_PURE_PYTHON"):
    kernels = _compiled
    BACKEND = "cython"
else:
    kernels = _purepy
    BACKEND = "python"
