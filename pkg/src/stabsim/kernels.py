"""Kernel dispatch: the compiled extension when importable, numpy otherwise.

Set ``STABSIM_PURE_PYTHON=1`` to force the numpy fallback.
"""

import os

from . import _fallback

if os.environ.get("STABSIM_PURE_PYTHON"):
    _impl = _fallback
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _fallback

BACKEND = _impl.BACKEND
best_split = _impl.best_split
interleave_ranking = _impl.interleave_ranking
theorem_hits = _impl.theorem_hits


def compiled_available() -> bool:
    try:
        from . import _kernels  # noqa: F401
    except ImportError:
        return False
    return True
