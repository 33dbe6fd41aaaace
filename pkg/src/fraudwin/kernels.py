"""Kernel selection: compiled extension when importable, else pure Python."""

import os

from . import _pykernels

BACKEND = "python"

if os.environ.get("FRAUDWIN_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

weighted_stats = _impl.weighted_stats
interval_bounds = _impl.interval_bounds

__all__ = ["BACKEND", "weighted_stats", "interval_bounds"]
