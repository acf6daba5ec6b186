"""Kernel backend selection: compiled extension if importable, numpy otherwise.

Set SPINBATH_KERNELS=python before import to force the pure-numpy path
(useful for benchmarking and for debugging the compiled kernels).
"""
from __future__ import annotations

import os

from . import _kernels_py

_FORCE = os.environ.get("SPINBATH_KERNELS", "").strip().lower()
_impl = _kernels_py
_BACKEND = "python"

if _FORCE not in ("py", "python"):
    try:
        from . import _kernels_c as _impl_c
    except ImportError:
        if _FORCE in ("c", "compiled"):
            raise ImportError(
                "SPINBATH_KERNELS requested the compiled backend but "
                "spinbath._kernels_c is not built")
    else:
        _impl = _impl_c
        _BACKEND = "compiled"


def backend() -> str:
    """Name of the active kernel backend: 'compiled' or 'python'."""
    return _BACKEND


uniaxial_log_factors = _impl.uniaxial_log_factors
window_filter = _impl.window_filter
semiclassical_matrices = _impl.semiclassical_matrices
