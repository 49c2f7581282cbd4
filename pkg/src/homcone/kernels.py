"""Kernel selection: the compiled extension when importable, numpy otherwise.

Set ``HOMCONE_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("HOMCONE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _kernels_py


def wishart_coords(Z, basis):
    """z_basis coordinates of ``sum_j z_j z_j^T`` for a stack Z of shape (M, k, N)."""
    return _impl.wishart_coords(np.ascontiguousarray(Z, dtype=float),
                                np.ascontiguousarray(basis, dtype=float))


def centered_moments(C, mean):
    """``(S2, S4)``: sums of centered products and of their squares."""
    return _impl.centered_moments(np.ascontiguousarray(C, dtype=float),
                                  np.ascontiguousarray(mean, dtype=float))
