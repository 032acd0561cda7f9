"""Kernel dispatch: compiled float64 kernels when built, numpy otherwise.

Set ``POW2DIGITS_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

import numpy as np

from . import _pykernels as python_backend

compiled_backend = None
if not os.environ.get("POW2DIGITS_PURE_PYTHON"):
    try:
        from . import _kernels as compiled_backend
    except ImportError:
        compiled_backend = None

BACKEND = "cython" if compiled_backend is not None else "python"


def _pick(arr):
    if compiled_backend is not None and arr.dtype == np.float64:
        return compiled_backend
    return python_backend


def forward_dense(v, h):
    if v.dtype == np.float64:
        v = np.ascontiguousarray(v)
        h = [float(x) for x in h]
    return _pick(v).forward_dense(v, h)


def backward_dense(w, h):
    if w.dtype == np.float64:
        w = np.ascontiguousarray(w)
        h = [float(x) for x in h]
    return _pick(w).backward_dense(w, h)
