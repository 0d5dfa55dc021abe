"""Backend selection for the hot recurrences.

The compiled extension is used when it imports; setting the environment
variable ``SPECFUN_PURE_PYTHON=1`` forces the NumPy/SciPy fallback.
"""
import os

import numpy as np

from . import _kernels_py

if os.environ.get("SPECFUN_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"


def recurrence_backward(b, c, stride=1, impl=None):
    """Solve ``out[i] = c * out[i + stride] + b[i]`` from the end of the array.

    ``b`` has shape (n, m); ``c`` holds one coefficient per column.
    """
    impl = impl or _impl
    b = np.ascontiguousarray(b, dtype=np.complex128)
    c = np.array(np.broadcast_to(c, (b.shape[1],)), dtype=np.complex128)
    return impl.recurrence_backward(b, c, int(stride))


def matrix_recurrence(E, b, init, stride=1, impl=None):
    """Solve ``out[k + stride] = E @ out[k] + b[k]`` forward from ``init``."""
    impl = impl or _impl
    return impl.matrix_recurrence(
        np.ascontiguousarray(E, dtype=np.complex128),
        np.ascontiguousarray(b, dtype=np.complex128),
        np.ascontiguousarray(init, dtype=np.complex128),
        int(stride),
    )


def fitted_backward(F, c, ce, decay, stride, nkeep, impl=None):
    """Fitted-rule recurrence for K exponents at once; returns (nkeep, K, d)."""
    impl = impl or _impl
    c = np.ascontiguousarray(c, dtype=np.complex128)
    ce = np.ascontiguousarray(ce if ce is not None else np.zeros((c.shape[0], 3)), dtype=np.complex128)
    if c.shape[1] < 3:
        c = np.ascontiguousarray(np.hstack([c, np.zeros((c.shape[0], 3 - c.shape[1]))]))
    return impl.fitted_backward(
        np.ascontiguousarray(F, dtype=np.complex128), c, ce,
        np.ascontiguousarray(decay, dtype=np.complex128), int(stride), int(nkeep),
    )
