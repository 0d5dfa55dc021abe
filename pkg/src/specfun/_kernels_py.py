"""NumPy/SciPy versions of the compiled kernels in ``_kernels.pyx``."""
import numpy as np
from scipy.signal import lfilter


def recurrence_backward(b, c, stride):
    """out[i, j] = c[j] * out[i + stride, j] + b[i, j], zero past the end."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    b = np.asarray(b, dtype=np.complex128)
    c = np.asarray(c, dtype=np.complex128)
    out = np.empty_like(b)
    rev = b[::-1]
    denom = np.zeros(stride + 1, dtype=np.complex128)
    denom[0] = 1.0
    for j in range(b.shape[1]):
        denom[stride] = -c[j]
        out[::-1, j] = lfilter([1.0], denom, rev[:, j])
    return out


def matrix_recurrence(E, b, init, stride):
    """out[:stride] = init; out[k + stride] = E @ out[k] + b[k]."""
    E = np.asarray(E, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    init = np.asarray(init, dtype=np.complex128)
    if stride < 1 or init.shape[0] != stride:
        raise ValueError("init must have `stride` rows")
    n = b.shape[0]
    out = np.zeros_like(b)
    out[: min(stride, n)] = init[: min(stride, n)]
    for k in range(n - stride):
        out[k + stride] = E @ out[k] + b[k]
    return out


_CHUNK_ENTRIES = 2**23


def fitted_backward(F, c, ce, decay, stride, nkeep):
    """Same contract as the compiled version; panel sums are vectorised."""
    if stride not in (1, 2):
        raise ValueError("stride must be 1 or 2")
    F = np.asarray(F, dtype=np.complex128)
    n, d = F.shape
    if stride == 2 and n < 3:
        raise ValueError("stride 2 needs at least 3 nodes")
    K = c.shape[0]
    nkeep = min(nkeep, n)
    out = np.zeros((nkeep, K, d), dtype=np.complex128)
    per = max(1, _CHUNK_ENTRIES // max(1, n * d))
    for k0 in range(0, K, per):
        ks = slice(k0, min(K, k0 + per))
        m = ks.stop - ks.start
        B = np.zeros((n, m, d), dtype=np.complex128)
        if stride == 2:
            B[: n - 2] = (
                c[ks, 0, None] * F[: n - 2, None, :]
                + c[ks, 1, None] * F[1 : n - 1, None, :]
                + c[ks, 2, None] * F[2:, None, :]
            )
            B[n - 2] = ce[ks, 0, None] * F[n - 3] + ce[ks, 1, None] * F[n - 2] + ce[ks, 2, None] * F[n - 1]
        elif n > 1:
            B[: n - 1] = c[ks, 0, None] * F[:-1, None, :] + c[ks, 1, None] * F[1:, None, :]
        coef = np.repeat(np.asarray(decay)[ks], d)
        G = recurrence_backward(B.reshape(n, m * d), coef, stride)
        out[:, ks] = G.reshape(n, m, d)[:nkeep]
    return out
