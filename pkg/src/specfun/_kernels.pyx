# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for the exponential recurrences."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def recurrence_backward(double complex[:, ::1] b, double complex[::1] c, Py_ssize_t stride):
    """out[i, j] = c[j] * out[i + stride, j] + b[i, j], zero past the end."""
    cdef Py_ssize_t n = b.shape[0], m = b.shape[1]
    cdef Py_ssize_t i, j
    out_arr = np.zeros((n, m), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    if stride < 1:
        raise ValueError("stride must be >= 1")
    for i in range(n - 1, -1, -1):
        if i + stride < n:
            for j in range(m):
                out[i, j] = c[j] * out[i + stride, j] + b[i, j]
        else:
            for j in range(m):
                out[i, j] = b[i, j]
    return out_arr


def matrix_recurrence(double complex[:, ::1] E, double complex[:, ::1] b,
                      double complex[:, ::1] init, Py_ssize_t stride):
    """out[:stride] = init; out[k + stride] = E @ out[k] + b[k]."""
    cdef Py_ssize_t n = b.shape[0], d = b.shape[1]
    cdef Py_ssize_t k, p, q
    cdef double complex acc
    if stride < 1 or init.shape[0] != stride:
        raise ValueError("init must have `stride` rows")
    out_arr = np.zeros((n, d), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    for k in range(min(stride, n)):
        for p in range(d):
            out[k, p] = init[k, p]
    for k in range(n - stride):
        for p in range(d):
            acc = b[k, p]
            for q in range(d):
                acc = acc + E[p, q] * out[k, q]
            out[k + stride, p] = acc
    return out_arr


def fitted_backward(const double complex[:, ::1] F, const double complex[:, ::1] c,
                    const double complex[:, ::1] ce, const double complex[::1] decay,
                    Py_ssize_t stride, Py_ssize_t nkeep):
    """Backward recurrence of the fitted panel rule with panel sums formed on the fly.

    stride 2: b_i = c0 F[i] + c1 F[i+1] + c2 F[i+2], the node n-2 uses the
    single-step weights ``ce`` on F[n-3..n-1]; stride 1: b_i = c0 F[i] + c1 F[i+1].
    Returns out[:nkeep] with shape (nkeep, K, d).
    """
    cdef Py_ssize_t n = F.shape[0], d = F.shape[1], K = c.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double complex b, gi, g1, g2, q
    if stride not in (1, 2):
        raise ValueError("stride must be 1 or 2")
    if stride == 2 and n < 3:
        raise ValueError("stride 2 needs at least 3 nodes")
    nkeep = min(nkeep, n)
    out_arr = np.zeros((nkeep, K, d), dtype=np.complex128)
    cdef double complex[:, :, ::1] out = out_arr
    with nogil:
        for k in range(K):
            q = decay[k]
            for j in range(d):
                g1 = 0
                g2 = 0
                for i in range(n - 1, -1, -1):
                    if i == n - 1:
                        b = 0
                    elif stride == 1:
                        b = c[k, 0] * F[i, j] + c[k, 1] * F[i + 1, j]
                    elif i == n - 2:
                        b = ce[k, 0] * F[n - 3, j] + ce[k, 1] * F[n - 2, j] + ce[k, 2] * F[n - 1, j]
                    else:
                        b = c[k, 0] * F[i, j] + c[k, 1] * F[i + 1, j] + c[k, 2] * F[i + 2, j]
                    if stride == 2:
                        gi = q * g2 + b
                        g2 = g1
                    else:
                        gi = q * g1 + b
                    g1 = gi
                    if i < nkeep:
                        out[i, k, j] = gi
    return out_arr
