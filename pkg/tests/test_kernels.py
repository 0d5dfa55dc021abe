import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specfun import _kernels_py, kernels

try:
    from specfun import _kernels as compiled
except ImportError:  # pragma: no cover
    compiled = None

IMPLS = [_kernels_py] + ([compiled] if compiled is not None else [])


def cplx(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def naive_fitted(F, c, ce, decay, stride, nkeep):
    n, d = F.shape
    out = np.zeros((n, c.shape[0], d), dtype=complex)
    for k in range(c.shape[0]):
        g = np.zeros((n + 2, d), dtype=complex)
        for i in range(n - 1, -1, -1):
            if i == n - 1:
                b = 0
            elif stride == 1:
                b = c[k, 0] * F[i] + c[k, 1] * F[i + 1]
            elif i == n - 2:
                b = ce[k, 0] * F[n - 3] + ce[k, 1] * F[n - 2] + ce[k, 2] * F[n - 1]
            else:
                b = c[k, 0] * F[i] + c[k, 1] * F[i + 1] + c[k, 2] * F[i + 2]
            g[i] = decay[k] * g[i + stride] + b
        out[:, k] = g[:n]
    return out[:nkeep]


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


@pytest.mark.parametrize("impl", IMPLS)
@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(1, 40), m=st.integers(1, 4), stride=st.integers(1, 3))
def test_recurrence_backward(impl, seed, n, m, stride):
    rng = np.random.default_rng(seed)
    b, c = cplx(rng, n, m), 0.9 * cplx(rng, m) / 2
    want = np.zeros((n + stride, m), dtype=complex)
    for i in range(n - 1, -1, -1):
        want[i] = c * want[i + stride] + b[i]
    assert np.allclose(kernels.recurrence_backward(b, c, stride, impl=impl), want[:n])


@pytest.mark.parametrize("impl", IMPLS)
@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(2, 40), d=st.integers(1, 3), stride=st.integers(1, 2))
def test_matrix_recurrence(impl, seed, n, d, stride):
    rng = np.random.default_rng(seed)
    E, b, init = 0.5 * cplx(rng, d, d), cplx(rng, n, d), cplx(rng, stride, d)
    want = np.zeros((n, d), dtype=complex)
    want[:stride] = init[: min(stride, n)]
    for k in range(n - stride):
        want[k + stride] = E @ want[k] + b[k]
    assert np.allclose(kernels.matrix_recurrence(E, b, init, stride, impl=impl), want)


@pytest.mark.parametrize("impl", IMPLS)
@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(3, 30), d=st.integers(1, 3), K=st.integers(1, 4),
       stride=st.integers(1, 2), nkeep=st.integers(1, 35))
def test_fitted_backward(impl, seed, n, d, K, stride, nkeep):
    rng = np.random.default_rng(seed)
    F, c, ce = cplx(rng, n, d), cplx(rng, K, 3), cplx(rng, K, 3)
    decay = 0.9 * np.exp(1j * rng.uniform(0, 6, K))
    got = kernels.fitted_backward(F, c, ce, decay, stride, nkeep, impl=impl)
    assert np.allclose(got, naive_fitted(F, c, ce, decay, stride, min(nkeep, n)))


def test_backends_agree_large():
    if compiled is None:
        pytest.skip("compiled extension not built")
    rng = np.random.default_rng(0)
    F, c, ce = cplx(rng, 2001, 2), cplx(rng, 7, 3), cplx(rng, 7, 3)
    decay = np.exp(-0.01 + 1j * np.linspace(0, 1, 7))
    a = kernels.fitted_backward(F, c, ce, decay, 2, 500, impl=compiled)
    b = kernels.fitted_backward(F, c, ce, decay, 2, 500, impl=_kernels_py)
    assert np.allclose(a, b, rtol=1e-10, atol=1e-10)


def test_pure_python_switch():
    import os
    import subprocess
    import sys

    env = dict(os.environ, SPECFUN_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import specfun; print(specfun.BACKEND)"],
                         capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"
