"""Compare the compiled kernels with the NumPy/SciPy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from specfun import _kernels_py, kernels

try:
    from specfun import _kernels as compiled
except ImportError:
    compiled = None


def cases(rng):
    def cplx(*shape):
        return rng.normal(size=shape) + 1j * rng.normal(size=shape)

    n = 200_000
    b, c = cplx(n, 4), 0.99 * np.exp(1j * rng.uniform(0, 6, 4))
    yield "recurrence_backward n=2e5 m=4", lambda impl: kernels.recurrence_backward(b, c, 2, impl=impl)
    E, bb, init = 0.3 * cplx(4, 4), cplx(50_000, 4), cplx(2, 4)
    yield "matrix_recurrence n=5e4 d=4", lambda impl: kernels.matrix_recurrence(E, bb, init, 2, impl=impl)
    F = cplx(20_000, 1)
    K = 200
    cc, ce = cplx(K, 3), cplx(K, 3)
    decay = np.exp(-0.01 + 1j * np.linspace(-1, 1, K))
    yield "fitted_backward n=2e4 K=200", lambda impl: kernels.fitted_backward(F, cc, ce, decay, 2, 5000, impl=impl)


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    impls = [("python", _kernels_py)] + ([("cython", compiled)] if compiled is not None else [])
    print(f"{'kernel':34s}" + "".join(f"{name:>12s}" for name, _ in impls) + ("     speedup" if compiled else ""))
    for label, fn in cases(rng):
        times = []
        ref = None
        for _, impl in impls:
            out = fn(impl)
            if ref is None:
                ref = out
            elif not np.allclose(out, ref):
                raise SystemExit(f"{label}: backends disagree")
            times.append(min(timeit.repeat(lambda: fn(impl), number=1, repeat=args.repeat)))
        row = f"{label:34s}" + "".join(f"{t * 1e3:10.1f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
