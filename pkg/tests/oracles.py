"""Closed-form reference values, written without the package internals."""
from __future__ import annotations

import numpy as np
from scipy.linalg import expm


def trig_values(t, terms):
    t = np.asarray(t, dtype=float)
    out = 0
    for xi, a in terms:
        out = out + np.exp(1j * xi * t)[:, None] * np.atleast_1d(np.asarray(a, dtype=complex))[None]
    return out


def trig_resolvent(t, terms, lam):
    """R(lam) applied to a trigonometric polynomial: each wave scales by 1/(lam - i xi)."""
    return trig_values(t, [(xi, np.asarray(a) / (lam - 1j * xi)) for xi, a in terms])


def trig_transform(terms, lam):
    return sum(np.atleast_1d(np.asarray(a, dtype=complex)) / (lam - 1j * xi) for xi, a in terms)


def abel_factor(alpha, xi, xi0):
    return alpha / (alpha + 1j * (xi - xi0))


def exp_flow(A, u0, t):
    return np.array([expm(A * s) @ u0 for s in np.asarray(t, dtype=float)])


def scalar_forced(a, c, omega, u0, t):
    """u' = a u + c e^{i omega t}, u(0) = u0."""
    t = np.asarray(t, dtype=float)
    up = c / (1j * omega - a)
    return up * np.exp(1j * omega * t) + (u0 - up) * np.exp(a * t)


def resolvent_laurent(A, center, n):
    """Laurent coefficient a_n of (z - A)^{-1} about i*center, diagonalizable A with no eigenvalue at i*center
    unless it is a simple pole."""
    w, V = np.linalg.eig(np.atleast_2d(np.asarray(A, dtype=complex)))
    Vi = np.linalg.inv(V)
    p = 1j * center
    out = np.zeros_like(V)
    for k, lam in enumerate(w):
        P = np.outer(V[:, k], Vi[k])
        d = p - lam
        if abs(d) < 1e-12:
            c = 1.0 if n == -1 else 0.0
        elif n >= 0:
            # 1/(z - lam) = 1/(d + w) = sum (-1)^n w^n / d^{n+1}
            c = (-1) ** n / d ** (n + 1)
        else:
            c = 0.0
        out = out + c * P
    return out


def random_trig(rng, max_terms=5, max_freq=5.0, max_amp=3.0, max_dim=4, min_sep=0.0):
    d = int(rng.integers(1, max_dim + 1))
    k = int(rng.integers(1, max_terms + 1))
    freqs: list = []
    while len(freqs) < k:
        xi = float(rng.uniform(-max_freq, max_freq))
        if all(abs(xi - x) >= max(min_sep, 1e-9) for x in freqs):
            freqs.append(xi)
    terms = []
    for xi in freqs:
        a = rng.normal(size=d) + 1j * rng.normal(size=d)
        a *= rng.uniform(0.3, max_amp) / np.linalg.norm(a)
        terms.append((xi, a))
    return terms


def random_skew_hermitian(rng, d):
    M = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (M - M.conj().T)


def random_normal(rng, d, imag_eigs, stable_eigs):
    """Unitarily diagonalizable matrix with prescribed eigenvalues."""
    Q, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    w = np.concatenate([1j * np.asarray(imag_eigs, dtype=float), np.asarray(stable_eigs, dtype=complex)])
    return Q @ np.diag(w) @ Q.conj().T, Q, w
