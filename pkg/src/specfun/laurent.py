"""Laurent coefficients of resolvent-type functions around points of the imaginary axis.

Coefficients are trapezoid sums on the circle ``|z - i xi| = r`` with nodes
offset by half a step, so no node falls on the real part zero line where
bounds of the form ``M / |Re z|`` blow up.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, ContourError, PreconditionError

REGULAR = "Regular"
SIMPLE_POLE = "SimplePole"
HIGHER_ORDER = "HigherOrder"
UNRESOLVED = "Unresolved"


@dataclass(frozen=True)
class ContourSpec:
    """Circle around ``i * center`` with ``nodes`` trapezoid nodes."""

    center: float
    radius: float
    nodes: int = 64

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ConfigError(f"contour.radius: must be > 0, got {self.radius!r}")
        if int(self.nodes) != self.nodes or self.nodes < 16 or self.nodes % 2:
            raise ConfigError(f"contour.nodes: must be an even integer >= 16, got {self.nodes!r}")

    @property
    def point(self) -> complex:
        return 1j * self.center

    def angles(self, nodes: int | None = None) -> np.ndarray:
        n = nodes or self.nodes
        return 2 * np.pi * (np.arange(n) + 0.5) / n

    def points(self, nodes: int | None = None) -> np.ndarray:
        return self.point + self.radius * np.exp(1j * self.angles(nodes))

    def check_poles(self, poles) -> None:
        for p in np.atleast_1d(np.asarray(poles, dtype=complex)):
            gap = abs(abs(p - self.point) - self.radius)
            if gap < 0.5 * self.radius:
                raise ContourError(
                    f"singularity {p:.6g} lies {gap:.3g} from the contour |z - {self.point}| = {self.radius:g} "
                    f"(margin {0.5 * self.radius:g} required)"
                )


class MatrixResolvent:
    """``z -> (z - A)^{-1}`` with the eigenvalues of ``A`` as known poles."""

    def __init__(self, A):
        A = np.atleast_2d(np.asarray(A, dtype=complex))
        if A.shape[0] != A.shape[1]:
            raise ConfigError("A: must be square")
        self.A = A
        self.poles = np.linalg.eigvals(A)

    def __call__(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        d = self.A.shape[0]
        M = z[:, None, None] * np.eye(d)[None] - self.A[None]
        return np.linalg.solve(M, np.broadcast_to(np.eye(d), M.shape))


class FunctionSampler:
    """Wrap a callable ``z -> array`` (vectorised over z) with its known poles."""

    def __init__(self, fn: Callable, poles=()):
        self.fn = fn
        self.poles = np.asarray(poles, dtype=complex)

    def __call__(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.asarray(self.fn(z), dtype=complex)
        if out.ndim == 1:
            out = out[:, None, None]
        return out


def _opnorm(a) -> float:
    a = np.asarray(a)
    if a.ndim == 2 and min(a.shape) > 1:
        return float(np.linalg.norm(a, 2))
    return float(np.linalg.norm(a))


def _sample(F, z):
    vals = F(z)
    if vals.ndim == 1:
        vals = vals[:, None, None]
    return vals


@dataclass(frozen=True, eq=False)
class LaurentCoefficients:
    center: float
    radius: float
    nodes: int
    coefficients: dict
    errors: dict
    sampler: object = field(repr=False, default=None)

    def norm(self, n: int) -> float:
        return _opnorm(self.coefficients[n])

    def to_dict(self):
        return {
            "center": self.center,
            "radius": self.radius,
            "nodes": self.nodes,
            "coefficients": [
                {
                    "index": n,
                    "re": np.real(a).tolist(),
                    "im": np.imag(a).tolist(),
                    "quadrature_error": self.errors[n],
                }
                for n, a in sorted(self.coefficients.items())
            ],
        }


def _trapezoid_coeffs(F, c: ContourSpec, indices, nodes):
    theta = c.angles(nodes)
    w = c.radius * np.exp(1j * theta)
    vals = _sample(F, c.point + w)
    out = {}
    for n in indices:
        out[n] = np.tensordot(w ** (-n), vals, axes=(0, 0)) / nodes
    return out


def laurent_coefficients(F, c: ContourSpec, n_range=(-3, 3)) -> LaurentCoefficients:
    """``a_n = (1/2 pi i) int F(z) (z - i xi)^{-n-1} dz`` for ``n`` in ``n_range`` (inclusive).

    The quadrature error of each coefficient is estimated by doubling the
    node count; the doubled values are returned.
    """
    lo, hi = int(n_range[0]), int(n_range[1])
    if lo > hi:
        raise ConfigError("n_range: lower end exceeds upper end")
    poles = getattr(F, "poles", ())
    c.check_poles(poles)
    idx = range(lo, hi + 1)
    base = _trapezoid_coeffs(F, c, idx, c.nodes)
    fine = _trapezoid_coeffs(F, c, idx, 2 * c.nodes)
    errs = {n: _opnorm(fine[n] - base[n]) for n in idx}
    coeffs = {n: (fine[n][0, 0] if fine[n].shape == (1, 1) else fine[n]) for n in idx}
    return LaurentCoefficients(c.center, c.radius, 2 * c.nodes, coeffs, errs, F)


@dataclass(frozen=True)
class GelfandReport:
    passed: bool
    worst_margin: float
    rows: tuple
    bound_constant: float
    observed_constant: float
    variant: str

    def to_dict(self):
        return {
            "passed": self.passed,
            "worst_margin": self.worst_margin,
            "bound_constant": self.bound_constant,
            "observed_constant": self.observed_constant,
            "variant": self.variant,
            "rows": [dict(r) for r in self.rows],
        }


def observed_bound(F, c: ContourSpec, nodes: int = 32) -> float:
    """``max ||F(z)|| |Re z|`` over ``nodes`` offset contour points."""
    z = c.points(nodes)
    vals = _sample(F, z)
    return float(max(_opnorm(v) * abs(zz.real) for v, zz in zip(vals, z)))


def gelfand_bound_check(coeffs: LaurentCoefficients, M: float, n_range=(-3, 3), variant: str = "negative",
                        check_nodes: int = 32) -> GelfandReport:
    """Check ``||r^2 a_{-(n+1)} + a_{-(n+3)}|| <= 2 M r^{n+2}`` for ``n`` in ``n_range``.

    ``variant="positive"`` indexes the same family by ``k = -n``, giving
    ``||a_{k-1} + r^{-2} a_{k-3}|| <= 2 M r^{-k}``. The hypothesis
    ``||F(z)|| <= M / |Re z|`` is sampled at ``check_nodes`` contour points
    first; a violation raises :class:`PreconditionError` naming the node.
    """
    if variant not in ("negative", "positive"):
        raise ConfigError("variant: expected 'negative' or 'positive'")
    r = coeffs.radius
    c = ContourSpec(coeffs.center, r, max(16, check_nodes + check_nodes % 2))
    if coeffs.sampler is not None:
        z = c.points(check_nodes)
        vals = _sample(coeffs.sampler, z)
        for k, (v, zz) in enumerate(zip(vals, z)):
            nv = _opnorm(v)
            if nv * abs(zz.real) > M * (1 + 1e-9) + 1e-12:
                raise PreconditionError(
                    f"||F(z)|| = {nv:.6g} exceeds M/|Re z| = {M / abs(zz.real):.6g} at contour node {k} (z = {zz:.6g})"
                )
        obs = observed_bound(coeffs.sampler, c, check_nodes)
    else:
        obs = float("nan")
    rows = []
    worst = math.inf
    lo, hi = int(n_range[0]), int(n_range[1])
    for m in range(lo, hi + 1):
        n = m if variant == "negative" else -m
        i1, i3 = -(n + 1), -(n + 3)
        if i1 not in coeffs.coefficients or i3 not in coeffs.coefficients:
            raise ConfigError(f"n_range: coefficients a_{i1} and a_{i3} are needed")
        lhs = _opnorm(r * r * np.asarray(coeffs.coefficients[i1]) + np.asarray(coeffs.coefficients[i3]))
        rhs = 2 * M * r ** (n + 2)
        slack = 1e-8 * (1 + rhs)
        margin = rhs + slack - lhs
        worst = min(worst, margin)
        rows.append({"index": m, "lhs": lhs, "rhs": rhs, "holds": bool(margin >= 0)})
    return GelfandReport(all(r_["holds"] for r_ in rows), float(worst), tuple(rows), float(M), obs, variant)


@dataclass(frozen=True)
class PoleClassification:
    classification: str
    xi: float
    radii: tuple
    norms: tuple  # per radius: (||a_-1||, ||a_-2||, ||a_-3||)
    residue: object
    pole_tol: float
    eigenvalue_check: bool | None

    def to_dict(self):
        res = np.asarray(self.residue)
        return {
            "classification": self.classification,
            "xi": self.xi,
            "radii": list(self.radii),
            "coefficient_norms": [list(x) for x in self.norms],
            "residue": {"re": np.real(res).tolist(), "im": np.imag(res).tolist()},
            "pole_tol": self.pole_tol,
            "eigenvalue_check": self.eigenvalue_check,
        }


def pole_classify(F, xi: float, r_schedule=(0.4, 0.2, 0.1), nodes: int = 128,
                  pole_tol: float | None = None, eig_tol: float = 1e-8,
                  stable_tol: float = 1e-6) -> PoleClassification:
    """Classify ``i xi`` as regular point, simple pole or higher-order pole of ``F``.

    Coefficients that sit between "zero" (``pole_tol``) and clearly nonzero
    (``1e3 * pole_tol``) yield ``Unresolved`` rather than a guess.
    """
    radii = tuple(float(r) for r in r_schedule)
    if not radii or any(b >= a for a, b in zip(radii, radii[1:])):
        raise ConfigError("r_schedule: must be non-empty and strictly decreasing")
    coeffs = [laurent_coefficients(F, ContourSpec(xi, r, nodes), (-3, -1)) for r in radii]
    norms = tuple((c.norm(-1), c.norm(-2), c.norm(-3)) for c in coeffs)
    a1, a2, a3 = norms[-1]
    tol = pole_tol if pole_tol is not None else 1e-8 * max(1.0, a1)
    big = 1e3 * tol
    residue = coeffs[-1].coefficients[-1]
    stable = all(
        _opnorm(np.asarray(c.coefficients[-1]) - np.asarray(residue)) <= stable_tol * max(1.0, a1)
        for c in coeffs
    )
    if a1 <= tol and a2 <= tol and a3 <= tol:
        cls = REGULAR
    elif a2 > big or a3 > big:
        cls = HIGHER_ORDER
    elif a1 > big and a2 <= tol and a3 <= tol and stable:
        cls = SIMPLE_POLE
    else:
        cls = UNRESOLVED
    eig_ok = None
    if cls == SIMPLE_POLE and isinstance(F, MatrixResolvent):
        eig_ok = bool(np.min(np.abs(F.poles - 1j * xi)) <= eig_tol)
    return PoleClassification(cls, float(xi), radii, norms, residue, tol, eig_ok)


def zero_spectrum_forces_zero(A, tol: float = 1e-10) -> dict:
    """For a matrix with ``||R(z, A)|| <= 1/|Re z|`` (e.g. skew-Hermitian):
    spectrum ``{0}`` forces ``A = 0``. Reports both facts."""
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    eig = np.linalg.eigvals(A)
    only_zero = bool(np.all(np.abs(eig) <= tol))
    skew = bool(np.allclose(A, -A.conj().T, atol=tol))
    norm = _opnorm(A)
    return {
        "spectrum_is_zero": only_zero,
        "skew_hermitian": skew,
        "norm": norm,
        "consistent": (not (only_zero and skew)) or norm <= tol * max(1, A.shape[0]),
    }
