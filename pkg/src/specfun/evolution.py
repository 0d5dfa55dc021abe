"""Finite-dimensional evolution equations ``u' = A u + f``.

Mild solutions come from the variation-of-constants formula with exact
matrix exponentials and a Simpson rule for the forcing integral. The checks
in this module compare solutions against spectral information of ``A``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from . import kernels
from .errors import (
    ConfigError,
    ImaginaryAxisError,
    PreconditionError,
    SolveError,
    SpanError,
    UnboundedWarning,
)
from .funcspace import (
    HALFLINE,
    LINE,
    ExponentialDecay,
    FunctionSpec,
    Grid,
    Modulated,
    Orbit,
    SampledFunction,
    Sum,
    Tabulated,
    Translated,
    TrigPolynomial,
    matrix_from_json,
    matrix_to_json,
    quotient_norm_c0,
    sample,
    spec_from_dict,
    sup_norm,
    vector_to_json,
    _vector,
)
from .resolvent import DEFAULT_ALPHAS, ResolventQuery, resolvent_halfline, resolvent_line
from .spectrum import (
    FrequencyGrid,
    SpectrumEstimate,
    carleman_spectrum,
    default_frequency_grid,
    reduced_spectrum_c0,
)

AXIS_TOL = 1e-10

STABLE_BY_THEOREM = "StableByTheorem"
ALL_STABLE = "AllSolutionsStable"
NOT_COVERED = "NotCovered"


class OperatorMatrix:
    """A square complex matrix with its spectral data."""

    def __init__(self, A, group_tol: float = 1e-8):
        A = np.atleast_2d(np.asarray(A, dtype=complex))
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ConfigError(f"A: expected a square matrix, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ConfigError("A: non-finite entries")
        self.A = A
        self.dim = A.shape[0]
        w, V = np.linalg.eig(A)
        self.eigenvalues = w
        self.adjoint_eigenvalues = np.linalg.eigvals(A.conj().T)
        cond = np.linalg.cond(V)
        self.diagonalizable = bool(np.isfinite(cond) and cond < 1e8)
        self._groups = []
        self.eigenprojections = []
        if self.diagonalizable:
            W = np.linalg.inv(V)
            used = np.zeros(w.size, dtype=bool)
            for k in range(w.size):
                if used[k]:
                    continue
                members = np.flatnonzero((np.abs(w - w[k]) <= group_tol) & ~used)
                used[members] = True
                P = V[:, members] @ W[members, :]
                self._groups.append(complex(np.mean(w[members])))
                self.eigenprojections.append(P)

    def check_invariants(self) -> dict:
        out = {}
        if self.diagonalizable:
            out["projections_sum_to_identity"] = float(
                np.max(np.abs(sum(self.eigenprojections) - np.eye(self.dim)))
            )
        a = np.sort_complex(np.round(self.adjoint_eigenvalues, 8))
        b = np.sort_complex(np.round(np.conj(self.eigenvalues), 8))
        out["adjoint_is_conjugate"] = float(np.max(np.abs(a - b)))
        return out

    def projection(self, lam: complex, tol: float = 1e-8) -> np.ndarray:
        """Spectral projection onto the eigenvalues within ``tol`` of ``lam``."""
        if not self.diagonalizable:
            raise SolveError("spectral projections need a diagonalizable matrix")
        P = np.zeros((self.dim, self.dim), dtype=complex)
        for mu, Pk in zip(self._groups, self.eigenprojections):
            if abs(mu - lam) <= tol:
                P = P + Pk
        return P

    def resolvent(self, z: complex) -> np.ndarray:
        M = complex(z) * np.eye(self.dim) - self.A
        if np.linalg.cond(M) > 1e14:
            raise SolveError(f"z = {z} is (numerically) an eigenvalue")
        return np.linalg.solve(M, np.eye(self.dim))

    def spectral_abscissa(self) -> float:
        return float(np.max(self.eigenvalues.real))

    def to_dict(self):
        return matrix_to_json(self.A)


def _operator(A) -> OperatorMatrix:
    return A if isinstance(A, OperatorMatrix) else OperatorMatrix(A)


def sigma_i(A, axis_tol: float = AXIS_TOL) -> list:
    """Imaginary parts of the eigenvalues on the imaginary axis (within ``axis_tol``)."""
    op = _operator(A)
    vals = sorted(float(l.imag) for l in op.eigenvalues if abs(l.real) <= axis_tol)
    out = []
    for v in vals:
        if not out or abs(v - out[-1]) > 1e-9:
            out.append(v)
    return out


# ---------------------------------------------------------------------------
# Problems and mild solutions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MildSolutionProblem:
    """``u' = A u + f`` with ``u(0) = u0`` sampled on ``grid``."""

    A: OperatorMatrix
    u0: np.ndarray
    grid: Grid
    forcing: FunctionSpec | SampledFunction | None = None

    def __post_init__(self):
        op = _operator(self.A)
        object.__setattr__(self, "A", op)
        u0 = _vector(self.u0, "u0")
        if u0.size != op.dim:
            raise ConfigError(f"u0: length {u0.size} does not match A of size {op.dim}")
        object.__setattr__(self, "u0", u0)
        f = self.forcing
        if f is not None and f.dim != op.dim:
            raise ConfigError(f"forcing: dimension {f.dim} does not match A of size {op.dim}")
        if isinstance(f, SampledFunction) and f.grid != self.grid:
            raise ConfigError("forcing: sampled on a different grid")

    @property
    def homogeneous(self) -> bool:
        return self.forcing is None

    @classmethod
    def from_dict(cls, d, base_dir=None) -> "MildSolutionProblem":
        if not isinstance(d, dict):
            raise ConfigError("problem: expected an object")
        A = matrix_from_json(d.get("A"), "A")
        if "u0" not in d:
            raise ConfigError("u0: missing")
        g = d.get("grid")
        if not isinstance(g, dict):
            raise ConfigError("grid: missing")
        grid = grid_from_dict(g)
        forcing = d.get("forcing")
        spec = None if forcing is None else spec_from_dict(forcing, "forcing", base_dir)
        return cls(OperatorMatrix(A), d["u0"], grid, spec)

    def to_dict(self):
        out = {"A": matrix_to_json(self.A.A), "u0": vector_to_json(self.u0), "grid": self.grid.to_dict()}
        if isinstance(self.forcing, FunctionSpec):
            out["forcing"] = self.forcing.to_dict()
        return out


def grid_from_dict(g) -> Grid:
    try:
        domain = g.get("domain", HALFLINE)
        step, span = g["step"], g["span"]
    except (KeyError, AttributeError):
        raise ConfigError("grid: needs 'step' and 'span'") from None
    for name, v in (("step", step), ("span", span)):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"grid.{name}: must be a number")
    return Grid(domain, float(step), float(span))


def _solve_shift(A, z, c):
    M = z * np.eye(A.shape[0]) - A
    if np.linalg.cond(M) > 1e12:
        raise ImaginaryAxisError(f"forcing exponent {z} resonates with an eigenvalue of A")
    return np.linalg.solve(M, c)


def particular_spec(A, spec: FunctionSpec | None) -> FunctionSpec | None:
    """Closed-form bounded particular solution for exponential-type forcing, or None."""
    A = np.asarray(A, dtype=complex)
    if spec is None:
        return None
    if isinstance(spec, TrigPolynomial):
        amps = [_solve_shift(A, 1j * xi, c) for xi, c in spec.terms]
        return TrigPolynomial(spec.frequencies, tuple(amps))
    if isinstance(spec, ExponentialDecay):
        return ExponentialDecay(spec.rate, _solve_shift(A, -spec.rate, spec.amplitude))
    if isinstance(spec, Sum):
        parts = [particular_spec(A, p) for p in spec.parts]
        return None if any(p is None for p in parts) else Sum(tuple(parts))
    if isinstance(spec, Modulated):
        inner = particular_spec(A - 1j * spec.frequency * np.eye(A.shape[0]), spec.base)
        return None if inner is None else Modulated(inner, spec.frequency)
    if isinstance(spec, Translated):
        inner = particular_spec(A, spec.base)
        return None if inner is None else Translated(inner, spec.shift)
    return None


def _forcing_values(p: MildSolutionProblem, times):
    f = p.forcing
    if f is None:
        return np.zeros((times.size, p.A.dim), dtype=complex)
    if isinstance(f, SampledFunction):
        return f.values
    if isinstance(f, Tabulated) and not f.covers(times[0], times[-1]):
        raise SpanError("forcing table does not cover the grid")
    return f.evaluate(times)


def _halfline_solution(p: MildSolutionProblem) -> np.ndarray:
    g = p.grid
    h, n, d = g.step, g.count, p.A.dim
    A = p.A.A
    E = expm(h * A)
    if p.homogeneous:
        return kernels.matrix_recurrence(E, np.zeros((n, d)), p.u0[None, :], stride=1)
    F = _forcing_values(p, g.times)
    if isinstance(p.forcing, FunctionSpec) and not isinstance(p.forcing, Tabulated):
        f_half = p.forcing.evaluate(np.array([0.5 * h]))[0]
    elif n >= 3:
        f_half = (3 * F[0] + 6 * F[1] - F[2]) / 8
    else:
        f_half = 0.5 * (F[0] + F[1])
    # first step: Simpson over [0, h] with the midpoint
    u1 = E @ p.u0 + (h / 6) * (E @ F[0] + 4 * (expm(0.5 * h * A) @ f_half) + F[1])
    if n < 3:
        return np.vstack([p.u0, u1])[:n]
    E2 = E @ E
    B = np.zeros((n, d), dtype=complex)
    B[: n - 2] = (h / 3) * (F[:-2] @ E2.T + 4 * F[1:-1] @ E.T + F[2:])
    return kernels.matrix_recurrence(E2, B, np.vstack([p.u0, u1]), stride=2)


def mild_solution(p: MildSolutionProblem, overflow_guard: float = 1e8) -> SampledFunction:
    """Mild solution on ``p.grid``.

    Half-line: variation of constants with exact ``exp(h A)`` steps and a
    Simpson rule for the forcing. Line: the bounded solution built from the
    particular solution of exponential-type forcing plus the part of ``u0``
    in the imaginary-axis eigenspace (other components of ``u0`` have no
    bounded continuation to the whole line and are dropped, with a note).
    """
    A = p.A.A
    notes = []
    if p.grid.domain == HALFLINE:
        U = _halfline_solution(p)
        part = None
        if isinstance(p.forcing, FunctionSpec) and not isinstance(p.forcing, Tabulated):
            try:
                part = particular_spec(A, p.forcing)
            except ImaginaryAxisError:
                part = None
        if p.homogeneous:
            spec = Orbit(A, p.u0)
        elif part is not None:
            spec = Sum((Orbit(A, p.u0 - part.evaluate(np.zeros(1))[0]), part))
        else:
            spec = None
    else:
        if isinstance(p.forcing, SampledFunction) or isinstance(p.forcing, Tabulated):
            raise ConfigError("forcing: line problems need a closed-form forcing")
        part = particular_spec(A, p.forcing) if p.forcing is not None else None
        if part is not None and part.half_line_only:
            raise ConfigError("forcing: unbounded on the line")
        if p.forcing is not None and part is None:
            raise ConfigError("forcing: no closed-form particular solution for this kind")
        x = p.u0 - (part.evaluate(np.zeros(1))[0] if part is not None else 0)
        centre_terms = []
        kept = np.zeros(p.A.dim, dtype=complex)
        if np.linalg.norm(x) > 0:
            if not p.A.diagonalizable:
                raise SolveError("line solutions need a diagonalizable A")
            for mu, P in zip(p.A._groups, p.A.eigenprojections):
                if abs(mu.real) <= AXIS_TOL:
                    v = P @ x
                    kept = kept + v
                    if np.linalg.norm(v) > 0:
                        centre_terms.append((mu.imag, v))
            dropped = float(np.linalg.norm(x - kept))
            if dropped > 1e-10 * (1 + np.linalg.norm(p.u0)):
                notes.append(f"mild_solution: u0 component of norm {dropped:.3g} off the imaginary eigenspace dropped")
        terms = {}
        if part is not None:
            for xi, c in part.terms:
                terms[xi] = terms.get(xi, 0) + c
        for xi, v in centre_terms:
            terms[xi] = terms.get(xi, 0) + v
        if not terms:
            terms = {0.0: np.zeros(p.A.dim, dtype=complex)}
        spec = TrigPolynomial.from_terms(sorted(terms.items(), key=lambda kv: kv[0]))
        U = spec.evaluate(p.grid.times)
    norms = np.linalg.norm(U, axis=1)
    f_bound = p.forcing.bound() if isinstance(p.forcing, FunctionSpec) else None
    scale = 1.0 + np.linalg.norm(p.u0) + (f_bound or 0.0)
    if not np.all(np.isfinite(U)) or np.max(norms) > overflow_guard * scale:
        msg = f"mild_solution: solution norm {np.nanmax(norms):.3g} exceeds the overflow guard"
        warnings.warn(msg, UnboundedWarning, stacklevel=2)
        notes.append(msg)
    bound = float(np.nanmax(norms)) if norms.size else 0.0
    return SampledFunction(p.grid, U, bound, spec, tuple(notes))


def cumulative_simpson(values, h: float) -> np.ndarray:
    """``int_{t_0}^{t_i} v`` at every node, fourth order everywhere.

    Even nodes use composite Simpson; an odd node adds one interval integrated
    by the cubic through four neighbouring nodes.
    """
    v = np.asarray(values)
    n = v.shape[0]
    out = np.zeros_like(v, dtype=np.result_type(v.dtype, float))
    if n < 2:
        return out
    if n < 4:
        out[1:] = np.cumsum(0.5 * h * (v[1:] + v[:-1]), axis=0)
        return out
    panels = (h / 3) * (v[0:-2:2] + 4 * v[1:-1:2] + v[2::2])
    out[2::2] = np.cumsum(panels, axis=0)
    for j in range(0, n - 1, 2):
        # single interval [j, j+1]
        if j == 0:
            w = (h / 24) * (9 * v[0] + 19 * v[1] - 5 * v[2] + v[3])
        elif j + 2 <= n - 1:
            w = (h / 24) * (-v[j - 1] + 13 * v[j] + 13 * v[j + 1] - v[j + 2])
        else:
            w = (h / 24) * (v[j - 2] - 5 * v[j - 1] + 19 * v[j] + 9 * v[j + 1])
        out[j + 1] = out[j] + w
    return out


def mild_residual(u: SampledFunction, A, f: SampledFunction | None = None) -> float:
    """``max ||u(t) - u(0) - A int_0^t u - int_0^t f||`` over the grid."""
    op = _operator(A)
    if f is not None and f.grid != u.grid:
        raise ConfigError("grid: u and f are sampled on different grids")
    if u.dim != op.dim:
        raise ConfigError("A: dimension does not match u")
    h = u.grid.step
    r = u.values - u.values[0] - cumulative_simpson(u.values, h) @ op.A.T
    if f is not None:
        r = r - cumulative_simpson(f.values, h)
    return float(np.max(np.linalg.norm(r, axis=1)))


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------


def _apply(M, values):
    return values @ M.T


def resolvent_identity_check(A, f: SampledFunction | None, u: SampledFunction, lam: complex,
                             window_fraction: float = 0.25) -> float:
    """Defect of ``(lam - A) R(lam) u = R(lam) f + u``.

    Line: sup norm of the defect. Half-line: its seminorm modulo C0; for a
    homogeneous problem this is the seminorm of ``R(lam) u - R(lam, A) u``.
    """
    op = _operator(A)
    q = ResolventQuery(lam)
    shift = q.lam * np.eye(op.dim) - op.A
    if u.domain == LINE:
        Ru = resolvent_line(u, q)
        d = _apply(shift, Ru.values) - u.values
        if f is not None:
            d = d - resolvent_line(f, q).values
        return float(np.max(np.linalg.norm(d, axis=1)))
    Ru = resolvent_halfline(u, q)
    if f is None:
        RA = op.resolvent(q.lam)
        d = Ru.values - _apply(RA, u.values)
    else:
        d = _apply(shift, Ru.values) - resolvent_halfline(f, q).values - u.values
    return quotient_norm_c0(u.with_values(d, 0.0), window_fraction)


@dataclass(frozen=True)
class InclusionReport:
    passed: bool
    flagged: tuple
    allowed: tuple
    violations: tuple
    tolerance: float
    method: str

    def to_dict(self):
        return {
            "passed": self.passed,
            "flagged_xi": list(self.flagged),
            "allowed_xi": list(self.allowed),
            "violations": list(self.violations),
            "tolerance": self.tolerance,
            "method": self.method,
        }


def spectral_inclusion_check(A, f: SampledFunction | None, u: SampledFunction, estimates: dict | None = None,
                             grid: FrequencyGrid | None = None) -> InclusionReport:
    """Every flagged cell of ``u`` lies near ``sigma_i(A)`` or a flagged cell of ``f``.

    ``estimates`` may carry precomputed ``{"u": SpectrumEstimate, "f": SpectrumEstimate}``.
    Line problems use the Carleman spectrum; half-line homogeneous problems the
    spectrum modulo C0 (and ``f`` must be None).
    """
    estimates = dict(estimates or {})
    grid = grid or (estimates["u"].frequencies if "u" in estimates else default_frequency_grid(u))
    allowed = list(sigma_i(A))
    if u.domain == LINE:
        est_u = estimates.get("u") or carleman_spectrum(u, grid)
        if f is not None:
            est_f = estimates.get("f") or carleman_spectrum(f, grid)
            allowed += [float(x) for x in est_f.flagged_xis()]
    else:
        if f is not None:
            raise ConfigError("forcing: the half-line inclusion check is for homogeneous problems")
        est_u = estimates.get("u") or reduced_spectrum_c0(u, grid)
    eps = est_u.parameters.get("epsilon", 0.0)
    tol = grid.step + eps + 1e-9
    flagged = [float(x) for x in est_u.flagged_xis()]
    allowed_arr = np.asarray(allowed)
    bad = [x for x in flagged if allowed_arr.size == 0 or np.min(np.abs(allowed_arr - x)) > tol]
    return InclusionReport(not bad, tuple(flagged), tuple(sorted(set(allowed))), tuple(bad), tol, est_u.method)


@dataclass(frozen=True)
class ErgodicConditionResult:
    holds: bool
    xi: float
    alpha_schedule: tuple
    sup_norms: tuple
    extrapolated: float
    projection_norm: float | None
    consistent: bool | None
    horizon: float
    erg_tol: float

    def __bool__(self):
        return self.holds

    def to_dict(self):
        return {
            "holds": self.holds,
            "xi": self.xi,
            "alpha_schedule": list(self.alpha_schedule),
            "sup_norms": list(self.sup_norms),
            "extrapolated": self.extrapolated,
            "projection_norm": self.projection_norm,
            "projection_consistent": self.consistent,
            "certified_horizon": self.horizon,
            "erg_tol": self.erg_tol,
        }


def operator_ergodic_condition(A, xi: float, u: SampledFunction, alpha_schedule=DEFAULT_ALPHAS,
                               erg_tol: float = 1e-3) -> ErgodicConditionResult:
    """Does ``alpha R(alpha + i xi, A) u(t)`` vanish uniformly as ``alpha -> 0``?

    The sup over grid nodes is computed per alpha by direct solves and
    linearly extrapolated to ``alpha = 0`` from the last two values. For a
    diagonalizable ``A`` the limit is ``sup ||P u(t)||`` with ``P`` the
    spectral projection at ``i xi``; that value is reported as a cross-check.
    Uniformity is certified over the sampled horizon only.
    """
    op = _operator(A)
    alphas = tuple(float(a) for a in alpha_schedule)
    if len(alphas) < 2 or any(a <= 0 for a in alphas) or any(b >= a for a, b in zip(alphas, alphas[1:])):
        raise ConfigError("alpha_schedule: need >= 2 positive strictly decreasing values")
    sups = []
    for a in alphas:
        M = complex(a, xi) * np.eye(op.dim) - op.A
        if np.linalg.cond(M) > 1e14:
            raise SolveError(f"alpha + i xi = {complex(a, xi)} is an eigenvalue of A")
        V = np.linalg.solve(M, u.values.T).T * a
        sups.append(float(np.max(np.linalg.norm(V, axis=1))) if V.size else 0.0)
    a_p, a_l = alphas[-2], alphas[-1]
    extrap = max(0.0, (a_p * sups[-1] - a_l * sups[-2]) / (a_p - a_l))
    proj = consistent = None
    if op.diagonalizable:
        P = op.projection(1j * xi)
        proj = float(np.max(np.linalg.norm(u.values @ P.T, axis=1))) if u.values.size else 0.0
        consistent = bool(abs(proj - extrap) <= max(erg_tol, 1e-3 * proj))
    return ErgodicConditionResult(extrap <= erg_tol, float(xi), alphas, tuple(sups), extrap, proj, consistent,
                                  u.grid.span, erg_tol)


@dataclass(frozen=True, eq=False)
class StabilityVerdict:
    verdict: str
    hypotheses: dict
    seminorm: float | None
    witness: float | None
    ergodic: tuple = ()
    confirmed: bool | None = None
    horizon: float | None = None
    notes: tuple = field(default=())

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "hypotheses": dict(self.hypotheses),
            "seminorm_c0": self.seminorm,
            "witness_xi": self.witness,
            "ergodic": [e.to_dict() for e in self.ergodic],
            "empirically_confirmed": self.confirmed,
            "certified_horizon": self.horizon,
            "notes": list(self.notes),
        }


def minh_stability_check(p: MildSolutionProblem, alpha_schedule=DEFAULT_ALPHAS, stab_tol: float = 1e-3,
                         erg_tol: float = 1e-3, window_fraction: float = 0.25) -> StabilityVerdict:
    """Asymptotic stability of one orbit from countable imaginary spectrum plus ergodicity.

    Hypothesis (i) is automatic in finite dimension and reported as such;
    (ii) is tested at every point of ``sigma_i(A)``. A failed hypothesis gives
    ``NotCovered`` with the measured seminorm and no claim of instability.
    """
    if p.grid.domain != HALFLINE:
        raise ConfigError("grid.domain: the stability check is for half-line problems")
    if not p.homogeneous:
        raise ConfigError("forcing: the stability check is for homogeneous problems")
    u = mild_solution(p)
    sig = sigma_i(p.A)
    results = tuple(operator_ergodic_condition(p.A, xi, u, alpha_schedule, erg_tol) for xi in sig)
    ergodic_ok = all(r.holds for r in results)
    semi = quotient_norm_c0(u, window_fraction)
    hyp = {"imaginary_spectrum_countable": True, "imaginary_spectrum": sig, "uniformly_ergodic": ergodic_ok}
    witness = next((r.xi for r in results if not r.holds), None)
    if ergodic_ok:
        return StabilityVerdict(STABLE_BY_THEOREM, hyp, semi, None, results, semi <= stab_tol, p.grid.span, u.notes)
    return StabilityVerdict(NOT_COVERED, hyp, semi, witness, results, None, p.grid.span, u.notes)


def ablv_check(A, grid: Grid | None = None, flow_bound: float = 1e3, stab_tol: float = 1e-3,
               axis_tol: float = AXIS_TOL, window_fraction: float = 0.25) -> StabilityVerdict:
    """All orbits decay when the imaginary spectrum is countable and ``A*`` has no imaginary eigenvalue.

    The bounded-flow assumption is checked by sampling ``||exp(t A)||`` on
    ``grid`` (default half-line, step 0.1, span 40).
    """
    op = _operator(A)
    grid = grid or Grid.halfline(0.1, 40.0)
    E = expm(grid.step * op.A)
    Phi = np.eye(op.dim, dtype=complex)
    sup_flow = 1.0
    basis_paths = [np.eye(op.dim, dtype=complex)]
    for _ in range(grid.count - 1):
        Phi = E @ Phi
        basis_paths.append(Phi)
        sup_flow = max(sup_flow, float(np.linalg.norm(Phi, 2)))
        if sup_flow > flow_bound:
            raise PreconditionError(
                f"flow is not bounded: ||exp(tA)|| = {sup_flow:.3g} > {flow_bound:g} at t = {grid.step * (len(basis_paths) - 1):g}"
            )
    adj_axis = [complex(m) for m in op.adjoint_eigenvalues if abs(m.real) <= axis_tol]
    hyp = {
        "imaginary_spectrum_countable": True,
        "adjoint_point_spectrum_on_axis_empty": not adj_axis,
        "flow_bound": sup_flow,
    }
    paths = np.asarray(basis_paths)  # (n, d, d): column j is the orbit of e_j
    semis = [
        quotient_norm_c0(SampledFunction(grid, paths[:, :, j], sup_flow), window_fraction)
        for j in range(op.dim)
    ]
    semi = float(max(semis))
    if adj_axis:
        witness = float(-adj_axis[0].imag)
        return StabilityVerdict(NOT_COVERED, hyp, semi, witness, (), None, grid.span)
    return StabilityVerdict(ALL_STABLE, hyp, semi, None, (), semi <= stab_tol, grid.span)
