"""Resolvents of the derivative on the line and half-line, and Abel means.

All integrals have the form ``int_0^H exp(-lam eta) f(t + eta) d eta`` and are
evaluated at every grid node at once by a backward recurrence

    g_i = exp(-lam * s * h) * g_{i+s} + b_i,

where ``b_i`` integrates one panel of ``s`` steps. The panel rule is
exponentially fitted: the real decay ``exp(-Re(lam) eta)`` is integrated
exactly and the demodulated function ``exp(-i Im(lam) eta) f(t_i + eta)`` is
interpolated (quadratic for Simpson, linear for the trapezoid rule). The rule
is exact for constants and for pure waves at resonance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.signal import czt

from . import kernels
from ._parallel import ordered_map, thread_count
from .errors import ConfigError, DomainError, ImaginaryAxisError, TruncationError
from .funcspace import (
    HALFLINE,
    LINE,
    FunctionSpec,
    Grid,
    SampledFunction,
    Tabulated,
    quotient_norm_c0,
    sup_norm,
)

SIMPSON = "simpson"
TRAPEZOID = "trapezoid"

DEFAULT_TAIL_TOL = 1e-9
DEFAULT_LAM_FLOOR = 1e-6
DEFAULT_ALPHAS = tuple(0.1 * 2.0**-k for k in range(10))

# Memory budget (complex entries) for one recurrence chunk.
_CHUNK_ENTRIES = 2**23

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class ResolventQuery:
    """Parameters of one resolvent evaluation.

    ``horizon`` overrides the automatic truncation length; it must be at
    least the length needed to reach ``tail_tol``.
    """

    lam: complex
    tail_tol: float = DEFAULT_TAIL_TOL
    rule: str = SIMPSON
    horizon: float | None = None
    lam_floor: float = DEFAULT_LAM_FLOOR

    def __post_init__(self):
        lam = complex(self.lam)
        object.__setattr__(self, "lam", lam)
        if not (np.isfinite(lam.real) and np.isfinite(lam.imag)):
            raise ConfigError(f"lam: not finite ({lam})")
        if abs(lam.real) < self.lam_floor:
            raise ImaginaryAxisError(
                f"|Re lam| = {abs(lam.real):.3g} is below the floor {self.lam_floor:g}"
            )
        if self.rule not in (SIMPSON, TRAPEZOID):
            raise ConfigError(f"rule: expected 'simpson' or 'trapezoid', got {self.rule!r}")
        if not self.tail_tol > 0:
            raise ConfigError("tail_tol: must be > 0")
        if self.horizon is not None and not self.horizon > 0:
            raise ConfigError("horizon: must be > 0")

    def required_horizon(self, bound: float) -> float:
        """Length after which the dropped tail is below ``tail_tol``."""
        a = abs(self.lam.real)
        if bound <= 0:
            return 0.0
        return max(0.0, math.log(bound / (self.tail_tol * a)) / a)

    def horizon_for(self, bound: float) -> float:
        need = self.required_horizon(bound)
        if self.horizon is None:
            return need
        if self.horizon < need * (1 - 1e-12):
            raise TruncationError(
                f"horizon {self.horizon:g} < {need:g} needed for tail_tol {self.tail_tol:g} at lam={self.lam}"
            )
        return float(self.horizon)


def _as_query(q, **kw) -> ResolventQuery:
    return q if isinstance(q, ResolventQuery) else ResolventQuery(complex(q), **kw)


# ---------------------------------------------------------------------------
# Fitted panel rule and the vectorised recurrence
# ---------------------------------------------------------------------------


def _fitted_weights(lam, h, points, length):
    """Weights of the fitted rule on ``[0, length]`` for interpolation ``points``.

    Returns an array (K, P) so that the panel integral is
    ``sum_j w[k, j] * f(t_i + points[j])``.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    a = lam.real
    nsub = max(1, int(math.ceil(float(np.max(a)) * length / 4.0)))
    edges = np.linspace(0.0, length, nsub + 1)
    half = 0.5 * np.diff(edges)
    eta = (edges[:-1, None] + half[:, None] * (_GL_X[None, :] + 1.0)).ravel()
    wq = (half[:, None] * _GL_W[None, :]).ravel()
    points = np.asarray(points, dtype=float)
    basis = np.empty((points.size, eta.size))
    for j, pj in enumerate(points):
        others = np.delete(points, j)
        basis[j] = np.prod((eta[None, :] - others[:, None]) / (pj - others[:, None]), axis=0)
    kern = np.exp(-np.outer(a, eta)) * wq[None, :]
    return (kern @ basis.T) * np.exp(-1j * np.outer(lam.imag, points))


def _forward(F, lam, h, rule=SIMPSON, keep=None):
    """``int_0^{end} exp(-lam eta) F(t_i + eta) d eta`` at every node.

    ``F`` has shape (n, d) on a uniform grid of step ``h``; the integral at node
    i runs to the last node. ``lam`` is a scalar or a vector of K values with
    positive real parts. Returns (n_keep, K, d), or (n_keep, d) for scalar lam.
    """
    scalar = np.ndim(lam) == 0
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    F = np.asarray(F, dtype=complex)
    n, d = F.shape
    if rule == SIMPSON and n < 3:
        rule = TRAPEZOID
    keep = slice(None) if keep is None else keep
    if n <= 1:
        z = np.zeros((n, lam.size, d), dtype=complex)[keep]
        return z[:, 0] if scalar else z
    if rule == SIMPSON:
        stride = 2
        c = _fitted_weights(lam, h, [0.0, h, 2 * h], 2 * h)
        ce = _fitted_weights(lam, h, [-h, 0.0, h], h)
    else:
        stride = 1
        c = _fitted_weights(lam, h, [0.0, h], h)
    decay = np.exp(-lam * stride * h)
    if isinstance(keep, slice) and keep.start in (None, 0) and keep.step in (None, 1):
        nkeep = n if keep.stop is None else min(keep.stop, n)
        out = kernels.fitted_backward(F, c, ce if rule == SIMPSON else None, decay, stride, nkeep)
    else:
        out = kernels.fitted_backward(F, c, ce if rule == SIMPSON else None, decay, stride, n)[keep]
    return out[:, 0] if scalar else out


def _extension(f: SampledFunction, count: int, side: str):
    """Values at ``count`` extra nodes past the grid on ``side`` ('right' or 'left').

    Returns (values, available) where ``available <= count`` is the number of
    extra nodes that could be produced (closed-form specs always give all).
    """
    g = f.grid
    if count <= 0:
        return np.zeros((0, f.dim), dtype=complex), 0
    if side == "right":
        times = g.times[-1] + g.step * np.arange(1, count + 1)
    else:
        times = g.times[0] - g.step * np.arange(count, 0, -1)
    spec = f.spec
    if spec is None:
        return np.zeros((0, f.dim), dtype=complex), 0
    if isinstance(spec, Tabulated):
        half = 0.5 * spec.step
        ok = (times >= spec.times[0] - half) & (times <= spec.times[-1] + half)
        times = times[ok]
        return spec.evaluate(times), times.size
    if g.domain == LINE and spec.half_line_only:
        raise DomainError("spec is unbounded on the line")
    return spec.evaluate(times), count


def _note_clip(notes, op, needed, got, tail):
    if got < needed:
        notes.append(
            f"{op}: truncation horizon clipped to the available span "
            f"({got} of {needed} extension nodes); tail bound {tail:.3g} not guaranteed"
        )


def _branch_forward(f, q, side, extend=True):
    """Run the forward integral on ``f`` (side='right') or on its mirror image."""
    notes = []
    h = f.grid.step
    lam = q.lam if side == "right" else -q.lam
    H = q.horizon_for(f.bound)
    need = int(math.ceil(H / h)) + 2 if extend else 0
    ext, got = _extension(f, need, side)
    if extend:
        _note_clip(notes, "resolvent", need, got, f.bound * math.exp(-abs(q.lam.real) * got * h) / abs(q.lam.real))
    if side == "right":
        F = np.vstack([f.values, ext])
        G = _forward(F, lam, h, q.rule, keep=slice(0, f.grid.count))
    else:
        F = np.vstack([ext, f.values])[::-1]
        G = -_forward(F, lam, h, q.rule, keep=slice(0, f.grid.count))[::-1]
    return G, notes


@dataclass(frozen=True, eq=False)
class ResolventSpec(FunctionSpec):
    """Closed-form handle for ``R(lam) base``, evaluated by the same quadrature."""

    base: FunctionSpec
    lam: complex
    domain: str
    step: float
    tail_tol: float = DEFAULT_TAIL_TOL
    rule: str = SIMPSON
    scale: complex = 1.0
    kind = "resolvent"

    @property
    def dim(self):
        return self.base.dim

    @property
    def half_line_only(self):
        return self.base.half_line_only

    def bound(self):
        b = self.base.bound()
        return None if b is None else abs(self.scale) * b / abs(self.lam.real)

    def _on_uniform(self, start, step, count):
        if self.domain == HALFLINE:
            # half-line: the grid starts at 0 so the finite-memory branch sees the origin
            grid = Grid.halfline(step, max(step * (count - 1) + start, step))
        else:
            span = max(abs(start), abs(start + step * (count - 1)), step)
            grid = Grid.line(step, span)
        bound = self.base.bound()
        base_vals = self.base.evaluate(grid.times)
        if bound is None:
            bound = float(np.max(np.linalg.norm(base_vals, axis=1)))
        f = SampledFunction(grid, base_vals, bound, self.base)
        q = ResolventQuery(self.lam, tail_tol=self.tail_tol, rule=self.rule)
        g = (resolvent_halfline if self.domain == HALFLINE else resolvent_line)(f, q)
        return grid.times, g.values * self.scale

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        if t.size == 0:
            return np.zeros((0, self.dim), dtype=complex)
        lo, hi = float(t.min()), float(t.max())
        if self.domain == HALFLINE:
            lo = 0.0
        else:
            lo, hi = min(lo, -hi), max(hi, -lo)
        count = int(math.ceil((hi - lo) / self.step)) + 1
        times, vals = self._on_uniform(lo, self.step, max(count, 3))
        if times.size == t.size and np.allclose(times, t, atol=1e-9 * self.step):
            return vals
        idx = np.rint((t - times[0]) / self.step)
        if np.allclose(times[0] + idx * self.step, t, atol=1e-9 * self.step):
            return vals[np.clip(idx.astype(int), 0, times.size - 1)]
        spline = CubicSpline(times, vals, axis=0)
        return spline(t)

    def to_dict(self):
        return {
            "kind": self.kind,
            "lam": [self.lam.real, self.lam.imag],
            "domain": self.domain,
            "step": self.step,
            "base": self.base.to_dict(),
        }


def _result(f, q, values, notes, scale=1.0):
    a = abs(q.lam.real)
    bound = abs(scale) * (f.bound / a + q.tail_tol)
    spec = None
    if f.spec is not None and not isinstance(f.spec, Tabulated):
        spec = ResolventSpec(f.spec, q.lam, f.domain, f.grid.step, q.tail_tol, q.rule, scale)
    return SampledFunction(f.grid, values * scale, bound, spec, tuple(f.notes) + tuple(notes))


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def resolvent_line(f: SampledFunction, q) -> SampledFunction:
    """Bounded solution ``g`` of ``lam g - g' = f`` on the line.

    ``q`` is a :class:`ResolventQuery` or a complex ``lam``.
    """
    q = _as_query(q)
    if f.domain != LINE:
        raise DomainError("resolvent_line needs a line function")
    side = "right" if q.lam.real > 0 else "left"
    G, notes = _branch_forward(f, q, side)
    return _result(f, q, G, notes)


def resolvent_halfline(f: SampledFunction, q) -> SampledFunction:
    """Resolvent on the half-line.

    For ``Re lam > 0`` this is the forward exponential integral. For
    ``Re lam < 0`` it is ``-int_0^t exp(lam s) f(t - s) ds``, which drops the
    decaying term ``exp(lam t) g(0)`` and so is a representative of the
    resolvent only modulo functions vanishing at infinity.
    """
    q = _as_query(q)
    if f.domain != HALFLINE:
        raise DomainError("resolvent_halfline needs a half-line function")
    if q.lam.real > 0:
        G, notes = _branch_forward(f, q, "right")
    else:
        G, notes = _branch_forward(f, q, "left", extend=False)
    return _result(f, q, G, notes)


def resolvent(f: SampledFunction, q) -> SampledFunction:
    """Domain-appropriate resolvent."""
    return resolvent_line(f, q) if f.domain == LINE else resolvent_halfline(f, q)


def resolvent_residual(f: SampledFunction, g: SampledFunction, lam: complex) -> float:
    """``max ||lam g - g' - f||`` over interior nodes, with a central-difference ``g'``."""
    h = f.grid.step
    dg = (g.values[2:] - g.values[:-2]) / (2 * h)
    r = complex(lam) * g.values[1:-1] - dg - f.values[1:-1]
    return float(np.max(np.linalg.norm(r, axis=1))) if r.size else 0.0


def _from_origin(f: SampledFunction, side: str, H: float):
    """Values on nodes 0, h, 2h, ... (side='right') or 0, -h, ... (side='left')."""
    h = f.grid.step
    m = int(math.ceil(H / h)) + 2
    sgn = 1.0 if side == "right" else -1.0
    g = f.grid
    if f.spec is not None and not isinstance(f.spec, Tabulated):
        return f.spec.evaluate(sgn * h * np.arange(m + 1)), m + 1, m + 1
    # samples plus whatever the table provides, starting at the node nearest 0
    i0 = int(round(-g.start / h))
    if side == "right":
        vals = f.values[i0:]
        ext, _ = _extension(f, max(0, m + 1 - vals.shape[0]), "right")
    else:
        vals = f.values[: i0 + 1][::-1]
        ext, _ = _extension(f, max(0, m + 1 - vals.shape[0]), "left")
        ext = ext[::-1]
    vals = np.vstack([vals, ext])[: m + 1]
    return vals, vals.shape[0], m + 1


def carleman_transform(f: SampledFunction, lam: complex, tail_tol: float = DEFAULT_TAIL_TOL,
                       rule: str = SIMPSON, return_tail: bool = False):
    """Two-branch Laplace transform of ``f`` at ``lam``.

    ``Re lam > 0``: ``int_0^inf exp(-lam t) f(t) dt``;
    ``Re lam < 0``: ``-int_{-inf}^0 exp(-lam t) f(t) dt``.
    With ``return_tail=True`` also returns the bound on the dropped tail.
    """
    q = _as_query(lam, tail_tol=tail_tol, rule=rule)
    if f.domain == HALFLINE and q.lam.real < 0:
        raise DomainError("the left branch of the transform needs a line function")
    a = abs(q.lam.real)
    H = q.horizon_for(f.bound)
    side = "right" if q.lam.real > 0 else "left"
    F, got, need = _from_origin(f, side, H)
    mu = q.lam if side == "right" else -q.lam
    G = _forward(F, mu, f.grid.step, q.rule, keep=slice(0, 1))[0]
    value = G if side == "right" else -G
    tail = f.bound * math.exp(-a * (got - 1) * f.grid.step) / a
    if return_tail:
        return value, tail
    return value


def carleman_jump(f: SampledFunction, etas, alpha: float, tail_tol: float = 1e-6):
    """``(alpha/2) (fhat(alpha + i eta) - fhat(-alpha + i eta))`` for many ``eta``.

    This equals ``(alpha/2) int exp(-alpha|t|) exp(-i eta t) f(t) dt``, computed
    with one chirp-z transform per side; ``etas`` must be uniformly spaced.
    Returns (values of shape (len(etas), d), notes).
    """
    if f.domain != LINE:
        raise DomainError("carleman_jump needs a line function")
    etas = np.asarray(etas, dtype=float)
    h = f.grid.step
    H = max(0.0, math.log(max(f.bound, 1e-300) / (tail_tol * alpha)) / alpha) if f.bound > 0 else 0.0
    notes = []
    d_eta = etas[1] - etas[0] if etas.size > 1 else 1.0
    total = np.zeros((etas.size, f.dim), dtype=complex)
    for side in ("right", "left"):
        F, got, need = _from_origin(f, side, H)
        if got < need:
            notes.append(f"carleman: span clipped on the {side} ({got} of {need} nodes)")
        m = got - 1
        if m % 2:
            m -= 1
        if m < 2:
            continue
        w = np.ones(m + 1)
        w[1:m:2] = 4.0
        w[2:m:2] = 2.0
        w *= h / 3.0
        sgn = 1.0 if side == "right" else -1.0
        t = sgn * h * np.arange(m + 1)
        x = (w * np.exp(-alpha * h * np.arange(m + 1)))[:, None] * F[: m + 1]
        # sum_j x_j exp(-i eta_k t_j), t_j = sgn*j*h, eta_k = eta_0 + k*d_eta
        a_pt = np.exp(1j * sgn * etas[0] * h)
        w_pt = np.exp(-1j * sgn * d_eta * h)
        total += czt(x, m=etas.size, w=w_pt, a=a_pt, axis=0)
        del t
    return 0.5 * alpha * total, notes


def abel_mean(f: SampledFunction, xi: float, alpha: float, tail_tol: float = DEFAULT_TAIL_TOL,
              rule: str = SIMPSON) -> SampledFunction:
    """``alpha R(alpha + i xi) f`` with the domain-appropriate resolvent."""
    if not alpha > 0:
        raise ConfigError(f"alpha: must be > 0, got {alpha!r}")
    # the tail of alpha*R is alpha times the resolvent tail
    q = ResolventQuery(complex(alpha, xi), tail_tol=tail_tol / alpha, rule=rule)
    side_fn = resolvent_line if f.domain == LINE else resolvent_halfline
    g = side_fn(f, q)
    return SampledFunction(g.grid, alpha * g.values, f.bound + tail_tol, None, g.notes)


def abel_tail_scan(f: SampledFunction, etas, alpha: float, window_fraction: float = 0.25,
                   tail_tol: float = 1e-6):
    """Quotient seminorm modulo C0 of ``alpha R(alpha + i eta) f`` for many ``eta``.

    Only the trailing window is evaluated; the recurrence starts at the window.
    Returns (norms of shape (len(etas),), notes).
    """
    if f.domain != HALFLINE:
        raise DomainError("abel_tail_scan needs a half-line function")
    etas = np.asarray(etas, dtype=float)
    g = f.grid
    h = g.step
    H = math.log(max(f.bound, 1e-300) / tail_tol) / alpha if f.bound > tail_tol else 0.0
    need = int(math.ceil(H / h)) + 2
    ext, got = _extension(f, need, "right")
    notes = []
    _note_clip(notes, "reduced scan", need, got, f.bound * math.exp(-alpha * got * h))
    t = g.times
    cut = g.span * (1.0 - window_fraction)
    i0 = int(np.searchsorted(t, cut - 1e-12 * max(1.0, g.span)))
    i0 = min(i0, g.count - 1)
    F = np.vstack([f.values[i0:], ext])
    nwin = g.count - i0
    lams = alpha + 1j * etas
    per = max(1, _CHUNK_ENTRIES // max(1, F.shape[0] * f.dim))
    per = min(per, max(1, -(-etas.size // thread_count())))

    def chunk(k0):
        G = _forward(F, lams[k0 : k0 + per], h, SIMPSON, keep=slice(0, nwin))
        return alpha * np.max(np.linalg.norm(G, axis=2), axis=0)

    parts = ordered_map(chunk, range(0, etas.size, per))
    out = np.concatenate(parts) if parts else np.zeros(0)
    return out, notes


# ---------------------------------------------------------------------------
# Ergodic limits
# ---------------------------------------------------------------------------

ERGODIC_ZERO = "ErgodicZero"
ERGODIC_PURE_WAVE = "ErgodicNonzeroPureWave"
NOT_CONVERGED = "NotConverged"


@dataclass(frozen=True, eq=False)
class ErgodicReport:
    """Abel means ``alpha R(alpha + i xi) f`` along a schedule and their limit."""

    xi: float
    alpha_schedule: tuple
    mean_norms: tuple
    extrapolated_limit: SampledFunction
    amplitude: np.ndarray
    shape_defect: float
    cauchy_defect: float
    verdict: str
    horizon: float
    notes: tuple = field(default=())

    def to_dict(self):
        return {
            "xi": self.xi,
            "alpha_schedule": list(self.alpha_schedule),
            "mean_norms": list(self.mean_norms),
            "amplitude": {"re": self.amplitude.real.tolist(), "im": self.amplitude.imag.tolist()},
            "shape_defect": self.shape_defect,
            "cauchy_defect": self.cauchy_defect,
            "verdict": self.verdict,
            "certified_horizon": self.horizon,
        }


def _neville_zero(alphas, values):
    """Polynomial extrapolation of ``values`` (indexed by alpha) to alpha = 0."""
    p = [np.asarray(v) for v in values]
    x = list(alphas)
    n = len(p)
    for level in range(1, n):
        p = [
            (x[i + level] * p[i] - x[i] * p[i + 1]) / (x[i + level] - x[i])
            for i in range(n - level)
        ]
    return p[0]


def _fit_wave(t, values, xi):
    """Least-squares ``a`` for ``values ~ exp(i xi t) a`` and the sup misfit."""
    phase = np.exp(1j * xi * t)
    a = (np.conj(phase)[:, None] * values).mean(axis=0)
    misfit = values - phase[:, None] * a[None, :]
    return a, float(np.max(np.linalg.norm(misfit, axis=1)))


def ergodic_limit(f: SampledFunction, xi: float, alpha_schedule=DEFAULT_ALPHAS,
                  zero_tol: float = 1e-4, shape_tol: float = 1e-8, cauchy_tol: float = 1e-2,
                  window_fraction: float = 0.25, tail_tol: float = 1e-10) -> ErgodicReport:
    """Abel means along ``alpha_schedule`` and a verdict on their limit.

    The means are extrapolated to ``alpha = 0`` by a polynomial through the last
    three; on the half-line the seminorm and the wave fit use the trailing
    ``window_fraction`` of the grid (behaviour modulo C0).
    """
    alphas = tuple(float(a) for a in alpha_schedule)
    if len(alphas) < 3:
        raise ConfigError("alpha_schedule: need at least 3 values")
    if any(a <= 0 for a in alphas) or any(b >= a for a, b in zip(alphas, alphas[1:])):
        raise ConfigError("alpha_schedule: must be positive and strictly decreasing")
    xi = float(xi)
    means, notes = [], []
    for a in alphas:
        m = abel_mean(f, xi, a, tail_tol=tail_tol)
        means.append(m.values)
        notes.extend(n for n in m.notes if n not in notes and n not in f.notes)
    if f.domain == HALFLINE:
        norm = lambda v: quotient_norm_c0(f.with_values(v, 0.0), window_fraction)  # noqa: E731
        cut = f.grid.span * (1.0 - window_fraction)
        sel = f.t >= cut - 1e-12 * max(1.0, f.grid.span)
    else:
        norm = lambda v: float(np.max(np.linalg.norm(v, axis=1)))  # noqa: E731
        sel = np.ones(f.grid.count, dtype=bool)
    norms = tuple(norm(v) for v in means)
    limit = _neville_zero(alphas[-3:], means[-3:])
    previous = _neville_zero(alphas[-4:-1], means[-4:-1]) if len(alphas) >= 4 else means[-2]
    t = f.t[sel]
    amp, defect = _fit_wave(t, limit[sel], xi)
    cauchy = float(np.max(np.linalg.norm((limit - previous)[sel], axis=1)))
    limit_norm = norm(limit)
    if norms[-1] <= zero_tol or (limit_norm <= zero_tol and norms[-1] <= norms[0]):
        verdict = ERGODIC_ZERO
    elif cauchy > cauchy_tol or defect > shape_tol:
        verdict = NOT_CONVERGED
    else:
        verdict = ERGODIC_PURE_WAVE
    lim_f = SampledFunction(f.grid, limit, max(limit_norm, f.bound), None, tuple(notes))
    return ErgodicReport(xi, alphas, norms, lim_f, amp, defect, cauchy, verdict, f.grid.span, tuple(notes))
