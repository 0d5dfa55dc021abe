"""Spectra of bounded functions on a frequency grid.

Three estimators share one output type:

* Carleman: the jump of the two-branch Laplace transform across ``i xi``,
  ``(alpha/2)(fhat(alpha + i xi) - fhat(-alpha + i xi))``, extrapolated to
  ``alpha = 0``. At a simple pole this tends to the residue, elsewhere to 0.
* Beurling: the output of a band-pass Fejer filter centred at ``xi``.
* Reduced modulo C0 (half-line): the tail seminorm of the Abel mean
  ``alpha R(alpha + i xi) f``, extrapolated to ``alpha = 0``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import fft, ifft, next_fast_len

from ._parallel import ordered_map
from .errors import ConfigError, DomainError, ResolutionError
from .funcspace import HALFLINE, LINE, SampledFunction, quotient_norm_c0, sup_norm
from .resolvent import (
    DEFAULT_ALPHAS,
    ERGODIC_PURE_WAVE,
    _extension,
    abel_tail_scan,
    carleman_jump,
    ergodic_limit,
)

CARLEMAN = "Carleman"
BEURLING = "Beurling"
REDUCED_C0 = "ReducedC0"

DEFAULT_THRESHOLD = 0.05
DEFAULT_KERNEL_TOL = 1e-4
SCAN_TAIL_TOL = 1e-6

DECAYS = "DecaysToZero"
ALMOST_PERIODIC = "TrigPolynomialAlmostPeriodic"
INCONCLUSIVE = "Inconclusive"

_FFT_ENTRIES = 2**23


@dataclass(frozen=True)
class FrequencyGrid:
    """Cells of width ``step`` centred at ``xi_min, xi_min + step, ..., xi_max``."""

    xi_min: float
    xi_max: float
    step: float
    count: int = field(init=False)

    def __post_init__(self):
        for name in ("xi_min", "xi_max", "step"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"frequencies.{name}: must be a finite number")
        if not self.xi_min < self.xi_max:
            raise ConfigError("frequencies.xi_max: must exceed xi_min")
        if not self.step > 0:
            raise ConfigError(f"frequencies.step: must be > 0, got {self.step!r}")
        if self.step > (self.xi_max - self.xi_min) / 4 * (1 + 1e-12):
            raise ConfigError("frequencies.step: must be at most (xi_max - xi_min)/4")
        object.__setattr__(self, "count", int(round((self.xi_max - self.xi_min) / self.step)) + 1)

    @property
    def centers(self) -> np.ndarray:
        return self.xi_min + self.step * np.arange(self.count)

    def index_of(self, xi: float) -> int:
        return int(np.clip(round((xi - self.xi_min) / self.step), 0, self.count - 1))

    def to_dict(self):
        return {"xi_min": self.xi_min, "xi_max": self.xi_max, "step": self.step}


@dataclass(frozen=True)
class Component:
    """A maximal run of adjacent flagged cells."""

    start: int
    stop: int  # inclusive
    peak_xi: float
    peak_score: float

    def to_dict(self):
        return {"start": self.start, "stop": self.stop, "peak_xi": self.peak_xi, "peak_score": self.peak_score}


@dataclass(frozen=True, eq=False)
class SpectrumEstimate:
    frequencies: FrequencyGrid
    scores: np.ndarray
    threshold: float
    method: str
    parameters: dict = field(default_factory=dict)
    notes: tuple = ()

    @property
    def flagged(self) -> np.ndarray:
        return self.scores >= self.threshold

    @property
    def cells(self):
        return [(float(x), float(s), bool(fl)) for x, s, fl in zip(self.frequencies.centers, self.scores, self.flagged)]

    def flagged_xis(self) -> np.ndarray:
        return self.frequencies.centers[self.flagged]

    def components(self) -> list:
        out = []
        fl = self.flagged
        xs = self.frequencies.centers
        i = 0
        while i < fl.size:
            if not fl[i]:
                i += 1
                continue
            j = i
            while j + 1 < fl.size and fl[j + 1]:
                j += 1
            k = i + int(np.argmax(self.scores[i : j + 1]))
            out.append(Component(i, j, float(xs[k]), float(self.scores[k])))
            i = j + 1
        return out

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["xi", "score", "flagged"])
        for x, s, fl in self.cells:
            w.writerow([repr(x), repr(s), int(fl)])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def to_dict(self):
        return {
            "method": self.method,
            "frequencies": self.frequencies.to_dict(),
            "threshold": self.threshold,
            "parameters": self.parameters,
            "flagged_xi": [float(x) for x in self.flagged_xis()],
            "components": [c.to_dict() for c in self.components()],
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        d = self.to_dict()
        d["cells"] = [{"xi": x, "score": s, "flagged": fl} for x, s, fl in self.cells]
        return json.dumps(d, sort_keys=True)


def _check_alphas(alpha_schedule, grid: FrequencyGrid):
    if alpha_schedule is None:
        return (grid.step / 2, grid.step / 4, grid.step / 8)
    alphas = tuple(float(a) for a in alpha_schedule)
    if not alphas:
        raise ConfigError("alpha_schedule: must not be empty")
    if any(a <= 0 for a in alphas) or any(b >= a for a, b in zip(alphas, alphas[1:])):
        raise ConfigError("alpha_schedule: must be positive and strictly decreasing")
    return alphas


def _subpoints(grid: FrequencyGrid, spacing: float):
    """Uniform sub-points, an odd number per cell, the middle one at the centre."""
    s = max(1, int(math.ceil(grid.step / spacing - 1e-9)))
    if s % 2 == 0:
        s += 1
    sub = grid.step / s
    offsets = (np.arange(s) - (s - 1) / 2) * sub
    etas = (grid.centers[:, None] + offsets[None, :]).ravel()
    return etas, s


def _cell_max(values, s):
    return values.reshape(-1, s).max(axis=1)


def carleman_spectrum(f: SampledFunction, grid: FrequencyGrid, alpha_schedule=None,
                      threshold: float = DEFAULT_THRESHOLD, tail_tol: float = SCAN_TAIL_TOL) -> SpectrumEstimate:
    """Cells where the two-branch Laplace transform has a pole on the axis.

    The jump ``J(eta, alpha)`` is computed at the last two values of the
    schedule and extrapolated with ``alpha^2`` Richardson (the jump is even in
    alpha near a simple pole), on sub-points spaced by the smallest alpha. The
    cell score is the largest extrapolated norm over its sub-points.
    """
    if f.domain != LINE:
        raise DomainError("carleman_spectrum needs a line function")
    alphas = _check_alphas(alpha_schedule, grid)
    a_last = alphas[-1]
    etas, s = _subpoints(grid, a_last)
    notes = []
    J_last, n1 = carleman_jump(f, etas, a_last, tail_tol)
    notes += n1
    if len(alphas) >= 2:
        a_prev = alphas[-2]
        J_prev, n2 = carleman_jump(f, etas, a_prev, tail_tol)
        notes += [n for n in n2 if n not in notes]
        J0 = (a_prev**2 * J_last - a_last**2 * J_prev) / (a_prev**2 - a_last**2)
    else:
        J0 = J_last
    scores = _cell_max(np.linalg.norm(J0, axis=1), s)
    params = {"alpha_schedule": list(alphas), "subpoints_per_cell": s, "tail_tol": tail_tol}
    return SpectrumEstimate(grid, scores, float(threshold), CARLEMAN, params, tuple(notes))


def reduced_spectrum_c0(f: SampledFunction, grid: FrequencyGrid, alpha_schedule=None,
                        threshold: float = DEFAULT_THRESHOLD, window_fraction: float = 0.25,
                        tail_tol: float = SCAN_TAIL_TOL) -> SpectrumEstimate:
    """Cells where ``f`` has spectrum modulo functions vanishing at infinity.

    The pointwise score is the tail seminorm of ``alpha R(alpha + i eta) f``,
    linearly extrapolated to ``alpha = 0`` from the last two alphas.
    """
    if f.domain != HALFLINE:
        raise DomainError("reduced_spectrum_c0 needs a half-line function")
    alphas = _check_alphas(alpha_schedule, grid)
    a_last = alphas[-1]
    etas, s = _subpoints(grid, a_last)
    s_last, notes = abel_tail_scan(f, etas, a_last, window_fraction, tail_tol)
    notes = list(notes)
    if len(alphas) >= 2:
        a_prev = alphas[-2]
        s_prev, n2 = abel_tail_scan(f, etas, a_prev, window_fraction, tail_tol)
        notes += [n for n in n2 if n not in notes]
        s0 = (a_prev * s_last - a_last * s_prev) / (a_prev - a_last)
    else:
        s0 = s_last
    scores = _cell_max(np.maximum(s0, 0.0), s)
    params = {
        "alpha_schedule": list(alphas),
        "subpoints_per_cell": s,
        "window_fraction": window_fraction,
        "tail_tol": tail_tol,
    }
    return SpectrumEstimate(grid, scores, float(threshold), REDUCED_C0, params, tuple(notes))


# ---------------------------------------------------------------------------
# Beurling
# ---------------------------------------------------------------------------


def fejer_kernel(eps: float, h: float, kernel_tol: float = DEFAULT_KERNEL_TOL):
    """Real Fejer kernel ``(eps/2pi) sinc^2(eps s / 2)`` times ``h``, on its truncated support.

    Its transform is the triangle ``max(0, 1 - |eta|/eps)``. The truncated
    weights are rescaled to unit sum so the peak of the triangle stays 1.
    Returns (s, weights).
    """
    L = 2.0 / (eps * math.sqrt(kernel_tol))
    m = int(math.ceil(L / h))
    s = h * np.arange(-m, m + 1)
    w = np.sinc(eps * s / (2 * math.pi)) ** 2
    return s, w / w.sum()


def _beurling_scores(f: SampledFunction, xis, eps, kernel_tol):
    h = f.grid.step
    s, K = fejer_kernel(eps, h, kernel_tol)
    m = (s.size - 1) // 2
    notes = []
    left, got_l = _extension(f, m, "left")
    right, got_r = _extension(f, m, "right")
    F = np.vstack([left, f.values, right])
    t0 = f.grid.times[0] - left.shape[0] * h
    t = t0 + h * np.arange(F.shape[0])
    n = f.grid.count
    # output node i (grid index) needs F over [i - m, i + m] shifted by the left padding
    lo = max(0, m - left.shape[0])
    hi = n - max(0, m - right.shape[0])
    if hi <= lo:
        notes.append("beurling: kernel longer than the data; using all available nodes")
        lo, hi = 0, n
    elif got_l < m or got_r < m:
        notes.append(f"beurling: kernel support clipped, score taken over {hi - lo} of {n} nodes")
    nfft = next_fast_len(F.shape[0] + K.size - 1)
    KF = fft(K, nfft)
    per = max(1, _FFT_ENTRIES // (nfft * f.dim))
    xis = np.asarray(xis, dtype=float)

    def chunk(k0):
        xs = xis[k0 : k0 + per]
        X = F[None, :, :] * np.exp(-1j * np.outer(xs, t))[:, :, None]
        Y = ifft(fft(X, nfft, axis=1) * KF[None, :, None], axis=1)
        # full convolution index for grid node i is i + left + m
        off = left.shape[0] + m
        Y = Y[:, off + lo : off + hi, :]
        return np.max(np.linalg.norm(Y, axis=2), axis=1)

    parts = ordered_map(chunk, range(0, xis.size, per))
    return (np.concatenate(parts) if parts else np.zeros(0)), notes


def beurling_spectrum(f: SampledFunction, grid: FrequencyGrid, eps: float,
                      threshold: float = DEFAULT_THRESHOLD, kernel_tol: float = DEFAULT_KERNEL_TOL) -> SpectrumEstimate:
    """Cells where a Fejer band-pass filter of half-width ``eps`` leaves output.

    Transform convention: ``phi~(eta) = int exp(-i eta t) phi(t) dt``, so a
    single wave ``exp(i w t)`` lights up the band around ``w``.
    """
    if f.domain != LINE:
        raise DomainError("beurling_spectrum needs a line function")
    if not eps >= 2 * grid.step * (1 - 1e-12):
        raise ConfigError(f"epsilon: bandwidth {eps!r} is below twice the grid step {grid.step!r}")
    scores, notes = _beurling_scores(f, grid.centers, eps, kernel_tol)
    params = {"epsilon": eps, "kernel_tol": kernel_tol, "fourier_sign": -1}
    return SpectrumEstimate(grid, scores, float(threshold), BEURLING, params, tuple(notes))


def beurling_score(f: SampledFunction, xi: float, eps: float, kernel_tol: float = DEFAULT_KERNEL_TOL) -> float:
    return float(_beurling_scores(f, [xi], eps, kernel_tol)[0][0])


# ---------------------------------------------------------------------------
# Comparison and recovery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoincidenceReport:
    passed: bool
    symmetric_difference: int
    max_component_distance: float
    unmatched_a: tuple
    unmatched_b: tuple
    tolerance: float

    def to_dict(self):
        return {
            "passed": self.passed,
            "symmetric_difference_cells": self.symmetric_difference,
            "max_component_distance": self.max_component_distance,
            "unmatched_a": list(self.unmatched_a),
            "unmatched_b": list(self.unmatched_b),
            "tolerance": self.tolerance,
        }


def coincidence_check(a: SpectrumEstimate, b: SpectrumEstimate) -> CoincidenceReport:
    """Do two estimates flag the same spectrum, up to one bandwidth plus one cell?"""
    if a.frequencies != b.frequencies:
        raise ConfigError("frequencies: estimates use different grids")
    grid = a.frequencies
    eps = max(a.parameters.get("epsilon", 0.0), b.parameters.get("epsilon", 0.0))
    tol = eps + grid.step + 1e-9
    xs = grid.centers
    sym = int(np.sum(a.flagged ^ b.flagged))

    def match(src, dst):
        dst_x = xs[dst.flagged]
        unmatched, worst = [], 0.0
        for c in src.components():
            comp_x = xs[c.start : c.stop + 1]
            if dst_x.size == 0:
                unmatched.append(c.peak_xi)
                continue
            dist = float(np.min(np.abs(comp_x[:, None] - dst_x[None, :])))
            if dist > tol:
                unmatched.append(c.peak_xi)
            else:
                worst = max(worst, dist)
        return unmatched, worst

    ua, wa = match(a, b)
    ub, wb = match(b, a)
    return CoincidenceReport(not ua and not ub, sym, max(wa, wb), tuple(ua), tuple(ub), tol)


@dataclass(frozen=True, eq=False)
class TrigRecovery:
    """Recovered ``sum_k a_k exp(i xi_k t)`` and its sup-norm residual on the fit nodes."""

    terms: tuple
    residual: float
    certified: bool
    recovery_tol: float

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def to_dict(self):
        return {
            "terms": [
                {"frequency": xi, "amplitude": {"re": a.real.tolist(), "im": a.imag.tolist()}}
                for xi, a in self.terms
            ],
            "residual": self.residual,
            "certified": self.certified,
            "recovery_tol": self.recovery_tol,
        }


def _golden_max(fn, lo, hi, tol):
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def _lstsq(t, values, freqs):
    E = np.exp(1j * np.outer(t, freqs))
    amps, *_ = np.linalg.lstsq(E, values, rcond=None)
    res = values - E @ amps
    return amps, res


def trig_poly_recovery(f: SampledFunction, estimate: SpectrumEstimate, max_components: int = 16,
                       recovery_tol: float | None = None, eps: float | None = None,
                       window_fraction: float | None = None) -> TrigRecovery:
    """Fit ``f`` by a trigonometric polynomial on the flagged components.

    Each component's peak is refined by golden-section search on the Beurling
    score, then polished by golden-section search on the least-squares
    residual. ``window_fraction`` restricts the fit to the trailing part of a
    half-line grid (behaviour modulo C0).
    """
    comps = estimate.components()
    if len(comps) > max_components:
        raise ResolutionError(f"{len(comps)} flagged components exceed max_components={max_components}")
    t_all = f.t
    sel = np.ones(t_all.size, dtype=bool)
    if window_fraction is not None:
        sel = t_all >= f.grid.span * (1 - window_fraction) - 1e-12 * max(1.0, f.grid.span)
    t, vals = t_all[sel], f.values[sel]
    tol = recovery_tol if recovery_tol is not None else 1e-6 * (1.0 + f.bound)
    if not comps:
        res = float(np.max(np.linalg.norm(vals, axis=1)))
        return TrigRecovery((), res, res <= tol, tol)
    span = float(t[-1] - t[0])
    if span <= 0:
        raise ResolutionError("fit window has no length")
    fgrid = estimate.frequencies
    step = fgrid.step
    peaks = [c.peak_xi for c in comps]
    seps = np.diff(sorted(peaks))
    min_sep = float(seps.min()) if seps.size else math.inf
    if min_sep < 2 * math.pi / span:
        raise ResolutionError(
            f"components {min_sep:.3g} apart are closer than the resolution 2*pi/{span:g}"
        )
    line_f = f if f.domain == LINE else None
    if eps is None:
        eps = max(2 * step, min(0.5 * min_sep, 0.5)) if math.isfinite(min_sep) else max(2 * step, 0.5)
    refined = []
    for c in comps:
        lo = fgrid.centers[c.start] - step
        hi = fgrid.centers[c.stop] + step
        if line_f is not None:
            xi = _golden_max(lambda x: beurling_score(line_f, x, eps), lo, hi, 1e-3 * step)
        else:
            xi = c.peak_xi
        refined.append(xi)
    freqs = np.array(refined)
    # polish: coordinate-wise golden search on the residual
    width = min(step, math.pi / span)
    for _ in range(3):
        for k in range(freqs.size):
            def neg_res(x, k=k):
                trial = freqs.copy()
                trial[k] = x
                _, r = _lstsq(t, vals, trial)
                return -float(np.sum(np.abs(r) ** 2))

            freqs[k] = _golden_max(neg_res, freqs[k] - width, freqs[k] + width, 1e-10)
        width *= 0.25
    amps, res = _lstsq(t, vals, freqs)
    residual = float(np.max(np.linalg.norm(res, axis=1)))
    order = np.argsort(freqs)
    terms = tuple((float(freqs[k]), amps[k]) for k in order)
    return TrigRecovery(terms, residual, residual <= tol, tol)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AsymptoticVerdict:
    verdict: str
    estimate: SpectrumEstimate
    seminorm: float | None
    recovery: TrigRecovery | None
    ergodic: tuple
    horizon: float
    reason: str

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "reason": self.reason,
            "spectrum": self.estimate.to_dict(),
            "seminorm_c0": self.seminorm,
            "recovery": None if self.recovery is None else self.recovery.to_dict(),
            "ergodic": [e.to_dict() for e in self.ergodic],
            "certified_horizon": self.horizon,
        }


def default_frequency_grid(f: SampledFunction, half_width: float = 5.0, step: float = 0.05) -> FrequencyGrid:
    nyquist = math.pi / f.grid.step
    w = min(half_width, 0.9 * nyquist)
    return FrequencyGrid(-w, w, step)


def classify_asymptotics(f: SampledFunction, grid: FrequencyGrid | None = None,
                         threshold: float = DEFAULT_THRESHOLD, zero_tol: float = 1e-4,
                         window_fraction: float = 0.25, max_components: int = 16,
                         recovery_tol: float | None = None, shape_tol: float = 1e-3,
                         alpha_schedule=DEFAULT_ALPHAS) -> AsymptoticVerdict:
    """Decay, trigonometric-polynomial behaviour, or neither.

    The spectral hypotheses (finitely many flagged components, ergodic limits
    that are pure waves) are checked, and the conclusion is verified by
    fitting a trigonometric polynomial; no step is assumed.
    """
    grid = grid or default_frequency_grid(f)
    if f.domain == HALFLINE:
        est = reduced_spectrum_c0(f, grid, threshold=threshold, window_fraction=window_fraction)
        semi = quotient_norm_c0(f, window_fraction)
        fit_window = window_fraction
    else:
        est = carleman_spectrum(f, grid, threshold=threshold)
        semi = None
        fit_window = None
    comps = est.components()
    if not comps:
        if semi is not None and semi <= zero_tol:
            return AsymptoticVerdict(DECAYS, est, semi, None, (), f.grid.span, "no flagged cells and vanishing tail")
        if semi is None and sup_norm(f) <= zero_tol:
            return AsymptoticVerdict(DECAYS, est, semi, None, (), f.grid.span, "identically small")
        return AsymptoticVerdict(INCONCLUSIVE, est, semi, None, (), f.grid.span, "no flagged cells but tail does not vanish")
    if len(comps) > max_components:
        return AsymptoticVerdict(INCONCLUSIVE, est, semi, None, (), f.grid.span,
                                 f"{len(comps)} flagged components: spectrum not finite at grid resolution")
    try:
        rec = trig_poly_recovery(f, est, max_components, recovery_tol, window_fraction=fit_window)
    except ResolutionError as exc:
        return AsymptoticVerdict(INCONCLUSIVE, est, semi, None, (), f.grid.span, str(exc))
    if not rec.certified:
        return AsymptoticVerdict(INCONCLUSIVE, est, semi, rec, (), f.grid.span,
                                 f"recovery residual {rec.residual:.3g} above tolerance")
    reports = tuple(
        ergodic_limit(f, xi, alpha_schedule, shape_tol=shape_tol, window_fraction=window_fraction)
        for xi, _ in rec.terms
    )
    if all(r.verdict == ERGODIC_PURE_WAVE for r in reports):
        return AsymptoticVerdict(ALMOST_PERIODIC, est, semi, rec, reports, f.grid.span,
                                 "finite spectrum, ergodic at every component, recovery certified")
    return AsymptoticVerdict(INCONCLUSIVE, est, semi, rec, reports, f.grid.span,
                             "ergodic limit is not a pure wave at some component")
