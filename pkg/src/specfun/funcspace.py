"""Bounded functions on the line and half-line.

A function is described twice: by a closed-form :class:`FunctionSpec` that can
be evaluated anywhere (needed when quadratures run past the sampled span), and
by a :class:`SampledFunction` holding its values on a uniform :class:`Grid`.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, DomainError, SpanError

LINE = "line"
HALFLINE = "halfline"

SQRT2 = math.sqrt(2.0)


def _vector(value, path="amplitude") -> np.ndarray:
    """Coerce a scalar, sequence or {"re", "im"} mapping to a 1-d complex vector."""
    if isinstance(value, dict):
        try:
            re = np.atleast_1d(np.asarray(value["re"], dtype=float))
            im = np.atleast_1d(np.asarray(value.get("im", np.zeros_like(re)), dtype=float))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: expected {{'re': [...], 'im': [...]}}") from exc
        if re.shape != im.shape:
            raise ConfigError(f"{path}: 're' and 'im' lengths differ")
        out = re + 1j * im
    else:
        try:
            out = np.atleast_1d(np.asarray(value, dtype=complex))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: not a numeric vector") from exc
    if out.ndim != 1 or out.size == 0:
        raise ConfigError(f"{path}: expected a non-empty vector")
    if not np.all(np.isfinite(out)):
        raise ConfigError(f"{path}: non-finite entries")
    return out.astype(np.complex128)


def vector_to_json(v) -> dict:
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    return {"re": [float(x) for x in v.real], "im": [float(x) for x in v.imag]}


def matrix_to_json(a) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


def matrix_from_json(value, path="A") -> np.ndarray:
    if isinstance(value, dict):
        try:
            re = np.asarray(value["re"], dtype=float)
            im = np.asarray(value.get("im", np.zeros_like(re)), dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: expected {{'re': [[...]], 'im': [[...]]}}") from exc
        if re.shape != im.shape:
            raise ConfigError(f"{path}: 're' and 'im' shapes differ")
        a = re + 1j * im
    else:
        try:
            a = np.asarray(value, dtype=complex)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: not a numeric matrix") from exc
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ConfigError(f"{path}: expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ConfigError(f"{path}: non-finite entries")
    return a


# ---------------------------------------------------------------------------
# Closed-form specifications
# ---------------------------------------------------------------------------


class FunctionSpec:
    """Closed-form bounded function ``t -> C^d``."""

    kind = "abstract"
    #: True when the formula is only bounded for t >= 0.
    half_line_only = False

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def evaluate(self, t) -> np.ndarray:
        """Values at times ``t`` as an array of shape (len(t), dim)."""
        raise NotImplementedError

    def bound(self) -> float | None:
        """A derivable sup-norm bound, or None if only an observed bound is available."""
        return None

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class TrigPolynomial(FunctionSpec):
    """``sum_k a_k exp(i xi_k t)`` with pairwise distinct frequencies."""

    frequencies: tuple
    amplitudes: tuple
    kind = "trig"

    def __post_init__(self):
        freqs = tuple(float(x) for x in self.frequencies)
        amps = tuple(_vector(a, f"terms[{k}].amplitude") for k, a in enumerate(self.amplitudes))
        if len(freqs) != len(amps):
            raise ConfigError("terms: frequency/amplitude count mismatch")
        if not amps:
            raise ConfigError("terms: at least one term is required")
        if len({a.size for a in amps}) != 1:
            raise ConfigError("terms: amplitudes must share one dimension")
        seen = {}
        for k, xi in enumerate(freqs):
            if not math.isfinite(xi):
                raise ConfigError(f"terms[{k}].frequency: not finite")
            if xi in seen:
                raise ConfigError(
                    f"terms[{k}].frequency: duplicate frequency {xi!r} (also terms[{seen[xi]}])"
                )
            seen[xi] = k
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_terms(cls, terms: Sequence) -> "TrigPolynomial":
        terms = list(terms)
        return cls(tuple(xi for xi, _ in terms), tuple(a for _, a in terms))

    @property
    def dim(self):
        return self.amplitudes[0].size

    @property
    def terms(self):
        return list(zip(self.frequencies, self.amplitudes))

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        phases = np.exp(1j * np.outer(t, self.frequencies))
        return phases @ np.vstack(self.amplitudes)

    def bound(self):
        return float(sum(np.linalg.norm(a) for a in self.amplitudes))

    def to_dict(self):
        return {
            "kind": self.kind,
            "terms": [
                {"frequency": xi, "amplitude": vector_to_json(a)} for xi, a in self.terms
            ],
        }


@dataclass(frozen=True, eq=False)
class ExponentialDecay(FunctionSpec):
    """``a exp(-rate t)``; bounded on the half-line only."""

    rate: float
    amplitude: np.ndarray
    kind = "exp_decay"
    half_line_only = True

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0):
            raise ConfigError(f"rate: must be > 0, got {self.rate!r}")
        object.__setattr__(self, "rate", float(self.rate))
        object.__setattr__(self, "amplitude", _vector(self.amplitude))

    @property
    def dim(self):
        return self.amplitude.size

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-self.rate * t)[:, None] * self.amplitude[None, :]

    def bound(self):
        return float(np.linalg.norm(self.amplitude))

    def to_dict(self):
        return {"kind": self.kind, "rate": self.rate, "amplitude": vector_to_json(self.amplitude)}


@dataclass(frozen=True, eq=False)
class Sum(FunctionSpec):
    parts: tuple
    kind = "sum"

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ConfigError("parts: at least one part is required")
        if len({p.dim for p in parts}) != 1:
            raise ConfigError("parts: dimensions differ")
        object.__setattr__(self, "parts", parts)

    @property
    def dim(self):
        return self.parts[0].dim

    @property
    def half_line_only(self):
        return any(p.half_line_only for p in self.parts)

    def evaluate(self, t):
        return sum(p.evaluate(t) for p in self.parts)

    def bound(self):
        bounds = [p.bound() for p in self.parts]
        return None if any(b is None for b in bounds) else float(sum(bounds))

    def to_dict(self):
        return {"kind": self.kind, "parts": [p.to_dict() for p in self.parts]}


@dataclass(frozen=True, eq=False)
class Modulated(FunctionSpec):
    """``exp(i xi t) base(t)``."""

    base: FunctionSpec
    frequency: float
    kind = "modulated"

    @property
    def dim(self):
        return self.base.dim

    @property
    def half_line_only(self):
        return self.base.half_line_only

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(1j * self.frequency * t)[:, None] * self.base.evaluate(t)

    def bound(self):
        return self.base.bound()

    def to_dict(self):
        return {"kind": self.kind, "frequency": float(self.frequency), "base": self.base.to_dict()}


@dataclass(frozen=True, eq=False)
class Translated(FunctionSpec):
    """``base(t + shift)``."""

    base: FunctionSpec
    shift: float
    kind = "translated"

    @property
    def dim(self):
        return self.base.dim

    @property
    def half_line_only(self):
        return self.base.half_line_only

    def evaluate(self, t):
        return self.base.evaluate(np.asarray(t, dtype=float) + self.shift)

    def bound(self):
        return self.base.bound()

    def to_dict(self):
        return {"kind": self.kind, "shift": float(self.shift), "base": self.base.to_dict()}


@dataclass(frozen=True, eq=False)
class AlmostAutomorphicSample(FunctionSpec):
    """``sin(1 / (2 + cos t + cos(sqrt(2) t)))`` in every channel.

    Almost automorphic but not uniformly continuous: the denominator gets
    arbitrarily close to zero, so the phase oscillates without bound.
    """

    channels: int = 1
    kind = "almost_automorphic"

    def __post_init__(self):
        if int(self.channels) < 1:
            raise ConfigError("channels: must be >= 1")
        object.__setattr__(self, "channels", int(self.channels))

    @property
    def dim(self):
        return self.channels

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        den = 2.0 + np.cos(t) + np.cos(SQRT2 * t)
        with np.errstate(divide="ignore"):
            v = np.where(den > 0, np.sin(1.0 / np.where(den > 0, den, 1.0)), 0.0)
        return np.repeat(v[:, None], self.channels, axis=1).astype(np.complex128)

    def bound(self):
        return 1.0

    def to_dict(self):
        return {"kind": self.kind, "channels": self.channels}


@dataclass(frozen=True, eq=False)
class Tabulated(FunctionSpec):
    """Samples on a uniform time axis; evaluated by nearest node."""

    times: np.ndarray
    values: np.ndarray
    source: str | None = None
    kind = "tabulated"

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        if t.ndim != 1 or t.size < 2 or v.shape[0] != t.size:
            raise ConfigError("tabulated: need >= 2 rows with matching times and values")
        steps = np.diff(t)
        if np.any(steps <= 0) or np.ptp(steps) > 1e-6 * steps.mean():
            raise ConfigError("tabulated: times must be uniformly spaced and increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_csv(cls, path) -> "Tabulated":
        """Read columns ``t, re_1, im_1, ..., re_d, im_d``."""
        path = Path(path)
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise ConfigError(f"{path}: empty file")
        header, body = rows[0], rows[1:]
        if not header or header[0].strip() != "t" or (len(header) - 1) % 2:
            raise ConfigError(f"{path}: expected header t, re_1, im_1, ..., re_d, im_d")
        data = np.asarray(body, dtype=float)
        t = data[:, 0]
        values = data[:, 1::2] + 1j * data[:, 2::2]
        return cls(t, values, source=str(path))

    @property
    def step(self):
        return float(self.times[1] - self.times[0])

    @property
    def dim(self):
        return self.values.shape[1]

    def covers(self, lo, hi) -> bool:
        half = 0.5 * self.step
        return lo >= self.times[0] - half and hi <= self.times[-1] + half

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        if t.size and not self.covers(t.min(), t.max()):
            raise SpanError(
                f"tabulated data covers [{self.times[0]:g}, {self.times[-1]:g}], "
                f"requested [{t.min():g}, {t.max():g}]"
            )
        idx = np.clip(np.rint((t - self.times[0]) / self.step).astype(int), 0, self.times.size - 1)
        return self.values[idx]

    def bound(self):
        return float(np.max(np.linalg.norm(self.values, axis=1)))

    def to_dict(self):
        if self.source:
            return {"kind": self.kind, "path": self.source}
        return {
            "kind": self.kind,
            "t": self.times.tolist(),
            "values": {"re": self.values.real.tolist(), "im": self.values.imag.tolist()},
        }


@dataclass(frozen=True, eq=False)
class Orbit(FunctionSpec):
    """``exp(t A) x``, the orbit of a matrix flow (used for homogeneous solutions)."""

    matrix: np.ndarray
    initial: np.ndarray
    kind = "orbit"

    def __post_init__(self):
        a = matrix_from_json(self.matrix) if not isinstance(self.matrix, np.ndarray) else self.matrix
        x = _vector(self.initial, "u0")
        if a.shape[0] != x.size:
            raise ConfigError("u0: dimension does not match A")
        object.__setattr__(self, "matrix", np.asarray(a, dtype=complex))
        object.__setattr__(self, "initial", x)
        w, v = np.linalg.eig(self.matrix)
        ok = np.linalg.cond(v) < 1e8
        object.__setattr__(self, "_eig", (w, v, np.linalg.solve(v, x)) if ok else None)

    @property
    def dim(self):
        return self.initial.size

    @property
    def half_line_only(self):
        return bool(np.any(np.linalg.eigvals(self.matrix).real < -1e-12))

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        if self._eig is not None:
            w, v, coef = self._eig
            return (np.exp(np.outer(t, w)) * coef[None, :]) @ v.T
        from scipy.linalg import expm

        return np.array([expm(s * self.matrix) @ self.initial for s in t]).reshape(t.size, -1)

    def to_dict(self):
        return {"kind": self.kind, "A": matrix_to_json(self.matrix), "u0": vector_to_json(self.initial)}


def spec_from_dict(d, path="function", base_dir=None) -> FunctionSpec:
    """Build a :class:`FunctionSpec` from its JSON form.

    Errors are raised as :class:`ConfigError` with ``path`` prefixed to the
    field name, so they can be reported as-is by the CLI validator.
    """
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: expected an object")
    kind = d.get("kind")
    try:
        if kind == "trig":
            terms = d.get("terms")
            if not isinstance(terms, list) or not terms:
                raise ConfigError("terms: expected a non-empty list")
            freqs, amps = [], []
            for k, term in enumerate(terms):
                if not isinstance(term, dict) or "frequency" not in term:
                    raise ConfigError(f"terms[{k}].frequency: missing")
                try:
                    freqs.append(float(term["frequency"]))
                except (TypeError, ValueError):
                    raise ConfigError(f"terms[{k}].frequency: not a number") from None
                amps.append(_vector(term.get("amplitude", 1.0), f"terms[{k}].amplitude"))
            return TrigPolynomial(tuple(freqs), tuple(amps))
        if kind == "exp_decay":
            return ExponentialDecay(float(d.get("rate", float("nan"))), d.get("amplitude", 1.0))
        if kind == "sum":
            parts = d.get("parts")
            if not isinstance(parts, list):
                raise ConfigError("parts: expected a list")
            return Sum(tuple(spec_from_dict(p, f"parts[{k}]", base_dir) for k, p in enumerate(parts)))
        if kind == "modulated":
            return Modulated(spec_from_dict(d.get("base"), "base", base_dir), float(d["frequency"]))
        if kind == "translated":
            return Translated(spec_from_dict(d.get("base"), "base", base_dir), float(d["shift"]))
        if kind == "almost_automorphic":
            return AlmostAutomorphicSample(int(d.get("channels", 1)))
        if kind == "tabulated":
            if "path" in d:
                p = Path(d["path"])
                if base_dir is not None and not p.is_absolute():
                    p = Path(base_dir) / p
                if not p.exists():
                    raise ConfigError(f"path: file not found: {p}")
                return Tabulated.from_csv(p)
            vals = d.get("values", {})
            return Tabulated(np.asarray(d["t"], dtype=float), np.asarray(vals["re"]) + 1j * np.asarray(vals["im"]))
        if kind == "orbit":
            return Orbit(matrix_from_json(d.get("A"), "A"), d.get("u0"))
    except ConfigError as exc:
        msg = str(exc)
        raise ConfigError(f"{path}.{msg}" if not msg.startswith(path) else msg) from None
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: malformed {kind!r} spec ({exc})") from None
    raise ConfigError(f"{path}.kind: unknown function kind {kind!r}")


# ---------------------------------------------------------------------------
# Grids and samples
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Grid:
    """Uniform time grid over ``[-span, span]`` (line) or ``[0, span]`` (half-line)."""

    domain: str
    step: float
    span: float
    count: int = field(init=False)

    def __post_init__(self):
        if self.domain not in (LINE, HALFLINE):
            raise ConfigError(f"grid.domain: expected 'line' or 'halfline', got {self.domain!r}")
        if not (math.isfinite(self.step) and self.step > 0):
            raise ConfigError(f"grid.step: must be > 0, got {self.step!r}")
        if not (math.isfinite(self.span) and self.span > 0):
            raise ConfigError(f"grid.span: must be > 0, got {self.span!r}")
        length = self.length
        count = int(round(length / self.step)) + 1
        if count < 2:
            raise ConfigError("grid.step: larger than the span")
        object.__setattr__(self, "count", count)

    @classmethod
    def line(cls, step, span):
        return cls(LINE, float(step), float(span))

    @classmethod
    def halfline(cls, step, span):
        return cls(HALFLINE, float(step), float(span))

    @property
    def length(self):
        return 2.0 * self.span if self.domain == LINE else self.span

    @property
    def start(self):
        return -self.span if self.domain == LINE else 0.0

    @property
    def times(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.count)

    def to_dict(self):
        return {"domain": self.domain, "step": self.step, "span": self.span}


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Values of a bounded function on a :class:`Grid`.

    ``spec`` is the closed form the samples came from, or None for derived
    functions (resolvents, solutions, tabulated data without a table).
    """

    grid: Grid
    values: np.ndarray
    bound: float
    spec: FunctionSpec | None = None
    notes: tuple = ()

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != self.grid.count:
            raise ConfigError(f"values: {v.shape[0]} rows for a grid of {self.grid.count} nodes")
        object.__setattr__(self, "values", v)

    @property
    def t(self) -> np.ndarray:
        return self.grid.times

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def domain(self) -> str:
        return self.grid.domain

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.values, axis=1)

    def evaluate_at(self, t) -> np.ndarray:
        """Values at arbitrary times: analytic when a function spec is attached, else nearest node."""
        t = np.asarray(t, dtype=float)
        if self.spec is not None:
            return self.spec.evaluate(t)
        g = self.grid
        lo, hi = g.start - 0.5 * g.step, g.start + (g.count - 1) * g.step + 0.5 * g.step
        if t.size and (t.min() < lo or t.max() > hi):
            raise SpanError(f"derived samples cover [{g.start:g}, {hi:g}], requested [{t.min():g}, {t.max():g}]")
        idx = np.clip(np.rint((t - g.start) / g.step).astype(int), 0, g.count - 1)
        return self.values[idx]

    def covers(self, lo, hi) -> bool:
        """True if values on [lo, hi] are available (spec-backed or inside the grid)."""
        if self.spec is not None and not isinstance(self.spec, Tabulated):
            return True
        if isinstance(self.spec, Tabulated):
            return self.spec.covers(lo, hi)
        g = self.grid
        half = 0.5 * g.step
        return lo >= g.start - half and hi <= g.times[-1] + half

    def with_values(self, values, bound, notes=()) -> "SampledFunction":
        return SampledFunction(self.grid, values, float(bound), None, tuple(self.notes) + tuple(notes))


def sample(spec: FunctionSpec, grid: Grid) -> SampledFunction:
    """Evaluate ``spec`` on ``grid``."""
    if grid.domain == LINE and spec.half_line_only:
        raise DomainError(f"{spec.kind!r} spec is unbounded on the line; use a half-line grid")
    t = grid.times
    if isinstance(spec, Tabulated) and not spec.covers(t[0], t[-1]):
        raise SpanError(
            f"tabulated data covers [{spec.times[0]:g}, {spec.times[-1]:g}], grid needs [{t[0]:g}, {t[-1]:g}]"
        )
    values = spec.evaluate(t)
    observed = float(np.max(np.linalg.norm(values, axis=1)))
    declared = spec.bound()
    bound = observed if declared is None else max(declared, observed)
    return SampledFunction(grid, values, bound, spec)


def sup_norm(f: SampledFunction) -> float:
    """Largest Euclidean node norm on the grid."""
    return float(np.max(f.norms())) if f.grid.count else 0.0


def _tail_sup(f, fraction):
    t = f.t
    cut = f.grid.span * (1.0 - fraction)
    mask = t >= cut - 1e-12 * max(1.0, f.grid.span)
    if not mask.any():
        mask[-1] = True
    return float(np.max(f.norms()[mask]))


def quotient_norm_c0(f: SampledFunction, window_fraction: float = 0.25, diagnostic: bool = False):
    """Distance from ``f`` to functions vanishing at infinity, estimated on the grid.

    The quotient norm modulo C0 equals ``limsup ||f(t)||``; it is estimated by
    the sup over the trailing ``window_fraction`` of the grid. With
    ``diagnostic=True`` the same sup over the trailing half-window is returned
    as well; the gap between the two is the uncertainty of the estimate.
    """
    if f.domain != HALFLINE:
        raise DomainError("quotient_norm_c0 needs a half-line function")
    if not 0.0 < window_fraction < 1.0:
        raise ConfigError(f"window_fraction: must lie in (0, 1), got {window_fraction!r}")
    est = _tail_sup(f, window_fraction)
    if diagnostic:
        return est, _tail_sup(f, 0.5 * window_fraction)
    return est


def modulate(f: SampledFunction, xi: float) -> SampledFunction:
    """Multiply by ``exp(i xi t)``."""
    phase = np.exp(1j * xi * f.t)[:, None]
    spec = Modulated(f.spec, float(xi)) if f.spec is not None else None
    return SampledFunction(f.grid, f.values * phase, f.bound, spec, f.notes)


def translate(f: SampledFunction, c: float) -> SampledFunction:
    """``g(t) = f(t + c)`` on the line.

    Spec-backed functions are re-evaluated on the same grid. Derived samples
    are shifted by the nearest whole number of steps and the grid shrinks to
    the span where the shifted values exist.
    """
    if f.domain != LINE:
        raise DomainError("translate needs a line function")
    c = float(c)
    if c == 0.0:
        return f
    if f.spec is not None:
        values = f.spec.evaluate(f.t + c)
        return SampledFunction(f.grid, values, f.bound, Translated(f.spec, c), f.notes)
    g = f.grid
    k = int(round(c / g.step))
    if abs(k) * g.step >= g.span:
        raise SpanError(f"shift {c:g} exceeds the sampled span {g.span:g}")
    new_span = g.span - abs(k) * g.step
    new_grid = Grid.line(g.step, new_span)
    first = abs(k) + k  # index into f of the first shifted node
    values = f.values[first : first + new_grid.count]
    note = f"translate: shifted {k} nodes, span shrunk to {new_span:g}"
    return SampledFunction(new_grid, values, f.bound, None, tuple(f.notes) + (note,))
