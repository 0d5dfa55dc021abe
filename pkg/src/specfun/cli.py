"""Command-line front end: ``specfun <command> --config <path> [--out <dir>] [--validate-only]``.

A run reads one JSON configuration, executes the commanded pipeline and
writes ``report.json`` (byte-identical across repeated runs), CSV artifacts
and ``timing.json`` (wall time, kept apart so the report stays
deterministic). Exit codes: 0 success, 2 precondition or config errors,
3 numerical failures.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, NumericalError, PreconditionError, SpecfunError
from .evolution import (
    AXIS_TOL,
    MildSolutionProblem,
    OperatorMatrix,
    ablv_check,
    grid_from_dict,
    minh_stability_check,
    mild_residual,
    mild_solution,
    sigma_i,
)
from .funcspace import (
    HALFLINE,
    LINE,
    FunctionSpec,
    Grid,
    SampledFunction,
    matrix_from_json,
    quotient_norm_c0,
    sample,
    spec_from_dict,
    sup_norm,
)
from .laurent import (
    ContourSpec,
    MatrixResolvent,
    gelfand_bound_check,
    laurent_coefficients,
    observed_bound,
    pole_classify,
)
from .resolvent import (
    DEFAULT_ALPHAS,
    ResolventQuery,
    carleman_transform,
    ergodic_limit,
    resolvent,
    resolvent_residual,
)
from .spectrum import (
    FrequencyGrid,
    beurling_spectrum,
    carleman_spectrum,
    classify_asymptotics,
    coincidence_check,
    default_frequency_grid,
    reduced_spectrum_c0,
    trig_poly_recovery,
)

SCHEMA_VERSION = "1.0"
COMMANDS = ("spectrum", "resolvent", "ergodic", "laurent", "stability", "classify")

DEFAULT_TOLERANCES = {
    "threshold": 0.05,
    "tail_tol": 1e-9,
    "scan_tail_tol": 1e-6,
    "kernel_tol": 1e-4,
    "zero_tol": 1e-4,
    "shape_tol": 1e-8,
    "classify_shape_tol": 1e-3,
    "cauchy_tol": 1e-2,
    "erg_tol": 1e-3,
    "stab_tol": 1e-3,
    "window_fraction": 0.25,
    "axis_tol": AXIS_TOL,
    "eig_tol": 1e-8,
    "lam_floor": 1e-6,
    "flow_bound": 1e3,
}

_KNOWN_KEYS = {
    "command", "input", "grid", "frequencies", "alpha_schedule", "epsilon", "methods",
    "lambdas", "xi", "contour", "n_range", "bound_constant", "r_schedule", "tolerances", "output",
}


@dataclass
class RunConfig:
    command: str
    data: dict
    base_dir: Path
    function: FunctionSpec | None = None
    problem: MildSolutionProblem | None = None
    matrix: np.ndarray | None = None
    grid: Grid | None = None
    frequencies: FrequencyGrid | None = None
    alphas: tuple | None = None
    tolerances: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Parsing and validation
# ---------------------------------------------------------------------------


def _number_list(value, name, min_len=1):
    if not isinstance(value, list) or len(value) < min_len:
        raise ConfigError(f"{name}: expected a list of at least {min_len} numbers")
    out = []
    for k, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ConfigError(f"{name}[{k}]: not a finite number")
        out.append(float(v))
    return out


def _complex_list(value, name):
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{name}: expected a non-empty list of [re, im] pairs or numbers")
    out = []
    for k, v in enumerate(value):
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            out.append(complex(v))
        elif isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
            out.append(complex(v[0], v[1]))
        else:
            raise ConfigError(f"{name}[{k}]: expected a number or [re, im]")
    return out


def _collect(diags, fn, *args):
    try:
        return fn(*args)
    except ConfigError as exc:
        diags.append(str(exc))
    except SpecfunError as exc:
        diags.append(str(exc))
    return None


def _parse_tolerances(raw):
    tol = dict(DEFAULT_TOLERANCES)
    if raw is None:
        return tol
    if not isinstance(raw, dict):
        raise ConfigError("tolerances: expected an object")
    for k, v in raw.items():
        if k not in DEFAULT_TOLERANCES and k not in ("recovery_tol", "pole_tol"):
            raise ConfigError(f"tolerances.{k}: unknown tolerance")
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0 or not math.isfinite(v):
            raise ConfigError(f"tolerances.{k}: must be a positive number")
        tol[k] = float(v)
    if not tol["window_fraction"] < 1:
        raise ConfigError("tolerances.window_fraction: must lie in (0, 1)")
    return tol


def _parse_frequencies(raw):
    if not isinstance(raw, dict):
        raise ConfigError("frequencies: expected {xi_min, xi_max, step}")
    try:
        return FrequencyGrid(raw["xi_min"], raw["xi_max"], raw["step"])
    except KeyError as exc:
        raise ConfigError(f"frequencies.{exc.args[0]}: missing") from None


def _parse_alphas(raw, name="alpha_schedule"):
    vals = _number_list(raw, name, 1)
    if any(a <= 0 for a in vals) or any(b >= a for a, b in zip(vals, vals[1:])):
        raise ConfigError(f"{name}: must be positive and strictly decreasing")
    return tuple(vals)


def parse_config(data, base_dir=".") -> tuple:
    """Build a :class:`RunConfig`; returns (config or None, diagnostics)."""
    diags: list = []
    base_dir = Path(base_dir)
    if not isinstance(data, dict):
        return None, ["config: top level must be a JSON object"]
    for k in sorted(set(data) - _KNOWN_KEYS):
        diags.append(f"{k}: unknown field")
    cmd = data.get("command")
    if cmd is None:
        diags.append("command: missing (one of " + ", ".join(COMMANDS) + ")")
    elif cmd not in COMMANDS:
        diags.append(f"command: unknown command {cmd!r} (one of {', '.join(COMMANDS)})")
    cfg = RunConfig(cmd or "", data, base_dir)
    cfg.tolerances = _collect(diags, _parse_tolerances, data.get("tolerances")) or dict(DEFAULT_TOLERANCES)
    inp = data.get("input")
    if cmd in ("spectrum", "resolvent", "ergodic", "classify"):
        if not isinstance(inp, dict):
            diags.append("input: missing or not an object")
        elif "function" in inp:
            cfg.function = _collect(diags, spec_from_dict, inp["function"], "input.function", base_dir)
        elif cmd == "classify" and "A" in inp:
            cfg.problem = _collect(diags, _problem_from_input, inp, data, base_dir)
        else:
            diags.append("input.function: missing")
        if cfg.problem is None:
            if "grid" not in data:
                diags.append("grid: missing")
            else:
                cfg.grid = _collect(diags, _grid, data["grid"])
    elif cmd == "laurent":
        if not isinstance(inp, dict) or "A" not in inp:
            diags.append("input.A: missing")
        else:
            cfg.matrix = _collect(diags, matrix_from_json, inp["A"], "input.A")
        c = data.get("contour")
        if not isinstance(c, dict):
            diags.append("contour: missing")
        else:
            _collect(diags, _contour, c)
        if "n_range" in data:
            _collect(diags, _n_range, data["n_range"])
        if "r_schedule" in data:
            _collect(diags, _parse_alphas, data["r_schedule"], "r_schedule")
        if "bound_constant" in data and data["bound_constant"] != "observed":
            _collect(diags, _number_list, [data["bound_constant"]], "bound_constant")
    elif cmd == "stability":
        if not isinstance(inp, dict) or "A" not in inp:
            diags.append("input.A: missing")
        else:
            cfg.matrix = _collect(diags, matrix_from_json, inp["A"], "input.A")
            if "u0" in inp:
                cfg.problem = _collect(diags, _problem_from_input, inp, data, base_dir)
            elif "grid" in data:
                cfg.grid = _collect(diags, _grid, data["grid"])
    if "frequencies" in data:
        cfg.frequencies = _collect(diags, _parse_frequencies, data["frequencies"])
    elif cmd == "spectrum":
        diags.append("frequencies: missing")
    if "alpha_schedule" in data:
        cfg.alphas = _collect(diags, _parse_alphas, data["alpha_schedule"])
    if cmd == "spectrum":
        methods = data.get("methods", ["carleman", "beurling"] if _domain(cfg) == LINE else ["reduced"])
        if not isinstance(methods, list) or not methods:
            diags.append("methods: expected a non-empty list")
        else:
            for k, m in enumerate(methods):
                if m not in ("carleman", "beurling", "reduced"):
                    diags.append(f"methods[{k}]: unknown method {m!r}")
                elif m in ("carleman", "beurling") and _domain(cfg) == HALFLINE:
                    diags.append(f"methods[{k}]: {m!r} needs grid.domain 'line'")
                elif m == "reduced" and _domain(cfg) == LINE:
                    diags.append(f"methods[{k}]: 'reduced' needs grid.domain 'halfline'")
            if "beurling" in methods:
                eps = data.get("epsilon")
                if isinstance(eps, bool) or not isinstance(eps, (int, float)):
                    diags.append("epsilon: required for the beurling method")
                elif cfg.frequencies is not None and not eps >= 2 * cfg.frequencies.step * (1 - 1e-12):
                    diags.append(f"epsilon: bandwidth {eps} is below twice the frequency step {cfg.frequencies.step}")
    if cmd == "resolvent":
        if "lambdas" not in data:
            diags.append("lambdas: missing")
        else:
            lams = _collect(diags, _complex_list, data["lambdas"], "lambdas")
            for k, lam in enumerate(lams or []):
                if abs(lam.real) < cfg.tolerances["lam_floor"]:
                    diags.append(f"lambdas[{k}]: real part is zero (on the imaginary axis)")
    if cmd == "ergodic":
        if "xi" not in data:
            diags.append("xi: missing")
        else:
            _collect(diags, _number_list, data["xi"] if isinstance(data["xi"], list) else [data["xi"]], "xi")
        if cfg.alphas is not None and len(cfg.alphas) < 3:
            diags.append("alpha_schedule: need at least 3 values")
    if cfg.function is not None and cfg.grid is not None and cfg.grid.domain == LINE and cfg.function.half_line_only:
        diags.append("input.function: unbounded on the line; use grid.domain 'halfline'")
    out = data.get("output")
    if out is not None and not (isinstance(out, dict) and isinstance(out.get("dir", ""), str)):
        diags.append("output: expected {\"dir\": <path>}")
    return (None if diags else cfg), diags


def _domain(cfg):
    if cfg.grid is not None:
        return cfg.grid.domain
    if cfg.problem is not None:
        return cfg.problem.grid.domain
    return None


def _grid(raw):
    if not isinstance(raw, dict):
        raise ConfigError("grid: expected {domain, step, span}")
    return grid_from_dict(raw)


def _contour(raw):
    try:
        return ContourSpec(float(raw["center"]), float(raw["radius"]), int(raw.get("nodes", 64)))
    except KeyError as exc:
        raise ConfigError(f"contour.{exc.args[0]}: missing") from None
    except (TypeError, ValueError):
        raise ConfigError("contour: center/radius/nodes must be numbers") from None


def _n_range(raw):
    if not (isinstance(raw, list) and len(raw) == 2 and all(isinstance(x, int) for x in raw) and raw[0] <= raw[1]):
        raise ConfigError("n_range: expected [lo, hi] integers with lo <= hi")
    return tuple(raw)


def _problem_from_input(inp, data, base_dir):
    d = {"A": inp.get("A"), "u0": inp.get("u0"), "grid": data.get("grid")}
    if d["grid"] is None:
        raise ConfigError("grid: missing")
    if "forcing" in inp:
        d["forcing"] = inp["forcing"]
    try:
        return MildSolutionProblem.from_dict(d, base_dir)
    except ConfigError as exc:
        msg = str(exc)
        raise ConfigError(msg if msg.startswith("grid") else "input." + msg) from None


def validate(config_text: str, base_dir=".") -> list:
    """Diagnostics for a configuration text; an empty list means runnable."""
    try:
        data = json.loads(config_text)
    except json.JSONDecodeError as exc:
        return [f"line {exc.lineno}, column {exc.colno}: {exc.msg}"]
    return parse_config(data, base_dir)[1]


def serialize(cfg: RunConfig) -> str:
    """Canonical JSON text of the configuration with defaults filled in."""
    d = dict(cfg.data)
    d["tolerances"] = dict(cfg.tolerances)
    return json.dumps(d, sort_keys=True, indent=2)


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return v if math.isfinite(v) else None
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def timeseries_csv(f: SampledFunction) -> str:
    cols = ["t"] + [f"{p}_{k + 1}" for k in range(f.dim) for p in ("re", "im")]
    lines = [",".join(cols)]
    for t, row in zip(f.t, f.values):
        parts = [repr(float(t))]
        for v in row:
            parts += [repr(float(v.real)), repr(float(v.imag))]
        lines.append(",".join(parts))
    return "\n".join(lines) + "\n"


class _Run:
    def __init__(self, cfg: RunConfig, out_dir: Path):
        self.cfg = cfg
        self.tol = cfg.tolerances
        self.out_dir = out_dir
        self.warnings: list = []
        self.artifacts: dict = {}

    def warn(self, op, notes):
        for n in notes:
            item = {"operation": op, "message": str(n)}
            if item not in self.warnings:
                self.warnings.append(item)

    def artifact(self, name, text):
        self.artifacts[name] = text

    def sampled(self) -> SampledFunction:
        return sample(self.cfg.function, self.cfg.grid)

    def freq_grid(self, f):
        return self.cfg.frequencies or default_frequency_grid(f)

    # commands -------------------------------------------------------------

    def spectrum(self):
        f = self.sampled()
        grid = self.freq_grid(f)
        data = self.cfg.data
        methods = data.get("methods", ["carleman", "beurling"] if f.domain == LINE else ["reduced"])
        thr = self.tol["threshold"]
        res, ests = {}, {}
        for m in methods:
            if m == "carleman":
                est = carleman_spectrum(f, grid, self.cfg.alphas, thr, self.tol["scan_tail_tol"])
            elif m == "beurling":
                est = beurling_spectrum(f, grid, float(data["epsilon"]), thr, self.tol["kernel_tol"])
            else:
                est = reduced_spectrum_c0(f, grid, self.cfg.alphas, thr, self.tol["window_fraction"],
                                          self.tol["scan_tail_tol"])
            ests[m] = est
            self.warn(f"spectrum.{m}", est.notes)
            res[m] = est.to_dict()
            self.artifact(f"spectrum_{m}.csv", est.to_csv())
        if "carleman" in ests and "beurling" in ests:
            res["coincidence"] = coincidence_check(ests["carleman"], ests["beurling"]).to_dict()
        first = ests[methods[0]]
        try:
            rec = trig_poly_recovery(
                f, first, recovery_tol=self.tol.get("recovery_tol"),
                window_fraction=self.tol["window_fraction"] if f.domain == HALFLINE else None,
            )
            res["recovery"] = rec.to_dict()
        except NumericalError as exc:
            res["recovery"] = {"error": str(exc)}
            self.warn("spectrum.recovery", [exc])
        return res

    def resolvent(self):
        f = self.sampled()
        lams = _complex_list(self.cfg.data["lambdas"], "lambdas")
        out = []
        for k, lam in enumerate(lams):
            q = ResolventQuery(lam, tail_tol=self.tol["tail_tol"], lam_floor=self.tol["lam_floor"])
            g = resolvent(f, q)
            self.warn(f"resolvent[{k}]", g.notes)
            row = {
                "lambda": [lam.real, lam.imag],
                "sup_norm": sup_norm(g),
                "bound": sup_norm(f) / abs(lam.real),
                "residual": resolvent_residual(f, g, lam),
            }
            if f.domain == HALFLINE:
                row["seminorm_c0"] = quotient_norm_c0(g, self.tol["window_fraction"])
                row["seminorm_bound"] = quotient_norm_c0(f, self.tol["window_fraction"]) / abs(lam.real)
            if f.domain == LINE or lam.real > 0:
                val, tail = carleman_transform(f, lam, self.tol["tail_tol"], return_tail=True)
                row["transform"] = {"re": val.real.tolist(), "im": val.imag.tolist(), "tail_bound": tail}
            out.append(row)
            self.artifact(f"resolvent_{k}.csv", timeseries_csv(g))
        return {"lambdas": out}

    def ergodic(self):
        f = self.sampled()
        xs = self.cfg.data["xi"]
        xs = xs if isinstance(xs, list) else [xs]
        alphas = self.cfg.alphas or DEFAULT_ALPHAS
        out = []
        for k, xi in enumerate(xs):
            r = ergodic_limit(f, float(xi), alphas, self.tol["zero_tol"], self.tol["shape_tol"],
                              self.tol["cauchy_tol"], self.tol["window_fraction"])
            self.warn(f"ergodic[{k}]", r.notes)
            out.append(r.to_dict())
            self.artifact(f"ergodic_limit_{k}.csv", timeseries_csv(r.extrapolated_limit))
        return {"reports": out}

    def laurent(self):
        data = self.cfg.data
        A = self.cfg.matrix
        F = MatrixResolvent(A)
        c = _contour(data["contour"])
        lo, hi = _n_range(data.get("n_range", [-3, 3]))
        coeffs = laurent_coefficients(F, c, (min(lo, -(hi + 3)), max(hi, -(lo + 1))))
        res = {"coefficients": coeffs.to_dict()}
        Mraw = data.get("bound_constant", 1.0)
        M = observed_bound(F, c, 4096) if Mraw == "observed" else float(Mraw)
        try:
            res["gelfand"] = gelfand_bound_check(coeffs, M, (lo, hi)).to_dict()
        except PreconditionError as exc:
            res["gelfand"] = {"precondition": "violated", "message": str(exc), "bound_constant": M}
            self.warn("laurent.gelfand", [exc])
        radii = data.get("r_schedule")
        radii = tuple(radii) if radii else (c.radius, c.radius / 2, c.radius / 4)
        pc = pole_classify(F, c.center, radii, max(128, c.nodes), self.tol.get("pole_tol"), self.tol["eig_tol"])
        res["pole"] = pc.to_dict()
        res["sigma_i"] = sigma_i(A, self.tol["axis_tol"])
        return res

    def stability(self):
        A = self.cfg.matrix
        op = OperatorMatrix(A)
        grid = self.cfg.grid or (self.cfg.problem.grid if self.cfg.problem else None)
        res = {"sigma_i": sigma_i(op, self.tol["axis_tol"]), "spectral_abscissa": op.spectral_abscissa()}
        v = ablv_check(op, grid, self.tol["flow_bound"], self.tol["stab_tol"], self.tol["axis_tol"],
                       self.tol["window_fraction"])
        res["ablv"] = v.to_dict()
        if self.cfg.problem is not None:
            p = self.cfg.problem
            m = minh_stability_check(p, self.cfg.alphas or DEFAULT_ALPHAS, self.tol["stab_tol"],
                                     self.tol["erg_tol"], self.tol["window_fraction"])
            self.warn("stability.orbit", m.notes)
            res["orbit"] = m.to_dict()
        return res

    def classify(self):
        if self.cfg.problem is not None:
            p = self.cfg.problem
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                u = mild_solution(p)
            self.warn("classify.mild_solution", [w.message for w in caught] + list(u.notes))
            f = sample(p.forcing, p.grid) if p.forcing is not None else None
            extra = {"mild_residual": mild_residual(u, p.A, f)}
            self.artifact("solution.csv", timeseries_csv(u))
        else:
            u = self.sampled()
            extra = {}
        v = classify_asymptotics(
            u, self.cfg.frequencies, self.tol["threshold"], self.tol["zero_tol"], self.tol["window_fraction"],
            recovery_tol=self.tol.get("recovery_tol"), shape_tol=self.tol["classify_shape_tol"],
            alpha_schedule=self.cfg.alphas or DEFAULT_ALPHAS,
        )
        self.warn("classify.spectrum", v.estimate.notes)
        if v.verdict == "Inconclusive":
            self.warn("classify", [f"unresolved classification: {v.reason}"])
        self.artifact("classify_spectrum.csv", v.estimate.to_csv())
        out = v.to_dict()
        out.update(extra)
        return out


def config_hash(data) -> str:
    canon = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def run(cfg: RunConfig, out_dir) -> tuple:
    """Execute ``cfg``; returns (exit code, report dict). Files go to ``out_dir``."""
    out_dir = Path(out_dir)
    r = _Run(cfg, out_dir)
    start = time.perf_counter()
    code = 0
    error = None
    results = None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            results = getattr(r, cfg.command)()
        except PreconditionError as exc:
            code, error = 2, {"type": type(exc).__name__, "message": str(exc)}
        except NumericalError as exc:
            code, error = 3, {"type": type(exc).__name__, "message": str(exc)}
    r.warn(cfg.command, [w.message for w in caught])
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": cfg.command,
        "config_hash": config_hash(cfg.data),
        "results": results,
        "error": error,
        "warnings": r.warnings,
        "tolerances": cfg.tolerances,
        "artifacts": sorted(r.artifacts),
    }
    report = _jsonable(report)
    for name, text in sorted(r.artifacts.items()):
        _atomic_write(out_dir / name, text)
    _atomic_write(out_dir / "report.json", json.dumps(report, sort_keys=True, indent=2) + "\n")
    _atomic_write(out_dir / "timing.json", json.dumps({"wall_time_s": time.perf_counter() - start}) + "\n")
    return code, report


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="specfun", description="Spectra and asymptotics of bounded functions.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", default=None, help="output directory (default: config output.dir or ./specfun_out)")
    ap.add_argument("--validate-only", action="store_true", help="check the configuration and exit")
    args = ap.parse_args(argv)
    path = Path(args.config)
    try:
        text = path.read_text()
    except OSError as exc:
        print(f"config: cannot read {path}: {exc.strerror}", file=sys.stderr)
        return 2
    diags = validate(text, path.parent)
    if not diags:
        data = json.loads(text)
        if data.get("command") != args.command:
            diags = [f"command: config says {data.get('command')!r} but {args.command!r} was requested"]
    if diags:
        for d in diags:
            print(f"{path}: {d}", file=sys.stderr)
        return 2
    if args.validate_only:
        print(f"{path}: ok")
        return 0
    cfg, _ = parse_config(json.loads(text), path.parent)
    out = args.out or (cfg.data.get("output") or {}).get("dir") or "specfun_out"
    out_path = Path(out)
    if not out_path.is_absolute() and args.out is None and (cfg.data.get("output") or {}).get("dir"):
        out_path = path.parent / out_path
    code, report = run(cfg, out_path)
    if report.get("error"):
        print(f"{report['error']['type']}: {report['error']['message']}", file=sys.stderr)
    print(str(out_path / "report.json"))
    return code


if __name__ == "__main__":
    sys.exit(main())
