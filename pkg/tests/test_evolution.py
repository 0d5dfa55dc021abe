import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import exp_flow, scalar_forced
from specfun import (
    ExponentialDecay,
    Grid,
    MildSolutionProblem,
    OperatorMatrix,
    TrigPolynomial,
    ablv_check,
    cumulative_simpson,
    minh_stability_check,
    mild_residual,
    mild_solution,
    operator_ergodic_condition,
    resolvent_identity_check,
    sample,
    sigma_i,
    spectral_inclusion_check,
)
from specfun.errors import ConfigError, ImaginaryAxisError, PreconditionError, UnboundedWarning
from specfun.evolution import ALL_STABLE, NOT_COVERED, STABLE_BY_THEOREM
from specfun.spectrum import FrequencyGrid

HALF = Grid.halfline(0.05, 40)
LINE = Grid.line(0.05, 30)


def test_sigma_i():
    assert sigma_i(np.diag([-1.0, 2j])) == [2.0]
    assert sigma_i(np.diag([-1.0, -2.0])) == []
    assert sorted(sigma_i(np.array([[0.0, 1.0], [-1.0, 0.0]]))) == pytest.approx([-1.0, 1.0])


def test_mild_solution_closed_forms():
    x = np.array([1.0, 2.0 - 1j])
    u = mild_solution(MildSolutionProblem(np.zeros((2, 2)), x, HALF))
    assert np.allclose(u.values, x)
    u0 = np.array([1.0, -1.0])
    u = mild_solution(MildSolutionProblem(-np.eye(2), u0, HALF))
    assert np.allclose(u.values, exp_flow(-np.eye(2), u0, u.t), atol=1e-12)


def test_mild_solution_forced_scalar():
    f = TrigPolynomial.from_terms([(2.0, [1.0])])
    u0 = 1 / (1 + 2j)
    u = mild_solution(MildSolutionProblem([[-1.0]], [u0], HALF, f))
    assert np.allclose(u.values[:, 0], np.exp(2j * u.t) / (1 + 2j), atol=1e-10)
    u = mild_solution(MildSolutionProblem([[-1.0]], [0.3], HALF, f))
    assert np.allclose(u.values[:, 0], scalar_forced(-1.0, 1.0, 2.0, 0.3, u.t), atol=1e-10)


def test_mild_solution_line():
    f = TrigPolynomial.from_terms([(2.0, [1.0])])
    u = mild_solution(MildSolutionProblem([[-1.0]], [1 / (1 + 2j)], LINE, f))
    assert np.allclose(u.values[:, 0], np.exp(2j * u.t) / (1 + 2j), atol=1e-10)


def test_overflow_warning():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        mild_solution(MildSolutionProblem([[0.5]], [1.0], HALF))
    assert any(issubclass(w.category, UnboundedWarning) for w in caught)


def test_cumulative_simpson_order():
    errs = []
    for h in (0.1, 0.05):
        t = np.arange(0, 2 + 1e-12, h)
        out = cumulative_simpson(np.cos(3 * t)[:, None], h)
        errs.append(np.max(np.abs(out[:, 0] - np.sin(3 * t) / 3)))
    assert 12 < errs[0] / errs[1] < 20


def test_mild_residual():
    u0 = np.array([1.0, 0.5])
    for h, bound in ((0.02, 1e-6),):
        u = mild_solution(MildSolutionProblem(-np.eye(2), u0, Grid.halfline(h, 10)))
        assert mild_residual(u, -np.eye(2)) < bound
    c = mild_solution(MildSolutionProblem(np.zeros((1, 1)), [2.0], HALF))
    assert mild_residual(c, np.zeros((1, 1))) == 0.0
    u = mild_solution(MildSolutionProblem(-np.eye(2), u0, HALF))
    bad = u.values.copy()
    bad[100, 0] += 1e-2
    assert mild_residual(u.with_values(bad, u.bound), -np.eye(2)) >= 1e-3


def test_resolvent_identity():
    A = np.diag([1j, -1.0])
    x = np.array([1.0, 0.0])
    u = sample(TrigPolynomial.from_terms([(1.0, x)]), LINE)
    assert resolvent_identity_check(A, None, u, 1.0) <= 1e-6
    z = sample(TrigPolynomial.from_terms([(0.0, [0.0, 0.0])]), LINE)
    assert resolvent_identity_check(A, None, z, 1.0) == 0.0
    uh = mild_solution(MildSolutionProblem(-np.eye(2), [1.0, 2.0], HALF))
    assert resolvent_identity_check(-np.eye(2), None, uh, 1.0) <= 1e-6
    with pytest.raises(ImaginaryAxisError):
        resolvent_identity_check(A, None, u, 0.0)


def test_spectral_inclusion_examples():
    fg = FrequencyGrid(-3, 3, 0.05)
    u = mild_solution(MildSolutionProblem([[1j]], [1.0], HALF))
    rep = spectral_inclusion_check([[1j]], None, u, grid=fg)
    assert rep.passed and rep.flagged == pytest.approx((1.0,))
    f = TrigPolynomial.from_terms([(2.0, [1.0])])
    p = MildSolutionProblem([[-1.0]], [0.0], LINE, f)
    rep = spectral_inclusion_check(p.A, sample(f, LINE), mild_solution(p), grid=fg)
    assert rep.passed and rep.flagged == pytest.approx((2.0,))
    z = sample(TrigPolynomial.from_terms([(0.0, [0.0])]), LINE)
    assert spectral_inclusion_check([[-1.0]], None, z, grid=fg).flagged == ()


def test_operator_ergodic_condition():
    A = np.diag([-1.0, 1j])
    u = mild_solution(MildSolutionProblem(A, [1.0, 0.0], HALF))
    assert operator_ergodic_condition(A, 1.0, u).holds
    u = mild_solution(MildSolutionProblem(A, [0.0, 1.0], HALF))
    r = operator_ergodic_condition(A, 1.0, u)
    assert not r.holds and r.extrapolated == pytest.approx(1.0, abs=1e-3) and r.consistent
    z = sample(TrigPolynomial.from_terms([(0.0, [0.0, 0.0])]), HALF)
    assert operator_ergodic_condition(A, 1.0, z).holds


def test_stability_verdicts():
    v = minh_stability_check(MildSolutionProblem(np.diag([-1.0, -2 + 3j]), [1.0, 1.0], HALF))
    assert v.verdict == STABLE_BY_THEOREM and v.seminorm <= 1e-6
    v = minh_stability_check(MildSolutionProblem(np.diag([-1.0, 1j]), [1.0, 0.0], HALF))
    assert v.verdict == STABLE_BY_THEOREM and v.confirmed
    v = minh_stability_check(MildSolutionProblem(np.diag([-1.0, 1j]), [0.0, 1.0], HALF))
    assert v.verdict == NOT_COVERED and v.seminorm == pytest.approx(1.0, abs=1e-2)
    with pytest.raises(ConfigError):
        minh_stability_check(MildSolutionProblem(np.diag([-1.0, 1j]), [0.0, 1.0], LINE))


def test_ablv():
    v = ablv_check(np.diag([-1.0, -2.0]))
    assert v.verdict == ALL_STABLE and v.confirmed
    v = ablv_check(np.diag([-1.0, 1j]))
    assert v.verdict == NOT_COVERED and v.witness == pytest.approx(1.0)
    v = ablv_check(np.zeros((1, 1)))
    assert v.verdict == NOT_COVERED and v.witness == 0.0
    with pytest.raises(PreconditionError):
        ablv_check(np.array([[0.5]]))


def test_problem_roundtrip():
    p = MildSolutionProblem(np.diag([-1.0, 1j]), [1.0, 0.0], HALF, ExponentialDecay(1.0, [1.0, 0.0]))
    q = MildSolutionProblem.from_dict(p.to_dict())
    assert np.allclose(q.A.A, p.A.A) and np.allclose(q.u0, p.u0) and q.grid == p.grid
    with pytest.raises(ConfigError, match="u0"):
        MildSolutionProblem(np.eye(2), [1.0], HALF)


def test_operator_projection():
    op = OperatorMatrix(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    P = op.projection(1j)
    assert np.allclose(P @ P, P)
    assert np.allclose(P + op.projection(-1j), np.eye(2))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_projection_consistency(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 4))
    Q, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    w = np.concatenate([[1j * rng.uniform(-2, 2)], -rng.uniform(0.5, 2, size=d - 1)])
    A = Q @ np.diag(w) @ Q.conj().T
    u0 = rng.normal(size=d) + 1j * rng.normal(size=d)
    u = mild_solution(MildSolutionProblem(A, u0, Grid.halfline(0.1, 20)))
    r = operator_ergodic_condition(A, float(w[0].imag), u)
    assert r.consistent
