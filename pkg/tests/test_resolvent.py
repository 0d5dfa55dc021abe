import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import abel_factor, trig_resolvent, trig_transform, trig_values
from specfun import (
    ExponentialDecay,
    Grid,
    ResolventQuery,
    Sum,
    TrigPolynomial,
    abel_mean,
    carleman_transform,
    ergodic_limit,
    quotient_norm_c0,
    resolvent,
    resolvent_halfline,
    resolvent_line,
    resolvent_residual,
    sample,
    sup_norm,
)
from specfun.errors import ConfigError, DomainError, ImaginaryAxisError, TruncationError
from specfun.resolvent import ERGODIC_PURE_WAVE, ERGODIC_ZERO, TRAPEZOID

LINE = Grid.line(0.05, 20)
HALF = Grid.halfline(0.05, 40)


def const(c=1.0, dim=1):
    return TrigPolynomial.from_terms([(0.0, [c] * dim)])


@pytest.mark.parametrize("lam, expected", [(1.0, 1.0), (-2.0, -0.5)])
def test_line_constant(lam, expected):
    g = resolvent_line(sample(const(), LINE), ResolventQuery(lam))
    assert np.allclose(g.values, expected, atol=1e-8)


def test_line_resonant_wave():
    x = np.array([1.0, -2.0j])
    f = sample(TrigPolynomial.from_terms([(1.0, x)]), LINE)
    g = resolvent_line(f, ResolventQuery(1 + 1j))
    assert np.allclose(g.values, f.values, atol=1e-8)


def test_line_matches_partial_fractions():
    terms = [(1.0, [2.0]), (-2.0, [3.0])]
    f = sample(TrigPolynomial.from_terms(terms), LINE)
    for lam in (0.5, -0.7 + 0.3j, 3.0 - 1j):
        g = resolvent_line(f, ResolventQuery(lam))
        assert np.max(np.abs(g.values - trig_resolvent(f.t, terms, lam))) < 1e-5


def test_halfline_cases():
    g = resolvent_halfline(sample(const(), HALF), ResolventQuery(2.0))
    assert np.allclose(g.values, 0.5, atol=1e-8)
    g = resolvent_halfline(sample(const(), HALF), ResolventQuery(-1.0))
    assert np.allclose(g.values[:, 0], -(1 - np.exp(-g.t)), atol=1e-7)
    assert quotient_norm_c0(g) == pytest.approx(1.0, abs=1e-6)
    g = resolvent_halfline(sample(ExponentialDecay(1.0, 1.0), HALF), ResolventQuery(1.0))
    assert np.allclose(g.values[:, 0], np.exp(-g.t) / 2, atol=1e-8)


def test_halfline_rejects_line():
    with pytest.raises(DomainError):
        resolvent_halfline(sample(const(), LINE), ResolventQuery(1.0))


def test_query_errors():
    with pytest.raises(ImaginaryAxisError):
        ResolventQuery(2j)
    with pytest.raises(TruncationError):
        resolvent(sample(const(), LINE), ResolventQuery(0.1, horizon=1.0))
    with pytest.raises(ConfigError):
        ResolventQuery(1.0, rule="midpoint")


def test_trapezoid_rule_second_order():
    terms = [(1.3, [1.0])]
    errs = []
    for h in (0.1, 0.05):
        f = sample(TrigPolynomial.from_terms(terms), Grid.line(h, 10))
        g = resolvent_line(f, ResolventQuery(0.8, rule=TRAPEZOID))
        errs.append(np.max(np.abs(g.values - trig_resolvent(f.t, terms, 0.8))))
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_residual_small():
    terms = [(1.0, [2.0]), (-2.0, [3.0])]
    f = sample(TrigPolynomial.from_terms(terms), LINE)
    g = resolvent(f, ResolventQuery(0.5))
    assert resolvent_residual(f, g, 0.5) < 0.05


def test_carleman_transform():
    assert np.allclose(carleman_transform(sample(const(0.0), LINE), 1.0), 0.0)
    for omega in (0.0, 1.5):
        f = sample(TrigPolynomial.from_terms([(omega, [1.0])]), LINE)
        for lam in (1 + 1j * omega, -1 + 1j * omega):
            assert carleman_transform(f, lam)[0] == pytest.approx(1 / (lam - 1j * omega), abs=1e-8)
    terms = [(1.0, [2.0]), (-2.0, [3.0])]
    f = sample(TrigPolynomial.from_terms(terms), LINE)
    val, tail = carleman_transform(f, 0.5, return_tail=True)
    assert np.allclose(val, trig_transform(terms, 0.5), atol=1e-6)
    assert tail < 1e-8


def test_abel_mean_scalar_factor():
    a = np.array([1.0, 1j])
    f = sample(TrigPolynomial.from_terms([(1.0, a)]), LINE)
    m = abel_mean(f, 1.0, 0.3)
    assert np.allclose(m.values, f.values, atol=1e-8)
    m = abel_mean(f, 2.0, 1e-3)
    assert np.allclose(m.values, abel_factor(1e-3, 2.0, 1.0) * f.values, atol=1e-8)
    assert sup_norm(m) == pytest.approx(1e-3 * np.linalg.norm(a), rel=1e-3)


def test_abel_mean_c0_vanishes():
    f = sample(ExponentialDecay(1.0, 1.0), HALF)
    vals = [quotient_norm_c0(abel_mean(f, 0.0, a)) for a in (0.4, 0.1)]
    assert vals[1] < vals[0] and vals[1] < 1e-4


def test_ergodic_pure_wave():
    a = np.array([2.0 - 1j])
    f = sample(TrigPolynomial.from_terms([(1.0, a)]), LINE)
    r = ergodic_limit(f, 1.0)
    assert r.verdict == ERGODIC_PURE_WAVE
    assert np.allclose(r.amplitude, a, atol=1e-6)
    assert r.shape_defect <= 1e-8


def test_ergodic_zero_cases():
    r = ergodic_limit(sample(ExponentialDecay(1.0, 1.0), HALF), 0.0)
    assert r.verdict == ERGODIC_ZERO
    r = ergodic_limit(sample(const(0.0), LINE), 0.3)
    assert r.verdict == ERGODIC_ZERO
    assert max(r.mean_norms) == 0.0


def test_ergodic_halfline_wave_plus_decay():
    f = sample(Sum((ExponentialDecay(0.5, 1.0), TrigPolynomial.from_terms([(1.0, [2j])]))), HALF)
    r = ergodic_limit(f, 1.0)
    assert r.verdict == ERGODIC_PURE_WAVE
    assert np.allclose(r.amplitude, [2j], atol=1e-6)


@settings(max_examples=25, deadline=None)
@given(
    st.lists(st.tuples(st.floats(-5, 5), st.floats(0.1, 3)), min_size=1, max_size=4,
             unique_by=lambda x: round(x[0], 6)),
    st.floats(0.01, 10),
    st.floats(-5, 5),
    st.booleans(),
)
def test_resolvent_norm_bound(terms, re, im, left):
    spec = TrigPolynomial.from_terms([(xi, [a]) for xi, a in terms])
    f = sample(spec, Grid.line(0.05, 10))
    lam = complex(-re if left else re, im)
    g = resolvent_line(f, ResolventQuery(lam))
    assert sup_norm(g) <= sup_norm(f) / re + 1e-6
    assert np.allclose(g.values, trig_resolvent(f.t, [(xi, [a]) for xi, a in terms], lam),
                       atol=2e-3 * sup_norm(f) / re)
