import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import trig_values
from specfun import (
    AlmostAutomorphicSample,
    ExponentialDecay,
    Grid,
    Modulated,
    Orbit,
    Sum,
    Tabulated,
    Translated,
    TrigPolynomial,
    modulate,
    quotient_norm_c0,
    sample,
    spec_from_dict,
    sup_norm,
    translate,
)
from specfun.errors import ConfigError, DomainError, SpanError

TWO_WAVE = [(1.0, [2.0]), (-2.0, [3.0])]


def two_wave():
    return TrigPolynomial.from_terms(TWO_WAVE)


def test_constant_sample():
    f = sample(TrigPolynomial.from_terms([(0.0, [1.0])]), Grid.line(0.1, 10))
    assert np.allclose(f.values, 1.0)
    assert f.bound == 1.0
    assert f.grid.count == 201


def test_two_wave_values_and_bound():
    g = Grid.line(0.05, 10)
    f = sample(two_wave(), g)
    assert np.allclose(f.values, trig_values(g.times, TWO_WAVE), atol=1e-13)
    assert f.bound == pytest.approx(5.0)


def test_exp_decay_halfline_only():
    f = sample(ExponentialDecay(1.0, 1.0), Grid.halfline(0.1, 10))
    assert np.allclose(f.values[:, 0], np.exp(-f.t))
    assert f.bound == 1.0
    with pytest.raises(DomainError):
        sample(ExponentialDecay(1.0, 1.0), Grid.line(0.1, 10))


def test_sup_norm_cases():
    g = Grid.line(0.01, 10)
    assert sup_norm(sample(TrigPolynomial.from_terms([(0.0, [0.0])]), g)) == 0.0
    assert sup_norm(sample(TrigPolynomial.from_terms([(0.0, [1.0])]), g)) == 1.0
    assert sup_norm(sample(two_wave(), g)) == pytest.approx(5.0, abs=1e-3)


def test_quotient_norm():
    g = Grid.halfline(0.05, 40)
    assert quotient_norm_c0(sample(ExponentialDecay(1.0, 1.0), g)) <= math.exp(-30) * 1.0001
    assert quotient_norm_c0(sample(TrigPolynomial.from_terms([(0.0, [1.0])]), g)) == pytest.approx(1.0)
    f = Sum((ExponentialDecay(1.0, 1.0), TrigPolynomial.from_terms([(1.0, [0.5])])))
    assert quotient_norm_c0(sample(f, g)) == pytest.approx(0.5, abs=1e-3)
    est, diag = quotient_norm_c0(sample(f, g), diagnostic=True)
    assert diag == pytest.approx(est, abs=1e-3)
    with pytest.raises(DomainError):
        quotient_norm_c0(sample(two_wave(), Grid.line(0.1, 10)))


def test_modulate():
    g = Grid.line(0.05, 10)
    f = sample(TrigPolynomial.from_terms([(1.0, [1.0])]), g)
    assert np.allclose(modulate(f, 0.0).values, f.values)
    assert np.allclose(modulate(f, -1.0).values, 1.0)
    c = sample(TrigPolynomial.from_terms([(0.0, [1.0, 2.0])]), g)
    assert np.allclose(modulate(c, 2.0).values, np.exp(2j * g.times)[:, None] * [1.0, 2.0])


def test_translate():
    g = Grid.line(0.05, 10)
    f = sample(TrigPolynomial.from_terms([(1.0, [1.0])]), g)
    assert np.allclose(translate(f, 0.0).values, f.values)
    assert np.allclose(translate(f, math.pi).values, -f.values, atol=1e-12)
    c = sample(TrigPolynomial.from_terms([(0.0, [3.0])]), g)
    assert np.allclose(translate(c, 1.7).values, 3.0)


def test_translate_derived_shrinks_span():
    g = Grid.line(0.1, 10)
    f = sample(TrigPolynomial.from_terms([(1.0, [1.0])]), g)
    d = f.with_values(f.values, f.bound)
    out = translate(d, 1.0)
    assert out.grid.span < g.span
    assert out.notes


def test_tabulated_span_error(tmp_path):
    p = tmp_path / "tab.csv"
    t = np.arange(0, 5.0001, 0.1)
    with open(p, "w") as fh:
        fh.write("t,re_1,im_1\n")
        for s in t:
            fh.write(f"{s},{math.cos(s)},{math.sin(s)}\n")
    tab = Tabulated.from_csv(p)
    f = sample(tab, Grid.halfline(0.1, 5))
    assert np.allclose(f.values[:, 0], np.exp(1j * f.t))
    with pytest.raises(SpanError):
        sample(tab, Grid.halfline(0.1, 10))


def test_spec_roundtrip_all_kinds():
    A = np.array([[0, 1], [-1, 0]], dtype=complex)
    specs = [
        two_wave(),
        ExponentialDecay(0.5, [1.0, 2.0j]),
        Sum((ExponentialDecay(1.0, 1.0), TrigPolynomial.from_terms([(1.0, [1.0])]))),
        Modulated(two_wave(), 0.5),
        Translated(two_wave(), 1.25),
        AlmostAutomorphicSample(2),
        Orbit(A, [1.0, 0.0]),
    ]
    t = np.linspace(0, 5, 11)
    for s in specs:
        d = json.loads(json.dumps(s.to_dict()))
        back = spec_from_dict(d)
        assert np.allclose(back.evaluate(t), s.evaluate(t))


def test_orbit_matches_expm():
    from oracles import exp_flow

    A = np.array([[-1, 2], [0, -0.5]], dtype=complex)
    t = np.linspace(0, 3, 7)
    assert np.allclose(Orbit(A, [1.0, 1.0]).evaluate(t), exp_flow(A, np.array([1, 1], complex), t))


def test_config_errors_name_fields():
    with pytest.raises(ConfigError, match=r"terms\[1\]\.frequency: duplicate"):
        spec_from_dict({"kind": "trig", "terms": [{"frequency": 1, "amplitude": [1]}, {"frequency": 1, "amplitude": [2]}]})
    with pytest.raises(ConfigError, match="grid.step"):
        Grid.line(-0.1, 10)
    with pytest.raises(ConfigError, match="kind"):
        spec_from_dict({"kind": "nope"})


def test_almost_automorphic_bounded():
    f = sample(AlmostAutomorphicSample(1), Grid.line(0.05, 50))
    assert sup_norm(f) <= f.bound + 1e-12
    assert np.all(np.isfinite(f.values))


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.tuples(st.floats(-5, 5), st.floats(-3, 3), st.floats(-3, 3)), min_size=1, max_size=4,
             unique_by=lambda x: round(x[0], 6)),
    st.floats(-4, 4),
)
def test_modulate_translate_commute_with_norm(terms, shift):
    spec = TrigPolynomial.from_terms([(xi, [complex(a, b)]) for xi, a, b in terms])
    f = sample(spec, Grid.line(0.1, 20))
    assert sup_norm(f) <= spec.bound() + 1e-9
    assert np.allclose(modulate(f, shift).norms(), f.norms())
    g = translate(f, shift)
    assert np.allclose(g.values, spec.evaluate(f.t + shift))
