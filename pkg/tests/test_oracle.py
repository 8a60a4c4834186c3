import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polybloch.blochnorm import BlochParams, exact_monomial_norm, seminorm_integrand
from polybloch.compop import functional_B
from polybloch.holo import MultiPoly, PolyMap, monomial_family
from polybloch.oracle import (
    dense_grid_sup,
    golden_section_max,
    grid_radii,
    lemma1_bounds,
    lemma7_sides,
    regression_corpus,
    verify_Km_props,
    verify_lemma1,
    verify_lemma2_bound,
    verify_lemma7,
    verify_monomial_limits,
)
from polybloch.polydisc import SampleBudget

FAST = SampleBudget(shell_count=8, angular_samples_per_shell=64, refinement_steps=60)


def test_grid_radii():
    r = grid_radii(96)
    assert r[0] == 0 and r.size == 96
    assert np.all(np.diff(r) > 0) and r[-1] == pytest.approx(1 - 1e-4)


def test_dense_grid_simple():
    val, w = dense_grid_sup(lambda z: 1 - np.abs(z[:, 0]) ** 2, 1)
    assert val == 1.0 and w[0] == 0


def test_dense_grid_monomial():
    f = monomial_family(6, 1.5, 0, 1)
    val, _ = dense_grid_sup(lambda z: seminorm_integrand(f, z, 1.5), 1)
    assert val == pytest.approx(1.0, rel=1e-3)


def test_dense_grid_identity_functional():
    val, _ = dense_grid_sup(lambda z: functional_B(PolyMap.identity(2), z, BlochParams(1, 1)), 2, 24, 8)
    assert val == pytest.approx(2.0)


def test_dense_grid_rejects_high_dimension():
    with pytest.raises(ValueError):
        dense_grid_sup(lambda z: z[:, 0].real, 3)


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(0.01, 5))
def test_golden_section_parabola(c, a):
    x, v = golden_section_max(lambda t: -a * (t - c) ** 2 + 1, -4, 4)
    assert x == pytest.approx(c, abs=1e-6) and v == pytest.approx(1.0, abs=1e-12)


def test_lemma1_constant_function():
    z = np.array([[0.999, 0.5j]])
    for p in (0.5, 1.0, 2.0):
        for b in lemma1_bounds(2.0, 2.0, z, p, 2).values():
            assert b[0] >= 2.0


def test_lemma1_small_suites():
    assert verify_lemma1(0.5, 2, trials=100, seed=3, budget=FAST).passed
    rep = verify_lemma1(1.0, 1, trials=100, seed=3, budget=FAST)
    assert rep.passed and set(rep.details["violations_by_form"]) == {"statement", "proof"}
    assert verify_lemma1(2.0, 1, trials=100, family="monomial").passed


def test_lemma1_monomial_margin_shrinks():
    f = monomial_family(50, 2.0, 0, 1)
    r = np.array([0.9, 0.99, 0.999])
    z = r[:, None].astype(complex)
    bound = lemma1_bounds(0.0, 1.0, z, 2.0, 1)["statement"]
    assert np.all(np.abs(f.values(z)) <= bound)


def test_lemma2_examples():
    rep = verify_lemma2_bound(1.0, [0.0, 0.5], radial=2048, angular=64)
    assert rep.details["sups"][0] == pytest.approx(1.0)
    assert rep.details["sups"][1] == pytest.approx(1.0717967697, rel=1e-5)
    rep = verify_lemma2_bound(2.0, [0.99], radial=2048, angular=64)
    assert rep.passed and rep.margin > 0


def test_lemma7_examples():
    lhs, rhs = lemma7_sides(MultiPoly.constant(1, 4.0), 0.5, 0.9)
    assert lhs == 0
    rep = verify_lemma7(MultiPoly(1, {(5,): 1.0}), 0.5, 0.9)
    assert rep.measured_extremum == pytest.approx(5 * 0.5**4)
    assert rep.claimed_bound == pytest.approx(0.9**5 / 0.4)
    assert rep.passed
    with pytest.raises(ValueError):
        verify_lemma7(MultiPoly(1, {(5,): 1.0}), 0.9, 0.5)


def test_km_constant_and_linear():
    rep = verify_Km_props(MultiPoly.constant(1, 2.0), [2, 4], 1.0, FAST)
    assert rep.passed and rep.details["deviations"] == [0.0, 0.0]
    rep = verify_Km_props(MultiPoly.coordinate(1, 0), [2], 1.0, FAST)
    assert rep.passed
    assert rep.details["norm"] == pytest.approx(1.0)


def test_monomial_limits_p1():
    rep = verify_monomial_limits(1.0, m_max=10_000, annulus_m_max=10)
    assert rep.passed
    assert exact_monomial_norm(2, 1.0) == pytest.approx(0.7698003589)


def test_regression_corpus_shape():
    corpus = regression_corpus()
    assert len(corpus) == 20
    assert {c[2].n for c in corpus} == {1, 2}
    assert len({c[0] for c in corpus}) == 20
