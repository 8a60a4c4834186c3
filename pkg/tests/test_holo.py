import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polybloch.blochnorm import bloch_norm, exact_monomial_norm
from polybloch.holo import (
    Composed,
    LogPrim,
    MultiPoly,
    PolyMap,
    PowPrim,
    dilate_Km,
    evaluate,
    grad,
    map_eval,
    map_jacobian,
    monomial_family,
    taylor_truncate_fw,
    test_fn_fw as make_fw,
)
from polybloch.polydisc import DomainError, SampleBudget

rng = np.random.default_rng(12345)


def random_poly(n, degree, terms, seed):
    r = np.random.default_rng(seed)
    return MultiPoly(n, {
        tuple(int(x) for x in r.integers(0, degree + 1, n)): complex(r.normal(), r.normal())
        for _ in range(terms)
    })


def fd_grad(f, z, h=1e-6):
    """Central differences along the real axis of each coordinate."""
    out = []
    for k in range(z.size):
        e = np.zeros_like(z)
        e[k] = h
        out.append((evaluate(f, z + e) - evaluate(f, z - e)) / (2 * h))
    return np.array(out)


def test_poly_values_and_grad():
    assert evaluate(MultiPoly(2, {(2, 0): 1.0}), [0.5, 0]) == pytest.approx(0.25)
    a, b = 0.3 + 0.1j, -0.2j
    np.testing.assert_allclose(grad(MultiPoly(2, {(1, 1): 1.0}), [a, b]), [b, a])


def test_fw_at_zero_is_coordinate():
    f = make_fw(0.0, 1, 2.0, 2)
    assert isinstance(f, MultiPoly)
    assert evaluate(f, [0.3, 0.7j]) == pytest.approx(0.7j)


def test_logprim_value():
    f = make_fw(0.5, 0, 1.0, 1)
    assert isinstance(f, LogPrim)
    assert evaluate(f, [0.5]) == pytest.approx(-2 * math.log(0.75))


def test_powprim_gradient_at_origin():
    f = make_fw(0.5, 0, 2.0, 1)
    assert isinstance(f, PowPrim)
    assert grad(f, [0.0])[0] == pytest.approx(1.0)


@pytest.mark.parametrize("p", [0.5, 1.0, 2.0, 3.3])
@pytest.mark.parametrize("w", [0.5, 0.3 - 0.6j, 0.95j])
def test_fw_derivative_closed_form(p, w):
    f = make_fw(w, 1, p, 2)
    z = np.array([0.1, -0.4 + 0.3j])
    g = grad(f, z)
    assert g[0] == 0
    assert g[1] == pytest.approx((1 - np.conj(w) * z[1]) ** -p, rel=1e-12)


def test_branch_guard():
    f = make_fw(0.9, 0, 1.5, 1)
    with pytest.raises(ValueError):
        f.values(np.array([[1.2]]))


EXPRS = [
    random_poly(2, 4, 6, 1),
    random_poly(3, 3, 5, 2),
    make_fw(0.6 + 0.2j, 0, 1.0, 2),
    make_fw(-0.3 + 0.7j, 1, 2.5, 2),
    make_fw(0.4j, 0, 0.5, 1),
    monomial_family(7, 1.5, 1, 2),
    dilate_Km(random_poly(2, 5, 4, 3), 4),
    random_poly(2, 3, 3, 4) * 2.0 - make_fw(0.5, 1, 1.0, 2),
]


@pytest.mark.parametrize("f", EXPRS, ids=lambda f: type(f).__name__)
def test_grad_matches_finite_differences(f):
    for _ in range(5):
        z = 0.8 * rng.random(f.n) * np.exp(2j * np.pi * rng.random(f.n))
        np.testing.assert_allclose(grad(f, z), fd_grad(f, z), rtol=1e-5, atol=1e-7)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
def test_rotation_invariance(seed, t1, t2):
    f = random_poly(2, 4, 4, seed)
    g = f.rotate([t1, t2])
    z = np.array([0.3 + 0.2j, -0.5j])
    zr = z * np.exp(1j * np.array([t1, t2]))
    assert evaluate(g, z) == pytest.approx(evaluate(f, zr), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_composition_coherence(seed):
    """A polynomial of a polynomial map equals the composed expansion."""
    r = np.random.default_rng(seed)
    comps = [random_poly(2, 2, 3, seed + k) * (0.3 / 3) for k in range(2)]
    phi = PolyMap(comps, certify=False)
    outer = random_poly(2, 3, 4, seed + 7)
    z = 0.9 * r.random(2) * np.exp(2j * np.pi * r.random(2))
    expanded = MultiPoly.constant(2, 0)
    for gamma, c in outer.terms.items():
        expanded = expanded + phi.power(gamma) * c
    comp = Composed(outer, phi)
    assert evaluate(comp, z) == pytest.approx(evaluate(expanded, z), abs=1e-11)
    np.testing.assert_allclose(grad(comp, z), grad(expanded, z), atol=1e-10)


def test_identity_jacobian():
    phi = PolyMap.identity(3)
    z = [0.1, 0.2j, -0.3]
    np.testing.assert_array_equal(map_jacobian(phi, z), np.eye(3))
    np.testing.assert_allclose(map_eval(phi, z).coords, z)


def test_product_map_jacobian():
    phi = PolyMap([MultiPoly(2, {(1, 1): 1.0}), MultiPoly(2, {(0, 1): 1.0})])
    np.testing.assert_allclose(map_jacobian(phi, [0.3, 0.5]), [[0.5, 0.3], [0, 1]])


def test_cubic_map_jacobian_fd():
    comps = [random_poly(2, 3, 4, 10 + k) * 0.1 for k in range(2)]
    phi = PolyMap(comps, certify=False)
    z = np.array([0.2 - 0.3j, 0.6j])
    jac = map_jacobian(phi, z)
    for l, c in enumerate(comps):
        np.testing.assert_allclose(jac[l], fd_grad(c, z), rtol=1e-5, atol=1e-8)


def test_self_map_certificate():
    half = PolyMap([MultiPoly(1, {(1,): 0.5})])
    assert half.certificate.is_self_map
    assert half.certificate.torus_max == pytest.approx(0.5)
    big = PolyMap([MultiPoly(1, {(1,): 1.5})])
    assert not big.certificate.is_self_map


def test_map_dimension_check():
    with pytest.raises(ValueError):
        PolyMap([MultiPoly(2, {(1, 0): 1.0})])


def test_serialization_round_trip():
    f = random_poly(3, 3, 6, 5)
    assert MultiPoly.from_doc(3, f.to_doc()) == f
    phi = PolyMap([random_poly(2, 2, 3, k) * 0.1 for k in range(2)])
    again = PolyMap.from_doc(phi.to_doc())
    assert all(a == b for a, b in zip(again.components, phi.components))


def test_poly_algebra():
    x = MultiPoly.coordinate(2, 0)
    y = MultiPoly.coordinate(2, 1)
    f = (x + y) ** 2
    assert f == x * x + (x * y) * 2.0 + y * y
    assert (f - f).terms == {}


def test_monomial_family():
    f = monomial_family(2, 1.0, 0, 1)
    assert f.scale == pytest.approx(1.0 / 0.7698003589195010, rel=1e-12)
    assert evaluate(monomial_family(9, 2.0, 0, 1), [0.0]) == 0
    small = [abs(evaluate(monomial_family(m, 1.0, 0, 1), [0.5])) for m in (10, 40, 160)]
    assert small[0] > small[1] > small[2] and small[2] < 1e-40


def test_dilation():
    c = MultiPoly.constant(1, 2.5)
    assert evaluate(dilate_Km(c, 5), [0.7]) == pytest.approx(2.5)
    assert evaluate(dilate_Km(MultiPoly.coordinate(1, 0), 2), [0.5]) == pytest.approx(0.25)


def test_taylor_truncation():
    P0, _ = taylor_truncate_fw(0.5, 2.0, 0, 0, 1)
    assert P0 == MultiPoly.coordinate(1, 0)
    tails = [taylor_truncate_fw(0.5, 1.0, 0, N, 1)[1] for N in range(0, 40, 4)]
    assert all(b < a for a, b in zip(tails, tails[1:]))
    P, tail = taylor_truncate_fw(0.5, 1.0, 0, 20, 1)
    f = make_fw(0.5, 0, 1.0, 1)
    assert bloch_norm(f - P, 1.0, SampleBudget(shell_count=10, angular_samples_per_shell=64)).value <= tail


def test_fw_series_matches_closed_form():
    w, p = 0.4 - 0.3j, 1.7
    P, tail = taylor_truncate_fw(w, p, 0, 80, 1)
    f = make_fw(w, 0, p, 1)
    z = [0.6 + 0.2j]
    assert tail < 1e-12
    assert evaluate(P, z) == pytest.approx(evaluate(f, z), abs=1e-10)
