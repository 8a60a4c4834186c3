import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polybloch import _kernels_py as pure
from polybloch import kernels

compiled = pytest.importorskip("polybloch._ckernels")


def data(seed, n, n_pts=200, degree=5, terms=6):
    r = np.random.default_rng(seed)
    exps = r.integers(0, degree + 1, size=(terms, n)).astype(np.int64)
    coeffs = r.normal(size=terms) + 1j * r.normal(size=terms)
    z = r.random((n_pts, n)) ** 0.3 * np.exp(2j * np.pi * r.random((n_pts, n)))
    jac = r.normal(size=(n_pts, n, n)) + 1j * r.normal(size=(n_pts, n, n))
    return exps, coeffs, z, jac


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 4))
def test_poly_eval_grad_parity(seed, n):
    exps, coeffs, z, _ = data(seed, n)
    v1, g1 = compiled.poly_eval_grad(exps, coeffs, z)
    v2, g2 = pure.poly_eval_grad(exps, coeffs, z)
    np.testing.assert_allclose(v1, v2, rtol=1e-12, atol=1e-13)
    np.testing.assert_allclose(g1, g2, rtol=1e-12, atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 4), st.sampled_from([0.5, 1.0, 2.0, 0.3, 1.7]))
def test_weighted_sum_parity(seed, n, p):
    exps, coeffs, z, _ = data(seed, n)
    _, g = pure.poly_eval_grad(exps, coeffs, z)
    np.testing.assert_allclose(compiled.weighted_grad_sum(g, z, p), pure.weighted_grad_sum(g, z, p), rtol=1e-11)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 4), st.floats(0.2, 3.0), st.floats(0.2, 3.0))
def test_functional_parity(seed, n, p, q):
    _, _, z, jac = data(seed, n)
    w = 0.95 * z
    w[::7, 0] = 1.0  # outside rows map to +inf in both backends
    a = compiled.functional_b(z, w, jac, p, q)
    b = pure.functional_b(z, w, jac, p, q)
    assert np.array_equal(np.isinf(a), np.isinf(b))
    fin = np.isfinite(a)
    np.testing.assert_allclose(a[fin], b[fin], rtol=1e-11)


def test_empty_poly():
    z = np.zeros((3, 2), dtype=complex)
    exps = np.zeros((0, 2), dtype=np.int64)
    coeffs = np.zeros(0, dtype=complex)
    for mod in (compiled, pure):
        v, g = mod.poly_eval_grad(exps, coeffs, z)
        assert np.all(v == 0) and np.all(g == 0)


def test_pure_fallback_selected_by_env():
    import os
    import subprocess
    import sys

    env = dict(os.environ, POLYBLOCH_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from polybloch import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
