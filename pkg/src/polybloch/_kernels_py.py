"""Pure numpy twins of the compiled kernels in ``_ckernels.pyx``."""

import numpy as np

_CHUNK = 4096


def poly_eval_grad(exps, coeffs, z):
    """Values and holomorphic gradients of sum_t c_t z^{e_t} at every row of z."""
    exps = np.asarray(exps, dtype=np.int64)
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128)
    n_pts, n = z.shape
    vals = np.zeros(n_pts, dtype=np.complex128)
    grads = np.zeros((n_pts, n), dtype=np.complex128)
    if exps.shape[0] == 0:
        return vals, grads
    maxdeg = int(exps.max())
    lower = np.maximum(exps - 1, 0)
    axes = np.arange(n)
    for start in range(0, n_pts, _CHUNK):
        zc = z[start:start + _CHUNK]
        pw = np.ones((zc.shape[0], n, maxdeg + 1), dtype=np.complex128)
        for e in range(1, maxdeg + 1):
            pw[:, :, e] = pw[:, :, e - 1] * zc
        # factors[i, t, k] = z_ik^{e_tk}
        factors = pw[:, axes, exps]
        vals[start:start + _CHUNK] = factors.prod(axis=2) @ coeffs
        for k in range(n):
            rest = np.delete(factors, k, axis=2).prod(axis=2)
            dk = exps[:, k] * pw[:, k, lower[:, k]]
            grads[start:start + _CHUNK, k] = (dk * rest) @ coeffs
    return vals, grads


def _abs2(z):
    # same rounding as the compiled kernels
    return z.real * z.real + z.imag * z.imag


def weighted_grad_sum(grads, z, p):
    """sum_k |g_k| (1 - |z_k|^2)^p per row."""
    return (np.abs(grads) * (1.0 - _abs2(z)) ** p).sum(axis=1)


def functional_b(z, w, jac, p, q):
    """sum_{k,l} |J_lk| (1-|z_k|^2)^q / (1-|w_l|^2)^p per row; +inf once
    some |w_l| >= 1."""
    zw = (1.0 - _abs2(z)) ** q
    wl = _abs2(w)
    outside = (wl >= 1.0).any(axis=1)
    denom = (1.0 - np.where(outside[:, None], 0.0, wl)) ** p
    terms = np.abs(jac) * zw[:, None, :] / denom[:, :, None]
    out = terms.sum(axis=(1, 2))
    out[outside] = np.inf
    return out
