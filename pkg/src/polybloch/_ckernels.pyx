# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch kernels. Must stay numerically interchangeable with
:mod:`polybloch._kernels_py`."""

import numpy as np
cimport numpy as cnp
from libc.math cimport pow, sqrt, INFINITY

cnp.import_array()


cdef inline double _wpow(double x, double p) nogil:
    # common exponents avoid libm pow
    if p == 1.0:
        return x
    if p == 2.0:
        return x * x
    if p == 0.5:
        return sqrt(x)
    return pow(x, p)


def poly_eval_grad(const long[:, ::1] exps, const double complex[::1] coeffs,
                   const double complex[:, ::1] z):
    """Values and holomorphic gradients of sum_t c_t z^{e_t} at every row of z."""
    cdef Py_ssize_t n_pts = z.shape[0]
    cdef Py_ssize_t n = z.shape[1]
    cdef Py_ssize_t n_terms = exps.shape[0]
    cdef Py_ssize_t i, t, k, j, e
    cdef long maxdeg = 0
    for t in range(n_terms):
        for k in range(n):
            if exps[t, k] > maxdeg:
                maxdeg = exps[t, k]

    vals_arr = np.zeros(n_pts, dtype=np.complex128)
    grads_arr = np.zeros((n_pts, n), dtype=np.complex128)
    cdef double complex[::1] vals = vals_arr
    cdef double complex[:, ::1] grads = grads_arr
    pw_arr = np.empty((n, maxdeg + 1), dtype=np.complex128)
    cdef double complex[:, ::1] pw = pw_arr
    cdef double complex mono, part, c

    for i in range(n_pts):
        for k in range(n):
            pw[k, 0] = 1.0
            for e in range(1, maxdeg + 1):
                pw[k, e] = pw[k, e - 1] * z[i, k]
        for t in range(n_terms):
            c = coeffs[t]
            mono = c
            for k in range(n):
                mono = mono * pw[k, exps[t, k]]
            vals[i] = vals[i] + mono
            for k in range(n):
                e = exps[t, k]
                if e == 0:
                    continue
                part = c * e * pw[k, e - 1]
                for j in range(n):
                    if j != k:
                        part = part * pw[j, exps[t, j]]
                grads[i, k] = grads[i, k] + part
    return vals_arr, grads_arr


def weighted_grad_sum(const double complex[:, ::1] grads,
                      const double complex[:, ::1] z, double p):
    """sum_k |g_k| (1 - |z_k|^2)^p per row."""
    cdef Py_ssize_t n_pts = z.shape[0]
    cdef Py_ssize_t n = z.shape[1]
    cdef Py_ssize_t i, k
    cdef double acc, r2, gr, gi
    out_arr = np.empty(n_pts, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n_pts):
        acc = 0.0
        for k in range(n):
            r2 = z[i, k].real * z[i, k].real + z[i, k].imag * z[i, k].imag
            gr = grads[i, k].real
            gi = grads[i, k].imag
            acc += sqrt(gr * gr + gi * gi) * _wpow(1.0 - r2, p)
        out[i] = acc
    return out_arr


def functional_b(const double complex[:, ::1] z, const double complex[:, ::1] w,
                 const double complex[:, :, ::1] jac, double p, double q):
    """sum_{k,l} |J_lk| (1-|z_k|^2)^q / (1-|w_l|^2)^p per row; +inf once
    some |w_l| >= 1."""
    cdef Py_ssize_t n_pts = z.shape[0]
    cdef Py_ssize_t n = z.shape[1]
    cdef Py_ssize_t i, k, l
    cdef double acc, wl, zr2, denom, a
    out_arr = np.empty(n_pts, dtype=np.float64)
    cdef double[::1] out = out_arr
    zw_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] zw = zw_arr
    for i in range(n_pts):
        for k in range(n):
            zr2 = z[i, k].real * z[i, k].real + z[i, k].imag * z[i, k].imag
            zw[k] = _wpow(1.0 - zr2, q)
        acc = 0.0
        for l in range(n):
            wl = w[i, l].real * w[i, l].real + w[i, l].imag * w[i, l].imag
            if wl >= 1.0:
                acc = INFINITY
                break
            denom = _wpow(1.0 - wl, p)
            for k in range(n):
                a = sqrt(jac[i, l, k].real * jac[i, l, k].real
                         + jac[i, l, k].imag * jac[i, l, k].imag)
                acc += a * zw[k] / denom
        out[i] = acc
    return out_arr
