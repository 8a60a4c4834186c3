"""Batch kernels, compiled when available.

The Cython build (``polybloch._ckernels``) is used unless it failed to build
or ``POLYBLOCH_PURE=1`` is set; :mod:`polybloch._kernels_py` is the fallback.
Both expose ``poly_eval_grad``, ``weighted_grad_sum`` and ``functional_b``
with identical semantics.
"""

import os

import numpy as np

from . import _kernels_py

try:
    if os.environ.get("POLYBLOCH_PURE", "") not in ("", "0"):
        raise ImportError("pure backend requested")
    from . import _ckernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _kernels_py
    BACKEND = "python"


def poly_eval_grad(exps, coeffs, z):
    return _impl.poly_eval_grad(
        np.ascontiguousarray(exps, dtype=np.int64),
        np.ascontiguousarray(coeffs, dtype=np.complex128),
        np.ascontiguousarray(z, dtype=np.complex128),
    )


def weighted_grad_sum(grads, z, p):
    return _impl.weighted_grad_sum(
        np.ascontiguousarray(grads, dtype=np.complex128),
        np.ascontiguousarray(z, dtype=np.complex128),
        float(p),
    )


def functional_b(z, w, jac, p, q):
    return _impl.functional_b(
        np.ascontiguousarray(z, dtype=np.complex128),
        np.ascontiguousarray(w, dtype=np.complex128),
        np.ascontiguousarray(jac, dtype=np.complex128),
        float(p),
        float(q),
    )
