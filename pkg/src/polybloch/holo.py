"""Holomorphic functions on U^n with exact complex partial derivatives.

Every expression node implements two batch methods on ``(N, n)`` complex
arrays: ``values(z) -> (N,)`` and ``grads(z) -> (N, n)``. Axes are 0-based.
"""

from dataclasses import dataclass, field
import math
import numbers

import numpy as np

from . import kernels
from .polydisc import (
    DomainError,
    PolydiscPoint,
    SampleBudget,
    _halton,
    as_batch,
    refine_batch,
    sample_stratified,
)


def _check_interior(z):
    if np.any(np.abs(z) >= 1.0):
        bad = z[(np.abs(z) >= 1.0).any(axis=1)][0]
        raise DomainError(f"point {bad} is not in the open polydisc")


class HoloExpr:
    """Base class for evaluable holomorphic functions on U^n."""

    n: int

    def values(self, z):
        raise NotImplementedError

    def grads(self, z):
        raise NotImplementedError

    def __call__(self, z):
        return evaluate(self, z)

    def __add__(self, other):
        if isinstance(other, numbers.Number):
            other = MultiPoly.constant(self.n, other)
        if not isinstance(other, HoloExpr):
            return NotImplemented
        _same_dim(self, other)
        return Sum((self, other))

    __radd__ = __add__

    def __neg__(self):
        return Scaled(-1.0, self)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            return Scaled(complex(other), self)
        return NotImplemented

    __rmul__ = __mul__


def _same_dim(a, b):
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")


class MultiPoly(HoloExpr):
    """Polynomial ``sum_gamma c_gamma z^gamma`` in ``n`` variables.

    Terms with zero coefficient are dropped; repeated multi-indices are
    collected.
    """

    def __init__(self, n, terms=()):
        if n < 1:
            raise ValueError("dimension must be >= 1")
        self.n = int(n)
        collected = {}
        items = terms.items() if isinstance(terms, dict) else terms
        for gamma, c in items:
            gamma = tuple(int(g) for g in gamma)
            if len(gamma) != self.n or min(gamma) < 0:
                raise ValueError(f"bad multi-index {gamma} for n={self.n}")
            collected[gamma] = collected.get(gamma, 0j) + complex(c)
        self.terms = {g: c for g, c in sorted(collected.items()) if c != 0}
        if self.terms:
            self._exps = np.array(list(self.terms), dtype=np.int64)
            self._coeffs = np.array(list(self.terms.values()), dtype=np.complex128)
        else:
            self._exps = np.zeros((0, self.n), dtype=np.int64)
            self._coeffs = np.zeros(0, dtype=np.complex128)

    @classmethod
    def constant(cls, n, c):
        return cls(n, {(0,) * n: c})

    @classmethod
    def coordinate(cls, n, axis):
        gamma = [0] * n
        gamma[axis] = 1
        return cls(n, {tuple(gamma): 1.0})

    @classmethod
    def monomial(cls, gamma, c=1.0):
        return cls(len(gamma), {tuple(gamma): c})

    @property
    def degree(self):
        return int(self._exps.sum(axis=1).max()) if self.terms else 0

    def values(self, z):
        z = as_batch(z)
        return kernels.poly_eval_grad(self._exps, self._coeffs, z)[0]

    def grads(self, z):
        z = as_batch(z)
        return kernels.poly_eval_grad(self._exps, self._coeffs, z)[1]

    def values_and_grads(self, z):
        return kernels.poly_eval_grad(self._exps, self._coeffs, as_batch(z))

    def __add__(self, other):
        if isinstance(other, numbers.Number):
            other = MultiPoly.constant(self.n, other)
        if isinstance(other, MultiPoly):
            _same_dim(self, other)
            merged = dict(self.terms)
            for g, c in other.terms.items():
                merged[g] = merged.get(g, 0j) + c
            return MultiPoly(self.n, merged)
        return HoloExpr.__add__(self, other)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.n, {g: -c for g, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            return MultiPoly(self.n, {g: c * other for g, c in self.terms.items()})
        if isinstance(other, MultiPoly):
            _same_dim(self, other)
            prod = {}
            for g1, c1 in self.terms.items():
                for g2, c2 in other.terms.items():
                    g = tuple(a + b for a, b in zip(g1, g2))
                    prod[g] = prod.get(g, 0j) + c1 * c2
            return MultiPoly(self.n, prod)
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, numbers.Integral) or k < 0:
            raise ValueError("polynomial powers must be non-negative integers")
        out = MultiPoly.constant(self.n, 1.0)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        return isinstance(other, MultiPoly) and self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, tuple(self.terms.items())))

    def __repr__(self):
        return f"MultiPoly(n={self.n}, terms={self.terms})"

    def rotate(self, thetas):
        """The polynomial ``z -> f(e^{i theta} z)`` (coordinate-wise phases)."""
        thetas = np.asarray(thetas, dtype=float)
        return MultiPoly(
            self.n,
            {g: c * np.exp(1j * float(np.dot(g, thetas))) for g, c in self.terms.items()},
        )

    def to_doc(self):
        return [
            {"multi_index": list(g), "re": float(c.real), "im": float(c.imag)}
            for g, c in self.terms.items()
        ]

    @classmethod
    def from_doc(cls, n, doc):
        terms = []
        for item in doc:
            gamma = item["multi_index"]
            if len(gamma) != n:
                raise ValueError(f"multi_index {gamma} has length != dimension {n}")
            terms.append((gamma, complex(float(item.get("re", 0.0)), float(item.get("im", 0.0)))))
        return cls(n, terms)


def _branch_base(w, z_axis):
    a = 1.0 - np.conj(w) * z_axis
    if np.any(a.real <= 0.0):
        raise DomainError("principal branch of 1 - conj(w) z is not well defined here")
    return a


@dataclass(frozen=True, eq=False)
class PowPrim(HoloExpr):
    """``integral_0^{z_axis} (1 - conj(w) t)^{-p} dt`` for ``p != 1``."""

    w: complex
    axis: int
    p: float
    n: int

    def __post_init__(self):
        if abs(self.w) >= 1.0:
            raise ValueError("|w| must be < 1")
        if self.p <= 0 or self.p == 1:
            raise ValueError("PowPrim needs p > 0, p != 1 (use LogPrim for p = 1)")

    def values(self, z):
        z = as_batch(z)
        zl = z[:, self.axis]
        if self.w == 0:
            return zl.astype(np.complex128)
        wb = np.conj(self.w)
        log_a = np.log(_branch_base(self.w, zl))
        return np.expm1((1.0 - self.p) * log_a) / ((self.p - 1.0) * wb)

    def grads(self, z):
        z = as_batch(z)
        out = np.zeros(z.shape, dtype=np.complex128)
        a = _branch_base(self.w, z[:, self.axis])
        out[:, self.axis] = np.exp(-self.p * np.log(a))
        return out


@dataclass(frozen=True, eq=False)
class LogPrim(HoloExpr):
    """``-log(1 - conj(w) z_axis) / conj(w)``, the ``p = 1`` primitive."""

    w: complex
    axis: int
    n: int

    def __post_init__(self):
        if abs(self.w) >= 1.0:
            raise ValueError("|w| must be < 1")

    def values(self, z):
        z = as_batch(z)
        zl = z[:, self.axis]
        if self.w == 0:
            return zl.astype(np.complex128)
        return -np.log(_branch_base(self.w, zl)) / np.conj(self.w)

    def grads(self, z):
        z = as_batch(z)
        out = np.zeros(z.shape, dtype=np.complex128)
        out[:, self.axis] = 1.0 / _branch_base(self.w, z[:, self.axis])
        return out


@dataclass(frozen=True, eq=False)
class Monomial(HoloExpr):
    """``scale * z_axis**m``; kept separate from MultiPoly for large ``m``."""

    m: int
    axis: int
    scale: float
    n: int

    def values(self, z):
        z = as_batch(z)
        return self.scale * z[:, self.axis] ** self.m

    def grads(self, z):
        z = as_batch(z)
        out = np.zeros(z.shape, dtype=np.complex128)
        out[:, self.axis] = self.scale * self.m * z[:, self.axis] ** (self.m - 1)
        return out


@dataclass(frozen=True, eq=False)
class Dilated(HoloExpr):
    """``z -> inner(factor * z)``."""

    inner: HoloExpr
    factor: float

    def __post_init__(self):
        if not 0.0 < self.factor < 1.0:
            raise ValueError("dilation factor must lie in (0, 1)")

    @property
    def n(self):
        return self.inner.n

    def values(self, z):
        return self.inner.values(self.factor * as_batch(z))

    def grads(self, z):
        return self.factor * self.inner.grads(self.factor * as_batch(z))


@dataclass(frozen=True, eq=False)
class Sum(HoloExpr):
    parts: tuple

    @property
    def n(self):
        return self.parts[0].n

    def values(self, z):
        z = as_batch(z)
        return sum(p.values(z) for p in self.parts)

    def grads(self, z):
        z = as_batch(z)
        return sum(p.grads(z) for p in self.parts)


@dataclass(frozen=True, eq=False)
class Scaled(HoloExpr):
    factor: complex
    inner: HoloExpr

    @property
    def n(self):
        return self.inner.n

    def values(self, z):
        return self.factor * self.inner.values(z)

    def grads(self, z):
        return self.factor * self.inner.grads(z)


@dataclass(frozen=True, eq=False)
class Composed(HoloExpr):
    """``outer o pmap`` with the chain-rule gradient ``grad outer(phi(z)) . J(z)``."""

    outer: HoloExpr
    pmap: "PolyMap"

    def __post_init__(self):
        if self.outer.n != self.pmap.n:
            raise ValueError("composition dimension mismatch")

    @property
    def n(self):
        return self.pmap.n

    def values(self, z):
        w = self.pmap.values(as_batch(z))
        _check_interior(w)
        return self.outer.values(w)

    def grads(self, z):
        z = as_batch(z)
        w, jac = self.pmap.values_and_jacobian(z)
        _check_interior(w)
        return np.einsum("il,ilk->ik", self.outer.grads(w), jac)


@dataclass(frozen=True)
class SelfMapCertificate:
    """Empirical evidence that a polynomial map sends U^n into U^n.

    ``max_modulus`` is the largest ``|phi_k(z)|`` over ``sample_size``
    interior certification points; ``torus_max`` the (locally polished)
    largest value found near the torus, which is the supremum over U^n by
    the maximum principle.
    """

    max_modulus: float
    torus_max: float
    sample_size: int
    is_self_map: bool


class PolyMap:
    """Polynomial map ``phi = (phi_1, ..., phi_n)`` of U^n."""

    def __init__(self, components, certify=True):
        components = tuple(components)
        if not components:
            raise ValueError("a map needs at least one component")
        n = components[0].n
        if any(c.n != n for c in components) or len(components) != n:
            raise ValueError("a self-map of U^n needs n components in n variables")
        self.components = components
        self.n = n
        self._exps = [c._exps for c in components]
        self._coeffs = [c._coeffs for c in components]
        self.certificate = self._certify() if certify else None

    @classmethod
    def identity(cls, n):
        return cls([MultiPoly.coordinate(n, k) for k in range(n)])

    @classmethod
    def from_doc(cls, doc):
        n = len(doc)
        return cls([MultiPoly.from_doc(n, comp) for comp in doc])

    def to_doc(self):
        return [c.to_doc() for c in self.components]

    def values(self, z):
        z = as_batch(z)
        return np.stack([c.values(z) for c in self.components], axis=1)

    def jacobian(self, z):
        """Array ``J[i, l, k] = d phi_l / d z_k`` at each row ``z_i``."""
        return self.values_and_jacobian(z)[1]

    def values_and_jacobian(self, z):
        z = as_batch(z)
        vals = np.empty(z.shape, dtype=np.complex128)
        jac = np.empty((z.shape[0], self.n, self.n), dtype=np.complex128)
        for l, (e, c) in enumerate(zip(self._exps, self._coeffs)):
            vals[:, l], jac[:, l, :] = kernels.poly_eval_grad(e, c, z)
        return vals, jac

    def _certify(self):
        sample = sample_stratified(self.n, SampleBudget(shell_count=14, angular_samples_per_shell=64))
        interior = float(np.abs(self.values(sample)).max())
        torus = np.exp(2j * np.pi * _halton(self.n, 4096, 0))

        def modulus(z):
            return np.abs(self.values(z)).max(axis=1)

        tv = modulus(torus)
        top = torus[np.argsort(tv)[::-1][:4]]
        _, refined = refine_batch(modulus, top, 100, initial_step=0.1)
        on_torus = float(max(tv.max(), refined.max()))
        return SelfMapCertificate(
            max_modulus=interior,
            torus_max=on_torus,
            sample_size=sample.shape[0],
            is_self_map=interior < 1.0,
        )

    def power(self, gamma):
        """The polynomial ``phi^gamma = prod_l phi_l^{gamma_l}``."""
        out = MultiPoly.constant(self.n, 1.0)
        for comp, g in zip(self.components, gamma):
            if g:
                out = out * comp**g
        return out

    def rotate(self, thetas):
        """``phi o R`` with ``R z = (e^{i theta_k} z_k)_k``."""
        return PolyMap([c.rotate(thetas) for c in self.components], certify=False)


def evaluate(f, z):
    """Value of ``f`` at one interior point (or a batch)."""
    batch = as_batch(z)
    _check_interior(batch)
    out = f.values(batch)
    return complex(out[0]) if _is_single(z) else out


def grad(f, z):
    """Holomorphic gradient ``(df/dz_1, ..., df/dz_n)`` at an interior point."""
    batch = as_batch(z)
    _check_interior(batch)
    out = f.grads(batch)
    return out[0] if _is_single(z) else out


def _is_single(z):
    return isinstance(z, PolydiscPoint) or np.ndim(z) <= 1


def map_eval(phi, z):
    """``phi(z)`` as a closed-polydisc point."""
    batch = as_batch(z)
    _check_interior(batch)
    return PolydiscPoint(phi.values(batch)[0], closed=True)


def map_jacobian(phi, z):
    """``n x n`` matrix with entry ``(l, k) = d phi_l / d z_k (z)``."""
    batch = as_batch(z)
    _check_interior(batch)
    return phi.jacobian(batch)[0]


def test_fn_fw(w, axis, p, n):
    """Test function ``f_w(z) = integral_0^{z_axis} (1 - conj(w) t)^{-p} dt``."""
    w = complex(w)
    if abs(w) >= 1.0:
        raise ValueError("|w| must be < 1")
    if w == 0:
        return MultiPoly.coordinate(n, axis)
    if p == 1:
        return LogPrim(w, axis, n)
    return PowPrim(w, axis, float(p), n)


test_fn_fw.__test__ = False  # not a pytest test despite the name


def monomial_family(m, p, axis, n):
    """Normalised ``m^{p-1} z_axis^m`` with unit p-Bloch norm."""
    from .blochnorm import exact_monomial_norm

    if m < 2:
        raise ValueError("the monomial family starts at m = 2")
    return Monomial(int(m), axis, m ** (p - 1.0) / exact_monomial_norm(m, p), n)


def dilate_Km(f, m):
    """``K_m f (z) = f((m-1)/m z)``."""
    if m < 2:
        raise ValueError("K_m is defined for m >= 2")
    return Dilated(f, (m - 1.0) / m)


def fw_series_coefficients(p, count):
    """``p(p+1)...(p+k-1)/k!`` for ``k = 0 .. count-1``."""
    out = np.empty(count)
    c = 1.0
    for k in range(count):
        out[k] = c
        c *= (p + k) / (k + 1.0)
    return out


def taylor_tail(w, p, N, eps=1e-18):
    """``sum_{k > N} p(p+1)...(p+k-1)/k! |w|^k``, summed until terms drop below ``eps``."""
    r = abs(complex(w))
    if r == 0.0:
        return 0.0
    c = 1.0
    for k in range(N + 1):
        c *= (p + k) / (k + 1.0) * r
    # terms increase while (p + k) r > k + 1
    peak = (p * r - 1.0) / (1.0 - r) if r < 1 else math.inf
    total, k = 0.0, N + 1
    while True:
        total += c
        if c < eps and k > peak:
            break
        c *= (p + k) / (k + 1.0) * r
        k += 1
    return total


def taylor_truncate_fw(w, p, axis, N, n):
    """Degree ``N + 1`` truncation of the power series of ``f_w`` and a bound
    on the norm of the remainder."""
    w = complex(w)
    coef = fw_series_coefficients(p, N + 1)
    terms = {}
    for k in range(N + 1):
        gamma = [0] * n
        gamma[axis] = k + 1
        terms[tuple(gamma)] = coef[k] * np.conj(w) ** k / (k + 1)
    return MultiPoly(n, terms), taylor_tail(w, p, N)
