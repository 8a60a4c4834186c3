"""Geometry of the unit polydisc U^n and boundary-weighted sampling.

Points are handled as complex arrays of shape ``(n,)`` (one point) or
``(N, n)`` (a batch). :class:`PolydiscPoint` is the validated single-point
wrapper used at API boundaries.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

# Largest modulus any generated or refined point may take.
INTERIOR_CAP = 1.0 - 2.0**-40
_BOUNDARY_TOL = 1e-12


class DomainError(ValueError):
    """A point lies outside the region an operation is defined on."""


@dataclass(frozen=True)
class PolydiscPoint:
    """A point of the closed unit polydisc.

    Parameters
    ----------
    coords : array_like of complex
        Coordinates ``(z_1, ..., z_n)``.
    closed : bool
        Allow coordinates of modulus exactly 1 (up to a tolerance).
    """

    coords: np.ndarray
    closed: bool = False

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coords, dtype=np.complex128)).copy()
        if c.ndim != 1 or c.size < 1:
            raise DomainError("a polydisc point needs n >= 1 coordinates")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)
        mod = np.abs(c)
        if self.closed:
            if np.any(mod > 1.0 + _BOUNDARY_TOL):
                raise DomainError(f"point {c} is outside the closed polydisc")
        elif np.any(mod >= 1.0):
            raise DomainError(f"point {c} is not in the open polydisc")

    @property
    def n(self):
        return self.coords.size

    @property
    def moduli(self):
        return np.abs(self.coords)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)

    def __len__(self):
        return self.coords.size

    def __iter__(self):
        return iter(self.coords)

    def __eq__(self, other):
        if not isinstance(other, PolydiscPoint):
            return NotImplemented
        return np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash(self.coords.tobytes())


@dataclass(frozen=True)
class SampleBudget:
    """Sampling effort for supremum estimates.

    ``shell_count`` shells at radii ``1 - 2**-(j+1)``, each with
    ``angular_samples_per_shell`` points; ``refinement_steps`` local search
    sweeps per polished candidate; ``seed`` drives the scrambled sequence.
    """

    shell_count: int = 12
    angular_samples_per_shell: int = 256
    refinement_steps: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.shell_count < 1:
            raise ValueError("shell_count must be >= 1")
        if self.angular_samples_per_shell < 1:
            raise ValueError("angular_samples_per_shell must be >= 1")
        if self.refinement_steps < 0:
            raise ValueError("refinement_steps must be >= 0")
        if not -(2**63) <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")


def as_batch(z):
    """Coerce a point, a sequence of points or an array to shape ``(N, n)``."""
    if isinstance(z, PolydiscPoint):
        return z.coords[None, :]
    arr = np.asarray(z, dtype=np.complex128)
    if arr.ndim == 1:
        return arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"expected points of shape (N, n), got {arr.shape}")
    return arr


def _moduli(w):
    if isinstance(w, PolydiscPoint):
        return w.moduli
    mod = np.abs(np.asarray(w, dtype=np.complex128))
    if np.any(mod > 1.0 + _BOUNDARY_TOL):
        raise DomainError(f"point {w} is outside the closed polydisc")
    return np.minimum(mod, 1.0)


def boundary_dist(w):
    """Gap ``min_k (1 - |w_k|)`` to the topological boundary of U^n.

    Accepts one point or a batch ``(N, n)``; a batch returns one value per row.
    """
    return (1.0 - _moduli(w)).min(axis=-1)


def star_boundary_gap(w):
    """Gap ``max_k (1 - |w_k|)`` to the distinguished boundary (the torus)."""
    return (1.0 - _moduli(w)).max(axis=-1)


def _halton(d, count, seed):
    engine = qmc.Halton(d=d, scramble=True, seed=np.random.default_rng(seed))
    return engine.random(count)


def sample_stratified(n, budget):
    """Deterministic boundary-stratified sample of U^n.

    Shell ``j`` has radius ``r_j = 1 - 2**-(j+1)``. In shell ``j`` a lead
    coordinate (cycling through the axes) takes a modulus in the band
    ``(r_{j-1}, r_j]`` (``r_{-1} = 0``); the remaining coordinates use
    either a linear modulus ``r_j u`` or a log-uniform boundary gap in
    ``[2**-(j+1), 1]``, alternating by point. Arguments and the pattern
    parameters come from one scrambled Halton stream.

    Returns
    -------
    ndarray, shape (shell_count * angular_samples_per_shell, n)
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    m = budget.angular_samples_per_shell
    shells = budget.shell_count
    u = _halton(2 * n, shells * m, budget.seed).reshape(shells, m, 2 * n)
    out = np.empty((shells, m, n), dtype=np.complex128)
    idx = np.arange(m)
    lead = idx % n
    for j in range(shells):
        r_hi = 1.0 - 2.0 ** -(j + 1)
        r_lo = 0.0 if j == 0 else 1.0 - 2.0**-j
        uj = u[j]
        mod = np.empty((m, n))
        for k in range(n):
            linear = r_hi * uj[:, n + k]
            gap = 2.0 ** (-(j + 1) * uj[:, n + k])
            other = np.where(idx % 2 == 0, linear, 1.0 - gap)
            band = r_lo + (r_hi - r_lo) * (1.0 - uj[:, n + k])
            mod[:, k] = np.where(lead == k, band, np.minimum(other, r_hi))
        out[j] = mod * np.exp(2j * np.pi * uj[:, :n])
    return out.reshape(shells * m, n)


def _clip_interior(z):
    mod = np.abs(z)
    over = mod > INTERIOR_CAP
    if np.any(over):
        z = np.where(over, z * (INTERIOR_CAP / np.where(over, mod, 1.0)), z)
    return z


def refine_batch(objective, starts, steps, initial_step=1.0, constraint=None):
    """Derivative-free pattern search from several starts at once.

    Each sweep tries, for every coordinate, a radial move in the
    boundary-gap coordinate ``s = -log(1 - |z_k|)`` and an angular move, both
    of size ``h``; the best improving move is taken per start, otherwise that
    start's ``h`` halves. ``objective`` maps an ``(N, n)`` batch to ``N``
    reals. ``constraint``, if given, maps a batch to a boolean mask of
    admissible points; inadmissible candidates are never accepted.

    Returns
    -------
    points : ndarray (S, n)
    values : ndarray (S,)
    """
    z = _clip_interior(as_batch(starts).copy())
    vals = np.asarray(objective(z), dtype=float)
    if steps <= 0:
        return z, vals
    n_starts, n = z.shape
    h = np.full(n_starts, float(initial_step))
    s_max = -np.log1p(-INTERIOR_CAP)
    # 4 moves per coordinate: +/- radial, +/- angular
    n_moves = 4 * n
    for _ in range(steps):
        active = h > 1e-9
        if not np.any(active):
            break
        za = z[active]
        ha = h[active]
        mod = np.abs(za)
        arg = np.angle(za)
        s = -np.log1p(-mod)
        cand = np.repeat(za[:, None, :], n_moves, axis=1)
        for k in range(n):
            for sign_i, sign in enumerate((1.0, -1.0)):
                s_new = np.clip(s[:, k] + sign * ha, 0.0, s_max)
                r_new = -np.expm1(-s_new)
                cand[:, 4 * k + sign_i, k] = r_new * np.exp(1j * arg[:, k])
                cand[:, 4 * k + 2 + sign_i, k] = mod[:, k] * np.exp(
                    1j * (arg[:, k] + sign * ha)
                )
        flat = _clip_interior(cand.reshape(-1, n))
        cv = np.asarray(objective(flat), dtype=float)
        if constraint is not None:
            cv = np.where(constraint(flat), cv, -np.inf)
        cv = np.where(np.isnan(cv), -np.inf, cv).reshape(-1, n_moves)
        best = cv.argmax(axis=1)
        best_val = cv[np.arange(cv.shape[0]), best]
        improved = best_val > vals[active]
        rows = np.flatnonzero(active)
        up = rows[improved]
        z[up] = flat.reshape(-1, n_moves, n)[improved, best[improved]]
        vals[up] = best_val[improved]
        h[rows[~improved]] *= 0.5
    return z, vals


def refine_local(objective, start, steps):
    """Hill-climb ``objective`` from ``start`` for ``steps`` sweeps.

    Returns ``(PolydiscPoint, value)`` with ``value >= objective(start)``.
    ``objective`` must accept a batch ``(N, n)`` and return ``N`` reals.
    """
    z, vals = refine_batch(objective, as_batch(start), steps)
    return PolydiscPoint(z[0]), float(vals[0])
