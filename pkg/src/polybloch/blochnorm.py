"""p-Bloch norms on U^n: sampled estimates, closed forms, membership tests.

``||f||_p = |f(0)| + sup_z sum_k |df/dz_k(z)| (1 - |z_k|^2)^p``.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import kernels
from .holo import Dilated, LogPrim, Monomial, MultiPoly, PowPrim, Scaled, Sum, Composed, taylor_tail
from .polydisc import (
    PolydiscPoint,
    SampleBudget,
    _halton,
    as_batch,
    refine_batch,
    sample_stratified,
    star_boundary_gap,
)

SATURATED = "saturated"
STILL_GROWING = "still_growing"

MEMBER = "member"
NON_MEMBER = "non_member"
INCONCLUSIVE = "inconclusive"

# relative growth over the last two shells that counts as "still growing"
GROWTH_THRESHOLD = 0.01
# number of best samples polished by local search, besides the per-shell bests
TOP_CANDIDATES = 8

STAR_MEMBER_TOL = 1e-2
STAR_NON_MEMBER_TOL = 5e-2


class EvaluationError(RuntimeError):
    """An objective failed on a sample; ``sample`` holds the offending point."""

    def __init__(self, message, sample):
        super().__init__(f"{message} (at sample {sample!r})")
        self.sample = sample


@dataclass(frozen=True)
class BlochParams:
    """Source exponent ``p`` and target exponent ``q``."""

    p: float
    q: float

    def __post_init__(self):
        for name in ("p", "q"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a finite positive number, got {v!r}")


@dataclass(frozen=True)
class NormEstimate:
    """Sampled lower estimate of a supremum (plus the origin term for norms)."""

    value: float
    witness: PolydiscPoint
    origin_term: float
    shells_used: int
    convergence_flag: str
    shell_maxima: tuple = field(default=(), repr=False)

    @property
    def seminorm(self):
        return self.value - self.origin_term

    def to_record(self):
        rec = {
            "value": self.value,
            "origin_term": self.origin_term,
            "shells_used": self.shells_used,
            "convergence_flag": self.convergence_flag,
        }
        for k, c in enumerate(self.witness.coords, start=1):
            rec[f"witness_{k}_re"] = float(c.real)
            rec[f"witness_{k}_im"] = float(c.imag)
        return rec


def seminorm_integrand(f, z, p):
    """``sum_k |df/dz_k(z)| (1 - |z_k|^2)^p``; a batch gives one value per row."""
    batch = as_batch(z)
    if np.any(np.abs(batch) >= 1.0):
        from .polydisc import DomainError

        raise DomainError("seminorm integrand needs interior points")
    out = kernels.weighted_grad_sum(f.grads(batch), batch, p)
    return float(out[0]) if np.ndim(z) <= 1 or isinstance(z, PolydiscPoint) else out


def _safe_eval(objective, z):
    try:
        return np.asarray(objective(z), dtype=float)
    except (ValueError, ArithmeticError) as exc:
        for row in z:
            try:
                objective(row[None, :])
            except (ValueError, ArithmeticError):
                raise EvaluationError(str(exc), row) from exc
        raise


def growth_flag(shell_maxima):
    """``still_growing`` when the running max rose by > 1% over the last two shells."""
    run = np.maximum.accumulate(np.asarray(shell_maxima, dtype=float))
    if run.size < 2:
        return SATURATED, 1.0
    base = run[-3] if run.size >= 3 else run[0]
    last = run[-1]
    if not np.isfinite(last):
        return STILL_GROWING, math.inf
    if base <= 0:
        return (STILL_GROWING, math.inf) if last > 0 else (SATURATED, 1.0)
    ratio = last / base
    return (STILL_GROWING if ratio - 1.0 > GROWTH_THRESHOLD else SATURATED), float(ratio)


def estimate_sup(objective, n, budget, extra_points=None):
    """Maximise a batch objective over U^n: stratified shells, then local polish.

    Returns ``(value, witness, shell_maxima)``. ``extra_points`` (for example
    the origin) are evaluated alongside the first shell.
    """
    z = sample_stratified(n, budget)
    vals = _safe_eval(objective, z)
    vals = np.where(np.isnan(vals), -np.inf, vals)
    per_shell = vals.reshape(budget.shell_count, -1)
    shell_max = per_shell.max(axis=1)
    starts = [z[np.argsort(vals)[::-1][:TOP_CANDIDATES]]]
    offsets = np.arange(budget.shell_count) * per_shell.shape[1]
    starts.append(z[offsets + per_shell.argmax(axis=1)])
    if extra_points is not None:
        extra = as_batch(extra_points)
        ev = _safe_eval(objective, extra)
        shell_max[0] = max(shell_max[0], float(np.nanmax(ev)))
        starts.append(extra)
    starts = np.unique(np.concatenate(starts), axis=0)
    pts, pv = refine_batch(objective, starts, budget.refinement_steps)
    pv = np.where(np.isnan(pv), -np.inf, pv)
    best = int(np.argmax(pv))
    return float(pv[best]), pts[best], tuple(float(s) for s in shell_max)


def bloch_norm(f, p, budget=None):
    """Estimate ``||f||_p`` (a lower bound; see ``convergence_flag``)."""
    budget = budget or SampleBudget()
    n = f.n
    origin = np.zeros((1, n), dtype=np.complex128)
    origin_term = float(abs(f.values(origin)[0]))

    def objective(z):
        return kernels.weighted_grad_sum(f.grads(z), z, p)

    best, witness, shell_max = estimate_sup(objective, n, budget, extra_points=origin)
    flag, _ = growth_flag(shell_max)
    return NormEstimate(
        value=origin_term + best,
        witness=PolydiscPoint(witness),
        origin_term=origin_term,
        shells_used=budget.shell_count,
        convergence_flag=flag,
        shell_maxima=shell_max,
    )


def exact_monomial_norm(m, p):
    """``||m^{p-1} z_1^m||_p``, the maximum of ``m^p (1-x^2)^p x^{m-1}`` on [0, 1]."""
    if m < 2:
        raise ValueError("m must be >= 2")
    m = float(m)
    a = 2.0 * p + m - 1.0
    log_val = p * math.log(2.0 * p / a) + p * math.log(m) + 0.5 * (m - 1.0) * math.log1p(-2.0 * p / a)
    return math.exp(log_val)


def monomial_norm_limit(p):
    """``(2p/e)^p``, the limit of :func:`exact_monomial_norm` as ``m -> inf``."""
    return (2.0 * p / math.e) ** p


def monomial_peak_radius(m, p):
    """``sqrt((m-1)/(2p+m-1))``, where the monomial integrand peaks (inner radius of A_m)."""
    return math.sqrt((m - 1.0) / (2.0 * p + m - 1.0))


def c_m(m, p):
    """Minimum over the annulus ``r_m <= |z_1| <= r_{m+1}`` of the normalised
    monomial integrand.

    The integrand decreases past its peak ``r_m``, so the minimum sits at
    ``r_{m+1}`` and equals
    ``((2p+m-1)/(2p+m))^p * (m(2p+m-1) / ((m-1)(2p+m)))^{(m-1)/2}``.
    """
    if m < 2:
        raise ValueError("m must be >= 2")
    m = float(m)
    a, b = 2.0 * p + m - 1.0, 2.0 * p + m
    # m a / ((m-1) b) = 1 + 2p / ((m-1) b)
    return math.exp(p * math.log(a / b) + 0.5 * (m - 1.0) * math.log1p(2.0 * p / ((m - 1.0) * b)))


def c_m_displayed(m, p):
    """The closed form as usually printed, with the first factor not raised to
    ``p``. Agrees with :func:`c_m` only at ``p = 1``; both tend to 1."""
    m = float(m)
    a, b = 2.0 * p + m - 1.0, 2.0 * p + m
    return (a / b) * math.exp(0.5 * (m - 1.0) * math.log1p(2.0 * p / ((m - 1.0) * b)))


@dataclass(frozen=True)
class StarProfile:
    """``T(eta)``: sup of the integrand over points with star gap < eta."""

    etas: tuple
    sups: tuple
    sample_counts: tuple


def little_star_sup(f, p, eta, samples=512, refine_steps=40, seed=0):
    """Sampled ``sup`` of the integrand over ``{max_k (1-|z_k|) < eta}``."""
    n = f.n
    u = _halton(2 * n, samples, seed)
    gaps = eta * np.maximum(u[:, n:], 1e-3)
    z = (1.0 - gaps) * np.exp(2j * np.pi * u[:, :n])

    def objective(zz):
        return kernels.weighted_grad_sum(f.grads(zz), zz, p)

    vals = objective(z)
    top = z[np.argsort(vals)[::-1][:4]]
    _, pv = refine_batch(
        objective, top, refine_steps, initial_step=0.25,
        constraint=lambda zz: star_boundary_gap(zz) < eta,
    )
    return float(max(vals.max(), pv.max()))


def membership_little_star(f, p, schedule=None, samples=512, seed=0):
    """Numerical test of ``f in B^p_{0*}``.

    Returns ``(verdict, StarProfile)``. ``member`` when the last ``T`` is
    below 1e-2 and the profile is nonincreasing over its last three entries,
    ``non_member`` when the last three stay above 5e-2 without halving,
    ``inconclusive`` otherwise.
    """
    if schedule is None:
        schedule = [2.0**-i for i in range(1, 14)]
    schedule = [float(e) for e in schedule]
    if any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("gap schedule must be strictly decreasing")
    sups = [little_star_sup(f, p, eta, samples=samples, seed=seed) for eta in schedule]
    profile = StarProfile(tuple(schedule), tuple(sups), (samples,) * len(schedule))
    return star_verdict(sups), profile


def star_verdict(sups):
    tail = list(sups[-3:])
    if tail[-1] < STAR_MEMBER_TOL and all(b <= a * (1 + 1e-9) + 1e-15 for a, b in zip(tail, tail[1:])):
        return MEMBER
    if min(tail) > STAR_NON_MEMBER_TOL and tail[-1] > 0.5 * tail[0]:
        return NON_MEMBER
    return INCONCLUSIVE


@dataclass(frozen=True)
class MembershipResult:
    verdict: str
    reason: str
    certificate: dict = field(default_factory=dict)


def membership_little(f, p, tail_tol=1e-6, max_terms=100_000):
    """Decide ``f in B^p_0`` (closure of polynomials) structurally.

    Polynomials are members by definition; the primitives ``f_w`` via the
    tail bound of their power series; dilations ``K_m f`` always; sums and
    scalings from their parts. Anything else is ``inconclusive``.
    """
    if isinstance(f, (MultiPoly, Monomial)):
        return MembershipResult(MEMBER, "polynomial")
    if isinstance(f, Composed) and isinstance(f.outer, (MultiPoly, Monomial)):
        return MembershipResult(MEMBER, "polynomial composed with a polynomial map")
    if isinstance(f, (PowPrim, LogPrim)):
        fp = 1.0 if isinstance(f, LogPrim) else f.p
        N = 0
        tail = taylor_tail(f.w, fp, N)
        while tail >= tail_tol and N < max_terms:
            N = max(2 * N, 8)
            tail = taylor_tail(f.w, fp, N)
        if tail < tail_tol:
            # bisect down to the smallest N meeting the tolerance
            lo, hi = N // 2, N
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if taylor_tail(f.w, fp, mid) < tail_tol:
                    hi = mid
                else:
                    lo = mid
            return MembershipResult(
                MEMBER, "power-series truncation",
                {"truncation_degree": hi + 1, "tail_bound": taylor_tail(f.w, fp, hi)},
            )
        return MembershipResult(INCONCLUSIVE, "tail bound did not reach tolerance", {"tail_bound": tail})
    if isinstance(f, Dilated):
        return MembershipResult(MEMBER, "dilation of a holomorphic function")
    if isinstance(f, Scaled):
        return membership_little(f.inner, p, tail_tol, max_terms)
    if isinstance(f, Sum):
        parts = [membership_little(g, p, tail_tol, max_terms) for g in f.parts]
        if all(r.verdict == MEMBER for r in parts):
            return MembershipResult(MEMBER, "sum of members")
        return MembershipResult(INCONCLUSIVE, "sum with undecided parts")
    return MembershipResult(INCONCLUSIVE, f"no rule for {type(f).__name__}")
