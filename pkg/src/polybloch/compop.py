"""Composition operators ``C_phi: B^p -> B^q`` on U^n.

The boundedness functional

    B(z) = sum_{k,l} |d phi_l/d z_k (z)| (1-|z_k|^2)^q / (1-|phi_l(z)|^2)^p

decides boundedness through its global supremum and compactness through
its boundary limit ``L = lim_{delta->0} sup{B(z): dist(phi(z), dU^n) < delta}``;
the essential norm lies in ``[L/n, 2L]``.
"""

from dataclasses import asdict, dataclass, field
import itertools
import math

import numpy as np

from . import kernels
from .blochnorm import (
    INCONCLUSIVE,
    MEMBER,
    NON_MEMBER,
    STILL_GROWING,
    BlochParams,
    NormEstimate,
    bloch_norm,
    estimate_sup,
    growth_flag,
    membership_little,
    membership_little_star,
)
from .holo import Composed, monomial_family, test_fn_fw
from .polydisc import PolydiscPoint, SampleBudget, as_batch, boundary_dist, refine_batch, sample_stratified

VANISHING = "vanishing"
POSITIVE_LIMIT = "positive_limit"
GROWING = "growing"
EMPTY_REGION = "empty_region"

LIKELY = "likely"
UNLIKELY = "unlikely"
NECESSARY_ONLY = "criterion necessary-only"

SPARSE_BIN = 32
TREND_SLOPE_TOL = 1e-2
COMPACT_TOL = 1e-3
UNBOUNDED_RATIO = 1.25

DEFAULT_SCHEDULE = tuple(2.0**-j for j in range(1, 13))


def functional_B(phi, z, params):
    """The boundedness functional at one point (float) or a batch (array).

    Points whose image touches the unit circle in some coordinate give
    ``+inf``.
    """
    batch = as_batch(z)
    if np.any(np.abs(batch) >= 1.0):
        from .polydisc import DomainError

        raise DomainError("functional_B needs interior points")
    out = _functional(phi, batch, params)
    return float(out[0]) if isinstance(z, PolydiscPoint) or np.ndim(z) <= 1 else out


def _functional(phi, z, params):
    w, jac = phi.values_and_jacobian(z)
    return kernels.functional_b(z, w, jac, params.p, params.q)


def sup_B(phi, params, budget=None):
    """Sampled supremum of the functional. ``still_growing`` suggests an
    unbounded operator."""
    budget = budget or SampleBudget()
    n = phi.n
    origin = np.zeros((1, n), dtype=np.complex128)
    best, witness, shell_max = estimate_sup(
        lambda z: _functional(phi, z, params), n, budget, extra_points=origin
    )
    flag, _ = growth_flag(shell_max)
    if not math.isfinite(best):
        flag = STILL_GROWING
    return NormEstimate(
        value=best,
        witness=PolydiscPoint(witness),
        origin_term=0.0,
        shells_used=budget.shell_count,
        convergence_flag=flag,
        shell_maxima=shell_max,
    )


@dataclass(frozen=True)
class ProfileEntry:
    delta: float
    sup: float
    samples: int
    sparse: bool


@dataclass(frozen=True)
class BoundaryProfile:
    """``S(delta_j)`` on nested regions ``{z: dist(phi(z), dU^n) < delta_j}``.

    Regions that are provably empty (the image stays ``delta`` away from the
    boundary) get ``S = 0``. ``truncated`` marks a profile cut short because
    the sample ran out of points in a nonempty region.
    """

    entries: tuple
    L_estimate: float
    trend: str
    truncated: bool = False

    def to_csv(self):
        lines = ["delta,sup,samples"]
        for e in self.entries:
            lines.append(f"{e.delta!r},{e.sup!r},{e.samples}")
        return "\n".join(lines) + "\n"

    def to_doc(self):
        return {
            "entries": [asdict(e) for e in self.entries],
            "L_estimate": self.L_estimate,
            "trend": self.trend,
            "truncated": self.truncated,
        }


def _master_sample(n, budget):
    deep = SampleBudget(
        shell_count=max(budget.shell_count, 16),
        angular_samples_per_shell=4 * budget.angular_samples_per_shell,
        refinement_steps=budget.refinement_steps,
        seed=budget.seed,
    )
    return sample_stratified(n, deep)


def classify_trend(sups):
    """Least-squares slope of the last three ``log S`` values per step."""
    tail = np.asarray(sups[-3:], dtype=float)
    if tail.size == 0:
        return EMPTY_REGION
    if np.any(tail <= 0):
        return VANISHING
    if tail.size == 1:
        return POSITIVE_LIMIT
    x = np.arange(tail.size, dtype=float)
    slope = np.polyfit(x, np.log(tail), 1)[0]
    if slope < -TREND_SLOPE_TOL:
        return VANISHING
    if slope > TREND_SLOPE_TOL:
        return GROWING
    return POSITIVE_LIMIT


def boundary_profile(phi, params, schedule=DEFAULT_SCHEDULE, budget=None, refine_top=4):
    """Boundary profile of the functional by forward binning of a master sample.

    Candidates are points ``z`` with their image gap ``d = dist(phi(z), dU^n)``;
    the best few in each bin are refined under the constraint ``d < delta_j``.
    ``S_j`` is the max over all candidates with ``d < delta_j``, so the
    profile is nonincreasing by construction.
    """
    budget = budget or SampleBudget()
    schedule = tuple(float(d) for d in schedule)
    if any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("delta schedule must be strictly decreasing")
    if not all(0 < d < 1 for d in schedule):
        raise ValueError("delta values must lie in (0, 1)")

    def objective(z):
        return _functional(phi, z, params)

    z = _master_sample(phi.n, budget)
    vals = objective(z)
    gaps = _image_gap(phi, z)

    cand_z = [z]
    cand_v = [vals]
    cand_g = [gaps]
    for j, delta in enumerate(schedule):
        lo = schedule[j + 1] if j + 1 < len(schedule) else 0.0
        in_bin = np.flatnonzero((gaps < delta) & (gaps >= lo))
        if in_bin.size == 0 or budget.refinement_steps == 0:
            continue
        top = in_bin[np.argsort(vals[in_bin])[::-1][:refine_top]]
        pts, pv = refine_batch(
            objective, z[top], budget.refinement_steps, initial_step=0.25,
            constraint=lambda zz, d=delta: _image_gap(phi, zz) < d,
        )
        cand_z.append(pts)
        cand_v.append(pv)
        cand_g.append(_image_gap(phi, pts))
    all_v = np.concatenate(cand_v)
    all_g = np.concatenate(cand_g)

    # by the maximum principle sup |phi_l| over U^n is its max on the torus
    reach = 1.0 - image_sup_modulus(phi)
    entries = []
    truncated = False
    for delta in schedule:
        mask = all_g < delta
        count = int(np.count_nonzero(mask))
        if count == 0:
            if reach < delta * (1.0 - 1e-9):
                truncated = True
                break
            entries.append(ProfileEntry(delta, 0.0, 0, True))
            continue
        entries.append(ProfileEntry(delta, float(all_v[mask].max()), count, count < SPARSE_BIN))
    if not entries:
        return BoundaryProfile((), 0.0, EMPTY_REGION, truncated)
    if entries[-1].samples == 0:
        return BoundaryProfile(tuple(entries), 0.0, EMPTY_REGION, truncated)
    sups = [e.sup for e in entries]
    return BoundaryProfile(tuple(entries), sups[-1], classify_trend(sups), truncated)


def image_sup_modulus(phi):
    """``max_l sup_z |phi_l(z)|`` from the map's torus certificate."""
    cert = phi.certificate
    if cert is None:
        cert = phi._certify()
    return max(cert.torus_max, cert.max_modulus)


def _image_gap(phi, z):
    w = phi.values(z)
    return 1.0 - np.minimum(np.abs(w), 1.0).max(axis=1)


@dataclass(frozen=True)
class EssentialNormBracket:
    lower: float
    upper: float

    def __post_init__(self):
        if not 0.0 <= self.lower <= self.upper:
            raise ValueError("bracket needs 0 <= lower <= upper")


def essential_norm_bracket(profile, n):
    """``[L/n, 2L]`` from a boundary profile."""
    L = float(profile.L_estimate)
    return EssentialNormBracket(L / n, 2.0 * L)


def boundedness_verdict(estimate):
    """``likely`` / ``unlikely`` / ``inconclusive`` from a :func:`sup_B` estimate."""
    if not math.isfinite(estimate.value):
        return UNLIKELY
    _, ratio = growth_flag(estimate.shell_maxima)
    if estimate.convergence_flag == STILL_GROWING:
        return UNLIKELY if ratio > UNBOUNDED_RATIO else INCONCLUSIVE
    return LIKELY


def compactness_verdict(profile, bounded):
    if bounded == UNLIKELY:
        return UNLIKELY
    small = profile.L_estimate < COMPACT_TOL
    if small and profile.trend in (VANISHING, EMPTY_REGION):
        return LIKELY if bounded == LIKELY else INCONCLUSIVE
    if not small and profile.trend in (POSITIVE_LIMIT, GROWING):
        return UNLIKELY
    return INCONCLUSIVE


def _and(*verdicts):
    if any(v == UNLIKELY for v in verdicts):
        return UNLIKELY
    if all(v == LIKELY for v in verdicts):
        return LIKELY
    return INCONCLUSIVE


def _member_to_verdict(v):
    return {MEMBER: LIKELY, NON_MEMBER: UNLIKELY}.get(v, INCONCLUSIVE)


@dataclass
class ClassificationReport:
    params: BlochParams
    bounded: str
    sup_estimate: NormEstimate
    compact: str
    profile: BoundaryProfile
    bracket: EssentialNormBracket | None
    star_membership: list
    little_membership: list
    space_pairs: dict
    thresholds: dict
    self_map: dict

    def to_doc(self):
        return {
            "p": self.params.p,
            "q": self.params.q,
            "bounded": {
                "verdict": self.bounded,
                "sup_estimate": self.sup_estimate.value,
                "convergence_flag": self.sup_estimate.convergence_flag,
                "witness": [[float(c.real), float(c.imag)] for c in self.sup_estimate.witness.coords],
            },
            "compact": {
                "verdict": self.compact,
                "L_estimate": self.profile.L_estimate,
                "trend": self.profile.trend,
            },
            "bracket": None if self.bracket is None else {
                "lower": self.bracket.lower, "upper": self.bracket.upper,
            },
            "profile": self.profile.to_doc(),
            "component_star_membership": self.star_membership,
            "power_little_membership": self.little_membership,
            "space_pairs": self.space_pairs,
            "thresholds": self.thresholds,
            "self_map": self.self_map,
        }


def multi_indices(n, degree_cap):
    """All multi-indices with ``1 <= |gamma| <= degree_cap`` in graded order."""
    out = []
    for total in range(1, degree_cap + 1):
        for gamma in itertools.product(range(total + 1), repeat=n):
            if sum(gamma) == total:
                out.append(gamma)
    return out


def classify(phi, params, budget=None, schedule=DEFAULT_SCHEDULE, degree_cap=4):
    """Boundedness and compactness of ``C_phi`` on every space pair.

    Verdicts are ``likely``, ``unlikely`` or ``inconclusive``; the pairs
    whose sufficiency is open are marked ``criterion necessary-only``.
    """
    budget = budget or SampleBudget()
    est = sup_B(phi, params, budget)
    bounded = boundedness_verdict(est)
    profile = boundary_profile(phi, params, schedule, budget)
    compact = compactness_verdict(profile, bounded)
    bracket = essential_norm_bracket(profile, phi.n) if bounded != UNLIKELY else None

    star = []
    for l, comp in enumerate(phi.components):
        little = membership_little(comp, params.q)
        verdict, prof = membership_little_star(comp, params.q, seed=budget.seed)
        # B_0 is contained in B_{0*}
        inferred = MEMBER if little.verdict == MEMBER else verdict
        star.append({
            "component": l + 1,
            "numeric_verdict": verdict,
            "verdict": inferred,
            "final_sup": prof.sups[-1],
            "final_gap": prof.etas[-1],
        })
    powers = []
    for gamma in multi_indices(phi.n, degree_cap):
        res = membership_little(phi.power(gamma), params.q)
        powers.append({"multi_index": list(gamma), "verdict": res.verdict, "reason": res.reason})

    star_ok = _member_to_verdict(
        NON_MEMBER if any(s["verdict"] == NON_MEMBER for s in star)
        else MEMBER if all(s["verdict"] == MEMBER for s in star) else INCONCLUSIVE
    )
    little_ok = _member_to_verdict(
        NON_MEMBER if any(g["verdict"] == NON_MEMBER for g in powers)
        else MEMBER if all(g["verdict"] == MEMBER for g in powers) else INCONCLUSIVE
    )
    cond4 = compactness_verdict(profile, LIKELY)
    pairs = {
        "B^p -> B^q": {"bounded": bounded, "compact": compact},
        "B^p_0* -> B^q_0*": {
            "bounded": _and(bounded, star_ok),
            "compact": _and(bounded, star_ok, cond4),
        },
        "B^p_0 -> B^q_0": {
            "bounded": _and(bounded, little_ok),
            "compact": _and(bounded, little_ok, cond4),
            "degree_cap": degree_cap,
        },
        "B^p -> B^q_0*": {"bounded": NECESSARY_ONLY, "compact": NECESSARY_ONLY},
        "B^p -> B^q_0": {"bounded": NECESSARY_ONLY, "compact": NECESSARY_ONLY},
        "B^p_0* -> B^q_0": {"bounded": NECESSARY_ONLY, "compact": NECESSARY_ONLY},
    }
    cert = phi.certificate
    return ClassificationReport(
        params=params,
        bounded=bounded,
        sup_estimate=est,
        compact=compact,
        profile=profile,
        bracket=bracket,
        star_membership=star,
        little_membership=powers,
        space_pairs=pairs,
        thresholds={
            "shell_growth": 0.01,
            "unbounded_ratio": UNBOUNDED_RATIO,
            "compact_L": COMPACT_TOL,
            "trend_slope": TREND_SLOPE_TOL,
            "star_member": 1e-2,
            "star_non_member": 5e-2,
        },
        self_map=None if cert is None else {
            "max_modulus": cert.max_modulus,
            "torus_max": cert.torus_max,
            "sample_size": cert.sample_size,
            "is_self_map": cert.is_self_map,
        },
    )


def family_members(family, params, n, m_values=None, w_grid=None, budget=None):
    """Unit-norm test functions in ``B^p``: normalised monomials in every
    axis, or ``f_w`` divided by its estimated norm."""
    if family == "monomials":
        m_values = m_values or [2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64, 100, 128, 200]
        return [monomial_family(m, params.p, axis, n) for axis in range(n) for m in m_values]
    if family == "fw_grid":
        w_grid = w_grid if w_grid is not None else [
            r * np.exp(2j * np.pi * k / 8) for r in (0.0, 0.5, 0.9, 0.99) for k in range(8)
        ]
        out = []
        for axis in range(n):
            for w in w_grid:
                f = test_fn_fw(w, axis, params.p, n)
                out.append(f * (1.0 / bloch_norm(f, params.p, budget).value))
        return out
    raise ValueError(f"unknown test family {family!r}")


def family_norms(phi, params, members, budget=None):
    """``||f o phi||_q`` for each member."""
    return [bloch_norm(Composed(f, phi), params.q, budget).value for f in members]


def empirical_opnorm_lower(phi, params, family="monomials", budget=None, **kwargs):
    """``max ||f o phi||_q`` over a unit-norm test family; a lower bound for
    ``||C_phi||`` up to estimator error."""
    members = family_members(family, params, phi.n, budget=budget, **kwargs)
    if not members:
        raise ValueError("test family is empty")
    return max(family_norms(phi, params, members, budget))
