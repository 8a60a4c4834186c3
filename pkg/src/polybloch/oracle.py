"""Brute-force oracles and inequality verification suites.

Nothing here goes through the stratified sampler or the local search; the
oracles are exhaustive tensor grids and a golden-section search, so they
can be used to check the estimators.
"""

from dataclasses import asdict, dataclass, field
import hashlib
import json
import math

import numpy as np

from . import kernels
from .blochnorm import (
    BlochParams,
    bloch_norm,
    c_m,
    exact_monomial_norm,
    monomial_norm_limit,
    monomial_peak_radius,
)
from .holo import MultiPoly, PolyMap, dilate_Km, monomial_family, test_fn_fw
from .polydisc import SampleBudget

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
RADIUS_MAX = 1.0 - 1e-4
DEFAULT_GRID = {1: (512, 256), 2: (96, 64)}
INEQ_SLACK = 1e-3


@dataclass
class VerificationReport:
    """Outcome of one verification case.

    ``margin`` is ``claimed_bound - measured_extremum`` at the tightest
    trial (negative means violated).
    """

    case_id: str
    inputs_digest: str
    claimed_bound: float
    measured_extremum: float
    margin: float
    passed: bool
    sample_count: int
    trials: int = 1
    violations: int = 0
    details: dict = field(default_factory=dict)

    def to_doc(self):
        return asdict(self)


def digest(inputs):
    blob = json.dumps(inputs, sort_keys=True, default=repr).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def grid_radii(count, r_max=RADIUS_MAX):
    """``count`` radii in ``[0, r_max]``: half linear up to 0.9, half with
    geometrically shrinking gaps down to ``1 - r_max``."""
    n_lin = count - count // 2
    lin = np.linspace(0.0, 0.9, n_lin, endpoint=False)
    geo = 1.0 - np.geomspace(0.1, 1.0 - r_max, count // 2)
    return np.concatenate([lin, geo])


def dense_grid_sup(objective, n, radial=None, angular=None, r_max=RADIUS_MAX, chunk=1 << 16):
    """Exhaustive tensor-grid maximum of a batch objective over U^n (n <= 2).

    Returns ``(value, witness)``.
    """
    if n not in (1, 2):
        raise ValueError("dense grid oracle supports n = 1 or 2 only")
    d_rad, d_ang = DEFAULT_GRID[n]
    radial = radial or d_rad
    angular = angular or d_ang
    r = grid_radii(radial, r_max)
    theta = 2.0 * np.pi * np.arange(angular) / angular
    disc = (r[:, None] * np.exp(1j * theta[None, :])).ravel()
    if n == 1:
        pts = disc[:, None]
        vals = np.asarray(objective(pts), dtype=float)
        i = int(np.argmax(vals))
        return float(vals[i]), pts[i].copy()
    best, witness = -np.inf, None
    rows = max(1, chunk // disc.size)
    for start in range(0, disc.size, rows):
        z1 = disc[start:start + rows]
        pts = np.empty((z1.size * disc.size, 2), dtype=np.complex128)
        pts[:, 0] = np.repeat(z1, disc.size)
        pts[:, 1] = np.tile(disc, z1.size)
        vals = np.asarray(objective(pts), dtype=float)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, witness = float(vals[i]), pts[i].copy()
    return best, witness


def torus_grid_max(objective, n, radius, angular=None):
    """Max of a batch objective on the torus ``|z_k| = radius`` (n <= 2)."""
    angular = angular or (4096 if n == 1 else 256)
    theta = 2.0 * np.pi * np.arange(angular) / angular
    circle = radius * np.exp(1j * theta)
    if n == 1:
        pts = circle[:, None]
    elif n == 2:
        pts = np.stack([np.repeat(circle, angular), np.tile(circle, angular)], axis=1)
    else:
        raise ValueError("torus grid supports n = 1 or 2 only")
    return float(np.max(objective(pts)))


def golden_section_max(f, a, b, tol=1e-14):
    """Maximise a unimodal scalar function on ``[a, b]``; returns ``(x, f(x))``."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def monomial_profile(m, p):
    """``x -> m^p (1-x^2)^p x^{m-1}`` evaluated in log space."""

    def g(x):
        if x <= 0.0 or x >= 1.0:
            return 0.0
        return math.exp(p * math.log(m) + p * math.log1p(-x * x) + (m - 1) * math.log(x))

    return g


def monomial_norm_by_search(m, p):
    """Independent value of the monomial norm via golden-section search."""
    return golden_section_max(monomial_profile(m, p), 0.0, 1.0)[1]


def integrand_objective(f, p):
    return lambda z: kernels.weighted_grad_sum(f.grads(z), z, p)


def lemma1_bounds(f0, norm, z, p, n):
    """Growth bounds for ``|f(z)|`` given ``|f(0)|`` and ``||f||_p``.

    Returns a dict of named bounds (one per ``z`` row); for ``p = 1`` both
    the stated constant and the constant from the integral estimate.
    """
    x2 = np.abs(z) ** 2
    if p < 1:
        return {"statement": f0 + n / (1.0 - p) * norm * np.ones(z.shape[0])}
    if p == 1:
        return {
            "statement": (1.0 + 1.0 / (n * math.log(2.0))) * np.log(2.0 / (1.0 - x2)).sum(axis=1) * norm,
            "proof": (0.5 + 1.0 / (2.0 * n * math.log(2.0))) * np.log(4.0 / (1.0 - x2)).sum(axis=1) * norm,
        }
    const = 1.0 / n + 2.0 ** (p - 1.0) / (p - 1.0)
    return {"statement": const * ((1.0 - x2) ** (1.0 - p)).sum(axis=1) * norm}


def random_polynomial(rng, n, max_degree, max_terms=5):
    terms = {}
    for _ in range(int(rng.integers(1, max_terms + 1))):
        total = int(rng.integers(0, max_degree + 1))
        cut = np.sort(rng.integers(0, total + 1, size=n - 1))
        gamma = np.diff(np.concatenate([[0], cut, [total]]))
        terms[tuple(int(g) for g in gamma)] = complex(rng.normal(), rng.normal())
    return MultiPoly(n, terms)


def random_interior_points(rng, count, n):
    """Boundary-weighted interior points: gaps ``10^-U(0, 6)`` or uniform moduli."""
    gaps = 10.0 ** -rng.uniform(0.0, 6.0, size=(count, n))
    mod = np.where(rng.random((count, n)) < 0.5, 1.0 - gaps, rng.random((count, n)))
    return mod * np.exp(2j * np.pi * rng.random((count, n)))


def verify_lemma1(p, n, trials=1000, seed=0, family="random", budget=None, points_per_function=10):
    """Pointwise growth bounds on ``trials`` random ``(f, z)`` pairs.

    ``family="random"`` uses random polynomials with estimated norms (an
    estimate is a lower bound, so the check is strict up to
    ``INEQ_SLACK``); ``family="monomial"`` uses the normalised monomials
    whose norm is exactly 1.
    """
    rng = np.random.default_rng(seed)
    budget = budget or SampleBudget(shell_count=12, angular_samples_per_shell=128, refinement_steps=100, seed=seed)
    n_funcs = max(1, trials // points_per_function)
    worst = {"margin": math.inf}
    violations = {}
    count = 0
    for i in range(n_funcs):
        if family == "monomial":
            m = int(rng.integers(2, 200))
            f = monomial_family(m, p, int(rng.integers(0, n)), n)
            norm = 1.0
        else:
            f = random_polynomial(rng, n, max_degree=4)
            norm = bloch_norm(f, p, budget).value
        z = random_interior_points(rng, points_per_function, n)
        fz = np.abs(f.values(z))
        f0 = abs(f.values(np.zeros((1, n)))[0])
        for name, bound in lemma1_bounds(f0, norm, z, p, n).items():
            allowed = bound * (1.0 + INEQ_SLACK)
            bad = fz > allowed
            violations[name] = violations.get(name, 0) + int(bad.sum())
            if name == "statement":
                j = int(np.argmin(bound - fz))
                if bound[j] - fz[j] < worst["margin"]:
                    worst = {"margin": float(bound[j] - fz[j]), "bound": float(bound[j]), "value": float(fz[j])}
        count += z.shape[0]
    total = violations["statement"]
    return VerificationReport(
        case_id=f"lemma1/{family}/p={p}/n={n}",
        inputs_digest=digest({"p": p, "n": n, "trials": trials, "seed": seed, "family": family}),
        claimed_bound=worst["bound"],
        measured_extremum=worst["value"],
        margin=worst["margin"],
        passed=all(v == 0 for v in violations.values()),
        sample_count=count,
        trials=count,
        violations=total,
        details={"violations_by_form": violations},
    )


def default_w_grid():
    """25 points: the origin and 4 radii (up to 0.99) x 6 directions."""
    return [0j] + [r * np.exp(2j * np.pi * k / 6) for r in (0.25, 0.5, 0.9, 0.99) for k in range(6)]


def verify_lemma2_bound(p, w_grid=None, radial=2048, angular=256):
    """Grid sup of the ``f_w`` integrand against ``2^p`` for every ``w``."""
    w_grid = default_w_grid() if w_grid is None else list(w_grid)
    bound = 2.0**p
    sups = []
    for w in w_grid:
        f = test_fn_fw(w, 0, p, 1)
        value, _ = dense_grid_sup(integrand_objective(f, p), 1, radial, angular)
        sups.append(value)
    j = int(np.argmax(sups))
    margins = [bound - s for s in sups]
    return VerificationReport(
        case_id=f"lemma2/p={p}",
        inputs_digest=digest({"p": p, "w": [[complex(w).real, complex(w).imag] for w in w_grid]}),
        claimed_bound=bound,
        measured_extremum=float(sups[j]),
        margin=float(min(margins)),
        passed=all(s <= bound for s in sups),
        sample_count=len(w_grid) * radial * angular,
        trials=len(w_grid),
        violations=int(sum(s > bound for s in sups)),
        details={"sups": [float(s) for s in sups], "margins": [float(m) for m in margins]},
    )


def lemma7_sides(f, k_radius, g_radius, angular=None):
    """``(max_j sup_K |df/dz_j|, sqrt(n)/rho * sup_G |f|)`` for concentric
    polydiscs ``K = {|z_k| <= a}``, ``G = {|z_k| < b}``, ``rho = b - a``.

    Both sups sit on the tori ``|z_k| = a`` and ``|z_k| = b`` by the
    maximum principle.
    """
    n = f.n
    rho = g_radius - k_radius
    lhs = torus_grid_max(lambda z: np.abs(f.grads(z)).max(axis=1), n, k_radius, angular)
    rhs = math.sqrt(n) / rho * torus_grid_max(lambda z: np.abs(f.values(z)), n, g_radius, angular)
    return lhs, rhs


def verify_lemma7(f, k_radius, g_radius, angular=None):
    if not 0.0 < k_radius < g_radius < 1.0:
        raise ValueError("need 0 < K radius < G radius < 1")
    lhs, rhs = lemma7_sides(f, k_radius, g_radius, angular)
    return VerificationReport(
        case_id=f"lemma7/K={k_radius}/G={g_radius}",
        inputs_digest=digest({"f": f.to_doc(), "K": k_radius, "G": g_radius}),
        claimed_bound=rhs,
        measured_extremum=lhs,
        margin=rhs - lhs,
        passed=lhs <= rhs,
        sample_count=(angular or (4096 if f.n == 1 else 256)) ** f.n * 2,
        violations=int(lhs > rhs),
    )


def verify_lemma7_suite(trials=1000, n=2, seed=0, max_degree=3, angular=64):
    """Random polynomials and random concentric radii."""
    rng = np.random.default_rng(seed)
    worst, violations = None, 0
    for _ in range(trials):
        f = random_polynomial(rng, n, max_degree)
        a, b = np.sort(rng.uniform(0.02, 0.999, size=2))
        if b - a < 1e-3:
            b = min(a + 1e-3, 0.9995)
        lhs, rhs = lemma7_sides(f, float(a), float(b), angular)
        violations += int(lhs > rhs)
        if worst is None or rhs - lhs < worst[0]:
            worst = (rhs - lhs, rhs, lhs)
    return VerificationReport(
        case_id=f"lemma7/random/n={n}",
        inputs_digest=digest({"trials": trials, "n": n, "seed": seed, "deg": max_degree}),
        claimed_bound=worst[1],
        measured_extremum=worst[2],
        margin=worst[0],
        passed=violations == 0,
        sample_count=trials * 2 * angular**n,
        trials=trials,
        violations=violations,
    )


def verify_Km_props(f, m_list, p, budget=None, compact_radius=0.5, angular=None):
    """Dilation operator checks for one function.

    * ``||K_m f|| <= ||f||`` and ``||(I - K_m) f|| <= 2 ||f||`` (slack 1e-3);
    * ``D_m = max_{|z_k| <= r} |f - K_m f|`` nonincreasing in ``m`` and
      below ``n M (1 - (m-1)/m)`` with ``M`` the max partial on the
      compact polydisc.
    """
    budget = budget or SampleBudget()
    n = f.n
    norm_f = bloch_norm(f, p, budget).value
    worst_margin, worst = math.inf, (0.0, 0.0)
    fails = []
    devs = []
    M = torus_grid_max(lambda z: np.abs(f.grads(z)).max(axis=1), n, compact_radius, angular) if n <= 2 else None
    for m in m_list:
        km = dilate_Km(f, m)
        nk = bloch_norm(km, p, budget).value
        nd = bloch_norm(f - km, p, budget).value
        for name, lhs, rhs in (("Km", nk, norm_f), ("I-Km", nd, 2.0 * norm_f)):
            if lhs > rhs * (1.0 + INEQ_SLACK):
                fails.append((name, m))
            if rhs - lhs < worst_margin:
                worst_margin, worst = rhs - lhs, (rhs, lhs)
        if n <= 2:
            dev = torus_grid_max(lambda z, g=km: np.abs(f.values(z) - g.values(z)), n, compact_radius, angular)
            devs.append(dev)
            if dev > n * M * (1.0 / m) * (1.0 + INEQ_SLACK):
                fails.append(("deviation_bound", m))
    for a, b in zip(devs, devs[1:]):
        if b > a * (1.0 + 1e-9) + 1e-15:
            fails.append(("deviation_monotone", None))
    return VerificationReport(
        case_id=f"Km/p={p}",
        inputs_digest=digest({"f": f.to_doc() if isinstance(f, MultiPoly) else repr(f), "m": list(m_list), "p": p}),
        claimed_bound=worst[0],
        measured_extremum=worst[1],
        margin=worst_margin,
        passed=not fails,
        sample_count=(1 + 2 * len(m_list)) * budget.shell_count * budget.angular_samples_per_shell,
        trials=len(m_list),
        violations=len(fails),
        details={"failures": [list(x) for x in fails], "deviations": devs, "norm": norm_f},
    )


def verify_monomial_limits(p, m_max=10_000, annulus_m_max=50, annulus_grid=20001):
    """Closed-form monomial norms and the annulus minima ``c_m``.

    Checks: ``|N(m) - (2p/e)^p|`` and ``|c_m - 1|`` nonincreasing for
    ``m >= 64`` and below 1% at ``m_max``; for ``m <= annulus_m_max`` a
    radial grid minimum of the normalised integrand over
    ``[r_m, r_{m+1}]`` matches ``c_m`` within 1e-3.
    """
    limit = monomial_norm_limit(p)
    ms = np.unique(np.geomspace(64, m_max, 60).astype(int))
    norm_dev = [abs(exact_monomial_norm(int(m), p) - limit) / limit for m in ms]
    cm_dev = [abs(c_m(int(m), p) - 1.0) for m in ms]
    fails = []
    for name, seq in (("norm_monotone", norm_dev), ("c_m_monotone", cm_dev)):
        if any(b > a * (1 + 1e-12) for a, b in zip(seq, seq[1:])):
            fails.append(name)
    if norm_dev[-1] >= 1e-2:
        fails.append("norm_limit")
    if cm_dev[-1] >= 1e-2:
        fails.append("c_m_limit")
    annulus_err = []
    for m in range(2, annulus_m_max + 1):
        lo, hi = monomial_peak_radius(m, p), monomial_peak_radius(m + 1, p)
        r = np.linspace(lo, hi, annulus_grid)
        g = np.exp(p * math.log(m) + p * np.log1p(-r * r) + (m - 1) * np.log(r)) / exact_monomial_norm(m, p)
        annulus_err.append(abs(float(g.min()) - c_m(m, p)))
    if max(annulus_err) >= 1e-3:
        fails.append("annulus")
    return VerificationReport(
        case_id=f"monomial_limits/p={p}",
        inputs_digest=digest({"p": p, "m_max": m_max, "annulus_m_max": annulus_m_max}),
        claimed_bound=1e-2,
        measured_extremum=float(max(norm_dev[-1], cm_dev[-1])),
        margin=float(1e-2 - max(norm_dev[-1], cm_dev[-1])),
        passed=not fails,
        sample_count=len(ms) + annulus_grid * (annulus_m_max - 1),
        trials=len(ms),
        violations=len(fails),
        details={
            "failures": fails,
            "norm_rel_dev_at_m_max": float(norm_dev[-1]),
            "c_m_dev_at_m_max": float(cm_dev[-1]),
            "max_annulus_error": float(max(annulus_err)),
        },
    )


def verify_monomial_norm_oracle(ps=(0.3, 0.5, 1.0, 1.7, 2.0, 3.0), m_max=1000, tol=1e-10):
    """Closed-form monomial norm against golden-section search, relative error."""
    worst = (0.0, None)
    for p in ps:
        for m in range(2, m_max + 1):
            exact = exact_monomial_norm(m, p)
            err = abs(exact - monomial_norm_by_search(m, p)) / exact
            if err > worst[0]:
                worst = (err, (p, m))
    return VerificationReport(
        case_id="monomial_norm/golden_section",
        inputs_digest=digest({"ps": list(ps), "m_max": m_max}),
        claimed_bound=tol,
        measured_extremum=worst[0],
        margin=tol - worst[0],
        passed=worst[0] <= tol,
        sample_count=len(ps) * (m_max - 1),
        trials=len(ps) * (m_max - 1),
        violations=int(worst[0] > tol),
        details={"worst_case": worst[1]},
    )


def regression_corpus():
    """Twenty fixed functions and maps at n = 1 and 2.

    Every entry is ``(case_id, kind, object, exponents)`` with ``kind`` in
    ``{"norm", "sup_B"}``. All coefficients are nonnegative reals, which
    puts the suprema on the nonnegative real axes (a grid line of the
    oracle).
    """
    P1 = lambda terms: MultiPoly(1, terms)
    P2 = lambda terms: MultiPoly(2, terms)
    return [
        ("z", "norm", P1({(1,): 1.0}), (1.0,)),
        ("z^3", "norm", P1({(3,): 1.0}), (1.0,)),
        ("1+z+z^2", "norm", P1({(0,): 1.0, (1,): 1.0, (2,): 1.0}), (0.5,)),
        ("z^5+2z", "norm", P1({(5,): 1.0, (1,): 2.0}), (2.0,)),
        ("fw(0.5),p=1", "norm", test_fn_fw(0.5, 0, 1.0, 1), (1.0,)),
        ("fw(0.8),p=2", "norm", test_fn_fw(0.8, 0, 2.0, 1), (2.0,)),
        ("z1*z2", "norm", P2({(1, 1): 1.0}), (1.0,)),
        ("z1^2+z2", "norm", P2({(2, 0): 1.0, (0, 1): 1.0}), (1.0,)),
        ("z1^3 z2+0.5z2^2", "norm", P2({(3, 1): 1.0, (0, 2): 0.5}), (2.0,)),
        ("1+z1+z2^4", "norm", P2({(0, 0): 1.0, (1, 0): 1.0, (0, 4): 1.0}), (0.5,)),
        ("id1", "sup_B", PolyMap.identity(1), (1.0, 1.0)),
        ("z/2", "sup_B", PolyMap([P1({(1,): 0.5})]), (1.0, 1.0)),
        ("(1+z)/2", "sup_B", PolyMap([P1({(0,): 0.5, (1,): 0.5})]), (1.0, 1.0)),
        ("z^2", "sup_B", PolyMap([P1({(2,): 1.0})]), (1.0, 2.0)),
        ("(z+z^2)/2", "sup_B", PolyMap([P1({(1,): 0.5, (2,): 0.5})]), (2.0, 2.0)),
        ("id2", "sup_B", PolyMap.identity(2), (1.0, 1.0)),
        ("z/2 on U^2", "sup_B", PolyMap([P2({(1, 0): 0.5}), P2({(0, 1): 0.5})]), (1.0, 1.0)),
        ("(z1 z2, z2)/2", "sup_B", PolyMap([P2({(1, 1): 0.5}), P2({(0, 1): 0.5})]), (1.0, 1.0)),
        ("((z1+z2)/2, z1 z2)", "sup_B", PolyMap([P2({(1, 0): 0.5, (0, 1): 0.5}), P2({(1, 1): 1.0})]), (1.0, 2.0)),
        ("(z1^2, (1+z2)/2)/1", "sup_B", PolyMap([P2({(2, 0): 0.5}), P2({(0, 0): 0.25, (0, 1): 0.25})]), (0.5, 0.5)),
    ]


def oracle_equivalence(budget=None, grid=None):
    """Relative gap between estimator and dense grid on the regression corpus."""
    from .compop import _functional, sup_B

    budget = budget or SampleBudget()
    rows = []
    for case_id, kind, obj, exps in regression_corpus():
        n = obj.n
        radial, angular = (grid or {}).get(n, DEFAULT_GRID[n])
        if kind == "norm":
            p = exps[0]
            est = bloch_norm(obj, p, budget).value
            f0 = abs(obj.values(np.zeros((1, n)))[0])
            ref = f0 + dense_grid_sup(integrand_objective(obj, p), n, radial, angular)[0]
        else:
            params = BlochParams(*exps)
            est = sup_B(obj, params, budget).value
            ref = dense_grid_sup(lambda z: _functional(obj, z, params), n, radial, angular)[0]
        rows.append({"case": case_id, "kind": kind, "n": n, "estimate": est, "oracle": ref,
                     "rel_gap": abs(est - ref) / max(abs(ref), 1e-300)})
    return rows
