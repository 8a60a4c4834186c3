"""Command-line front end.

Analysis config (JSON)::

    {
      "dimension": 2,
      "map": [
        [{"multi_index": [1, 0], "re": 0.5, "im": 0.0}],
        [{"multi_index": [0, 1], "re": 0.5, "im": 0.0}]
      ],
      "p": 1.0,
      "q": 1.0,
      "budget": {"shells": 12, "angular_samples": 256, "refinement_steps": 200,
                 "delta_schedule": [0.5, 0.25, ...], "degree_cap": 4},
      "seed": 0,
      "output_dir": "out"
    }

``map`` holds one term list per component. Everything except
``dimension``, ``map``, ``p`` and ``q`` is optional.

Function spec for ``norm`` (JSON), one of::

    {"kind": "poly", "dimension": 2, "terms": [{"multi_index": [1, 1], "re": 1, "im": 0}]}
    {"kind": "monomial", "dimension": 1, "m": 10, "axis": 1, "normalised": false}
    {"kind": "fw", "dimension": 1, "w": {"re": 0.5, "im": 0}, "axis": 1}

``axis`` counts from 1; a normalised monomial is ``m^{p-1} z^m`` scaled to
norm 1. Exit status: 0 success, 1 invalid input,
2 numeric failure.
"""

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, oracle
from .blochnorm import BlochParams, EvaluationError, bloch_norm, exact_monomial_norm
from .compop import DEFAULT_SCHEDULE, boundary_profile, classify, essential_norm_bracket
from .holo import MultiPoly, PolyMap, monomial_family, test_fn_fw
from .polydisc import DomainError, SampleBudget

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2

SUITES = ("lemma1", "lemma2", "lemma7", "km", "monomial")


class InputError(Exception):
    """Invalid user input (exit status 1)."""


class NumericFailure(Exception):
    """A computation produced no usable number (exit status 2)."""


def canonical_json(doc):
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=True) + "\n"


def config_digest(doc):
    """SHA-256 of the canonical config; the output location is excluded."""
    doc = {k: v for k, v in doc.items() if k != "output_dir"}
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _positive(name, value):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise InputError(f"{name} must be a number, got {value!r}") from None
    if not (math.isfinite(value) and value > 0):
        raise InputError(f"{name} must be finite and > 0, got {value!r}")
    return value


class AnalysisConfig:
    """Validated analysis document plus command-line overrides."""

    def __init__(self, doc, overrides=None):
        if not isinstance(doc, dict):
            raise InputError("config must be a JSON object")
        doc = dict(doc)
        budget_doc = dict(doc.get("budget") or {})
        for key, value in (overrides or {}).items():
            if value is None:
                continue
            if key in ("seed", "output_dir"):
                doc[key] = value
            else:
                budget_doc[key] = value
        doc["budget"] = budget_doc
        self.doc = doc
        for key in ("dimension", "map", "p", "q"):
            if key not in doc:
                raise InputError(f"config is missing required key '{key}'")
        n = doc["dimension"]
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise InputError(f"dimension must be a positive integer, got {n!r}")
        comps = doc["map"]
        if not isinstance(comps, list) or len(comps) != n:
            raise InputError(f"dimension n = {n} must match the number of map components")
        self.n = n
        self.p = _positive("p", doc["p"])
        self.q = _positive("q", doc["q"])
        try:
            self.components = [MultiPoly.from_doc(n, c) for c in comps]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed map component: {exc}") from exc
        try:
            self.budget = SampleBudget(
                shell_count=int(budget_doc.get("shells", 12)),
                angular_samples_per_shell=int(budget_doc.get("angular_samples", 256)),
                refinement_steps=int(budget_doc.get("refinement_steps", 200)),
                seed=int(doc.get("seed", 0)),
            )
        except (TypeError, ValueError) as exc:
            raise InputError(f"invalid budget: {exc}") from exc
        sched = budget_doc.get("delta_schedule", list(DEFAULT_SCHEDULE))
        try:
            sched = [float(d) for d in sched]
        except (TypeError, ValueError):
            raise InputError("delta_schedule must be a list of numbers") from None
        if not sched or any(not 0 < d <= 1 for d in sched):
            raise InputError("delta_schedule must be nonempty with entries in (0, 1]")
        if any(b >= a for a, b in zip(sched, sched[1:])):
            raise InputError("delta_schedule must be strictly decreasing")
        self.schedule = tuple(sched)
        cap = budget_doc.get("degree_cap", 4)
        if not isinstance(cap, int) or cap < 1:
            raise InputError(f"degree_cap must be a positive integer, got {cap!r}")
        self.degree_cap = cap
        self.output_dir = Path(doc.get("output_dir", "."))

    @property
    def params(self):
        return BlochParams(self.p, self.q)

    def phi(self):
        return PolyMap(self.components)

    def provenance(self):
        return {"config_digest": config_digest(self.doc), "tool_version": __version__}


def _format_summary(cfg, report):
    lines = [
        f"polybloch {__version__}",
        f"config digest: {config_digest(cfg.doc)}",
        f"n = {cfg.n}, p = {cfg.p!r}, q = {cfg.q!r}",
        f"sup B estimate: {report.sup_estimate.value!r} ({report.sup_estimate.convergence_flag})",
        f"bounded: {report.bounded}",
        f"boundary limit L: {report.profile.L_estimate!r} (trend {report.profile.trend})",
        f"compact: {report.compact}",
    ]
    if report.bracket is None:
        lines.append("essential norm bracket [L/n, 2L]: not available (operator likely unbounded)")
    else:
        lines.append(f"essential norm bracket [L/n, 2L] = [{report.bracket.lower!r}, {report.bracket.upper!r}]")
    if report.self_map and not report.self_map["is_self_map"]:
        lines.append("warning: map failed self-map certification")
    lines.append("space pairs:")
    for pair, verdicts in report.space_pairs.items():
        lines.append(f"  {pair}: bounded {verdicts['bounded']}, compact {verdicts['compact']}")
    return "\n".join(lines) + "\n"


def _write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _budget_overrides(args):
    return {
        "shells": args.shells,
        "angular_samples": args.angular_samples,
        "refinement_steps": args.refinement_steps,
        "seed": args.seed,
        "output_dir": getattr(args, "output_dir", None),
    }


def _load_config(args):
    return AnalysisConfig(_read_json(args.config), _budget_overrides(args))


def _classify(cfg):
    report = classify(cfg.phi(), cfg.params, cfg.budget, cfg.schedule, cfg.degree_cap)
    if not math.isfinite(report.profile.L_estimate) and report.bounded != "unlikely":
        raise NumericFailure("boundary limit estimate is not finite")
    doc = report.to_doc()
    doc.update(cfg.provenance())
    return report, doc


def cmd_analyze(args):
    cfg = _load_config(args)
    report, doc = _classify(cfg)
    out = cfg.output_dir
    _write(out / "report.json", canonical_json(doc))
    _write(out / "profile.csv", report.profile.to_csv())
    summary = _format_summary(cfg, report)
    _write(out / "summary.txt", summary)
    sys.stdout.write(summary)
    return EXIT_OK


def cmd_classify(args):
    cfg = _load_config(args)
    _, doc = _classify(cfg)
    text = canonical_json(doc)
    if args.output:
        _write(Path(args.output), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_profile(args):
    cfg = _load_config(args)
    prof = boundary_profile(cfg.phi(), cfg.params, cfg.schedule, cfg.budget)
    text = prof.to_csv()
    if args.output:
        _write(Path(args.output), text)
    else:
        sys.stdout.write(text)
    bracket = essential_norm_bracket(prof, cfg.n)
    sys.stderr.write(
        f"L = {prof.L_estimate!r} ({prof.trend}); bracket [L/n, 2L] = [{bracket.lower!r}, {bracket.upper!r}]\n"
    )
    return EXIT_OK


def _axis(spec, n):
    axis = spec.get("axis", 1)
    if not isinstance(axis, int) or not 1 <= axis <= n:
        raise InputError(f"axis must be an integer in 1..{n}, got {axis!r}")
    return axis - 1


def build_function(spec, p):
    """Function object described by a ``norm`` spec document."""
    if not isinstance(spec, dict):
        raise InputError("function spec must be a JSON object")
    n = spec.get("dimension", 1)
    if not isinstance(n, int) or n < 1:
        raise InputError(f"dimension must be a positive integer, got {n!r}")
    kind = spec.get("kind")
    try:
        if kind == "poly":
            return MultiPoly.from_doc(n, spec["terms"])
        if kind == "monomial":
            m = spec.get("m")
            if not isinstance(m, int) or m < 1:
                raise InputError(f"monomial degree m must be a positive integer, got {m!r}")
            axis = _axis(spec, n)
            if spec.get("normalised", False):
                return monomial_family(m, p, axis, n)
            gamma = [0] * n
            gamma[axis] = m
            return MultiPoly.monomial(gamma)
        if kind == "fw":
            w = spec.get("w", {})
            w = complex(float(w.get("re", 0.0)), float(w.get("im", 0.0)))
            return test_fn_fw(w, _axis(spec, n), p, n)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed function spec: {exc}") from exc
    raise InputError(f"unknown function kind {kind!r}; expected poly, monomial or fw")


def cmd_norm(args):
    spec = _read_json(args.spec)
    p = _positive("p", args.p if args.p is not None else spec.get("p", 1.0))
    f = build_function(spec, p)
    budget = SampleBudget(
        shell_count=args.shells or 12,
        angular_samples_per_shell=args.angular_samples or 256,
        refinement_steps=args.refinement_steps if args.refinement_steps is not None else 200,
        seed=args.seed or 0,
    )
    est = bloch_norm(f, p, budget)
    if not math.isfinite(est.value):
        raise NumericFailure("norm estimate is not finite")
    doc = {"p": p, "spec": spec, "estimate": est.to_record(), "tool_version": __version__}
    if args.exact:
        if spec.get("kind") != "monomial":
            raise InputError("--exact is only available for monomial specs")
        doc["exact"] = 1.0 if spec.get("normalised", False) else exact_monomial_norm(spec["m"], p)
    sys.stdout.write(canonical_json(doc))
    return EXIT_OK


def run_suite(name, seed):
    if name == "lemma1":
        reps = [oracle.verify_lemma1(p, n, 1000, seed) for p in (0.5, 1.0, 2.0) for n in (1, 2)]
    elif name == "lemma2":
        reps = [oracle.verify_lemma2_bound(p) for p in (0.5, 1.0, 2.0, 3.0)]
    elif name == "lemma7":
        reps = [oracle.verify_lemma7_suite(1000, 2, seed), oracle.verify_lemma7_suite(200, 1, seed, angular=512)]
    elif name == "km":
        rng = np.random.default_rng(seed)
        budget = SampleBudget(shell_count=10, angular_samples_per_shell=64, refinement_steps=60, seed=seed)
        reps = [
            oracle.verify_Km_props(oracle.random_polynomial(rng, 2, 6), [2, 4, 8, 16, 32, 64, 128, 256], 1.0, budget)
            for _ in range(5)
        ]
    else:
        reps = [oracle.verify_monomial_limits(p) for p in (0.5, 1.0, 2.0)]
        reps.append(oracle.verify_monomial_norm_oracle())
    return reps


def cmd_verify(args):
    names = SUITES if args.suite == "all" else (args.suite,)
    reports = []
    for name in names:
        reports.extend(r.to_doc() for r in run_suite(name, args.seed))
    doc = {
        "suite": args.suite,
        "seed": args.seed,
        "tool_version": __version__,
        "config_digest": config_digest({"suite": args.suite, "seed": args.seed}),
        "passed": all(r["passed"] for r in reports),
        "reports": reports,
    }
    text = canonical_json(doc)
    if args.output:
        _write(Path(args.output), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _add_budget_flags(sp):
    sp.add_argument("--shells", type=int, help="number of boundary shells")
    sp.add_argument("--angular-samples", type=int, help="samples per shell")
    sp.add_argument("--refinement-steps", type=int, help="local search sweeps")
    sp.add_argument("--seed", type=int, help="sampling seed")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="polybloch", description="Composition operators between Bloch-type spaces on the polydisc.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("analyze", help="classify a map and write report.json, profile.csv and summary.txt")
    sp.add_argument("config", help="analysis config (JSON)")
    sp.add_argument("--output-dir", help="directory for the report files")
    _add_budget_flags(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("classify", help="print the classification report")
    sp.add_argument("config")
    sp.add_argument("-o", "--output", help="write the report here instead of stdout")
    _add_budget_flags(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("profile", help="print the boundary profile as CSV")
    sp.add_argument("config")
    sp.add_argument("-o", "--output", help="write the CSV here instead of stdout")
    _add_budget_flags(sp)
    sp.set_defaults(func=cmd_profile)

    sp = sub.add_parser("norm", help="estimate the Bloch-type norm of one function")
    sp.add_argument("spec", help="function spec (JSON)")
    sp.add_argument("--p", type=float, help="weight exponent (overrides the spec)")
    sp.add_argument("--exact", action="store_true", help="also print the closed form (monomials)")
    _add_budget_flags(sp)
    sp.set_defaults(func=cmd_norm)

    sp = sub.add_parser("verify", help="run inequality verification suites")
    sp.add_argument("--suite", default="all", help=f"one of {', '.join(SUITES + ('all',))}")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("-o", "--output", help="write the document here instead of stdout")
    sp.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "verify" and args.suite not in SUITES + ("all",):
        sys.stderr.write(f"unknown suite {args.suite!r}; valid suites: {', '.join(SUITES + ('all',))}\n")
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"invalid input: {exc}\n")
        return EXIT_INPUT
    except (NumericFailure, EvaluationError, DomainError, FloatingPointError, ArithmeticError) as exc:
        sys.stderr.write(f"numeric failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
