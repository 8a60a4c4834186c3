"""Compare the compiled and pure numpy kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--points N] [--repeat R]
"""

import argparse
import timeit

import numpy as np

from polybloch import _kernels_py as pure

try:
    from polybloch import _ckernels as compiled
except ImportError:
    compiled = None


def workload(n_points, n, degree, n_terms, seed=0):
    rng = np.random.default_rng(seed)
    exps = rng.integers(0, degree + 1, size=(n_terms, n)).astype(np.int64)
    coeffs = rng.normal(size=n_terms) + 1j * rng.normal(size=n_terms)
    mod = rng.random((n_points, n)) ** 0.25
    z = mod * np.exp(2j * np.pi * rng.random((n_points, n)))
    jac = rng.normal(size=(n_points, n, n)) + 1j * rng.normal(size=(n_points, n, n))
    w = 0.9 * z
    return exps, np.ascontiguousarray(coeffs), np.ascontiguousarray(z), np.ascontiguousarray(jac), np.ascontiguousarray(w)


def bench(module, args, repeat):
    exps, coeffs, z, jac, w = args
    _, grads = module.poly_eval_grad(exps, coeffs, z)
    cases = {
        "poly_eval_grad": lambda: module.poly_eval_grad(exps, coeffs, z),
        "weighted_grad_sum": lambda: module.weighted_grad_sum(grads, z, 1.5),
        "functional_b": lambda: module.functional_b(z, w, jac, 1.0, 2.0),
    }
    return {name: min(timeit.repeat(fn, number=1, repeat=repeat)) for name, fn in cases.items()}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    for n, degree, terms in ((1, 12, 8), (2, 6, 12), (3, 4, 16)):
        data = workload(args.points, n, degree, terms)
        t_py = bench(pure, data, args.repeat)
        t_c = bench(compiled, data, args.repeat) if compiled else None
        for name, tp in t_py.items():
            if t_c is None:
                print(f"n={n} {name:18s} python {tp * 1e3:9.2f} ms   compiled unavailable")
            else:
                tc = t_c[name]
                print(f"n={n} {name:18s} python {tp * 1e3:9.2f} ms   cython {tc * 1e3:9.2f} ms   speedup {tp / tc:6.1f}x")


if __name__ == "__main__":
    main()
