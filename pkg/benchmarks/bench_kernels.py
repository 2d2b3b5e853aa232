"""Time the compiled candidate-scoring kernel against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 20]
"""

import argparse
import timeit

import numpy as np

from orderextend import _fallback

try:
    from orderextend import _kernels
except ImportError:  # extension not built
    _kernels = None


def problem(r, n_cand, seed=0):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((r + 2, r))
    t = rng.standard_normal(r + 2)
    C = np.linalg.inv(A.T @ A)
    alphas = rng.standard_normal((n_cand, r))
    taus = rng.standard_normal(n_cand)
    return C, A.T @ t, float(t @ t), alphas, taus


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    backends = [("numpy", _fallback.score_extensions)]
    if _kernels is not None:
        backends.append(("cython", _kernels.score_extensions))
    else:
        print("compiled kernel not available; timing the fallback only")
    print(f"{'r':>3} {'cands':>6} " + " ".join(f"{name:>12}" for name, _ in backends) + "   max|diff|")
    for r in (2, 3, 5, 10):
        for n in (10, 100, 1000):
            args_ = problem(r, n)
            times, outs = [], []
            for _, fn in backends:
                outs.append(fn(*args_))
                times.append(min(timeit.repeat(lambda: fn(*args_), number=1,
                                               repeat=args.repeat)))
            diff = max(float(np.max(np.abs(o - outs[0]) / outs[0])) for o in outs)
            print(f"{r:>3} {n:>6} " + " ".join(f"{1e6 * t:>10.1f}us" for t in times)
                  + f"   {diff:.1e}")


if __name__ == "__main__":
    main()
