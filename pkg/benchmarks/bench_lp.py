"""Timing comparison of the two simplex kernel backends.

The backend is fixed at import time by the STRUCTSVM_NO_NUMBA environment
variable, so this script re-runs itself in a subprocess per backend and
prints both timings. Run from the repository root:

    python3 benchmarks/bench_lp.py
"""

import argparse
import os
import subprocess
import sys
import time


def workload(repeats):
    import numpy as np

    from structsvm._kernels import KERNEL_BACKEND
    from structsvm.expand import expand_polynomial
    from structsvm.l1svm import fit_l1_svm
    from structsvm.structured import StructuredFitSpec, fit_structured

    rng = np.random.default_rng(0)
    q, n = 7, 100
    expansion, graph = expand_polynomial(q)
    graph.policy = "strong"
    Z = rng.normal(size=(n, q))
    X = expansion.fit(Z).transform(Z)
    y = np.where(Z[:, 0] + Z[:, 2] + 0.5 * rng.normal(size=n) > 0, 1.0, -1.0)
    beta = rng.normal(size=X.shape[1])

    # warm-up solve outside the timer (numba compilation happens here)
    fit_l1_svm(X[:20], y[:20], 1.0)

    t0 = time.perf_counter()
    for rep in range(repeats):
        lam = 0.1 * (1 + rep % 5)
        fit_l1_svm(X, y, lam)
        fit_structured(X, y, StructuredFitSpec(
            beta, graph, expansion.column_map, "lagrangian", lam))
    elapsed = time.perf_counter() - t0
    print(f"{KERNEL_BACKEND:>6}: {repeats} l1 + structured solve pairs "
          f"in {elapsed:.2f}s ({elapsed / repeats * 1e3:.1f} ms/pair)")
    return elapsed


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=20)
    parser.add_argument("--single", action="store_true",
                        help="time only the backend selected by the environment")
    args = parser.parse_args()
    if args.single:
        workload(args.repeats)
        return
    for flag in ("0", "1"):
        env = dict(os.environ, STRUCTSVM_NO_NUMBA=flag)
        subprocess.run(
            [sys.executable, os.path.abspath(__file__),
             "--single", "--repeats", str(args.repeats)],
            env=env, check=True)


if __name__ == "__main__":
    main()
