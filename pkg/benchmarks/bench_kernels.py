#!/usr/bin/env python3
"""Time the numba kernels against their pure-numpy fallbacks.

Run as `python benchmarks/bench_kernels.py [--repeat N]`. Must run with the
numba backend enabled (unset KOOPLIFT_NUMBA or set it to 1); both paths are
called directly, so one run reports both columns.
"""

import argparse
import sys
import time

import numpy as np

from kooplift import _kernels as K


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def build_cases(rng):
    cases = []

    X_poly = rng.uniform(-1, 1, size=(200_000, 2))
    exps = np.array(
        [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]], dtype=np.int64
    )
    cases.append((
        "poly_features (200k x 2 -> 6)",
        lambda: K.poly_features_numpy(X_poly, exps),
        lambda: K.poly_features_numba(X_poly, exps),
    ))

    X_rbf = rng.normal(size=(50_000, 3))
    centers = rng.normal(size=(40, 3))
    cases.append((
        "rbf_features (50k x 3, 40 centers)",
        lambda: K.rbf_features_numpy(X_rbf, centers, K.RBF_THINPLATE, 1.0, 3),
        lambda: K.rbf_features_numba(X_rbf, centers, K.RBF_THINPLATE, 1.0, 3),
    ))

    W = rng.normal(size=(3, 128))
    b = rng.uniform(0, 2 * np.pi, size=128)
    cases.append((
        "rff_features (50k x 3 -> 128)",
        lambda: K.rff_features_numpy(X_rbf, W, b),
        lambda: K.rff_features_numba(X_rbf, W, b),
    ))

    X_gram = rng.normal(size=(1_500, 3))
    cases.append((
        "gram_matrix (1500 x 1500 gaussian)",
        lambda: K.gram_matrix_numpy(X_gram, X_gram, K.KERNEL_GAUSSIAN, 1.0, 0.0, 0.0),
        lambda: K.gram_matrix_numba(X_gram, X_gram, K.KERNEL_GAUSSIAN, 1.0, 0.0, 0.0),
    ))

    X0 = rng.uniform(-1, 1, size=(100, 2))
    params = np.array([-0.05, -1.0])
    U = np.zeros((100, 2499, 0))
    cases.append((
        "rk4 slow_manifold (100 ICs x 2499 steps)",
        lambda: K.rk4_catalog_batch_numpy(K.SYS_SLOW_MANIFOLD, params, X0, 0.02, 2499, U),
        lambda: K.rk4_catalog_batch_numba(K.SYS_SLOW_MANIFOLD, params, X0, 0.02, 2499, U),
    ))

    A = rng.normal(size=(16, 16)) * 0.2
    z0 = rng.normal(size=16)
    cases.append((
        "iterate_linear (N=16, 20k steps)",
        lambda: K.iterate_linear_numpy(A, z0, 20_000),
        lambda: K.iterate_linear_numba(A, z0, 20_000),
    ))

    B = rng.normal(size=(16, 2))
    Uc = rng.normal(size=(2, 20_000))
    cases.append((
        "iterate_linear_controlled (N=16, q=2)",
        lambda: K.iterate_linear_controlled_numpy(A, B, z0, Uc),
        lambda: K.iterate_linear_controlled_numba(A, B, z0, Uc),
    ))
    return cases


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if not K.HAVE_NUMBA:
        sys.stderr.write(
            "numba backend unavailable (KOOPLIFT_NUMBA=0 or numba missing); "
            "nothing to compare\n"
        )
        return 1
    rng = np.random.default_rng(0)
    cases = build_cases(rng)
    print(f"{'kernel':<42} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for name, f_np, f_nb in cases:
        f_nb()  # compile outside the timing loop
        t_np = best_of(f_np, args.repeat)
        t_nb = best_of(f_nb, args.repeat)
        print(f"{name:<42} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms "
              f"{t_np / t_nb:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
