"""Compare the compiled and numpy RK4 kernels on random curvature samples.

Usage: python3 benchmarks/bench_kernels.py [--steps N] [--repeat R]
"""
import argparse
import timeit

import numpy as np

from jacobicomp import kernels


def problem(m, steps, seed=0):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((2 * steps + 1, m, m))
    R = 0.5 * (G + np.swapaxes(G, 1, 2))
    S = rng.standard_normal((m, m))
    return R, 1.0 / steps, np.eye(m), 0.5 * (S + S.T)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    try:
        kernels.get_backend("cython")
        backends = ("cython", "python")
    except ImportError:
        print("compiled extension not available; timing the numpy fallback only")
        backends = ("python",)
    print(f"active backend: {kernels.BACKEND}, steps={args.steps}")
    print("m,backend,trajectory_ms,endpoint_ms,max_diff")
    for m in (1, 2, 3, 5, 8):
        R, h, Y0, P0 = problem(m, args.steps)
        ref = None
        for name in backends:
            traj = min(timeit.repeat(lambda: kernels.rk4_trajectory(R, h, Y0, P0, backend=name),
                                     number=1, repeat=args.repeat))
            end = min(timeit.repeat(lambda: kernels.rk4_endpoint(R, h, Y0, P0, backend=name),
                                    number=1, repeat=args.repeat))
            Y, _ = kernels.rk4_trajectory(R, h, Y0, P0, backend=name)
            diff = 0.0 if ref is None else float(np.max(np.abs(Y - ref)))
            ref = Y if ref is None else ref
            print(f"{m},{name},{1e3 * traj:.3f},{1e3 * end:.3f},{diff:.1e}")


if __name__ == "__main__":
    main()
