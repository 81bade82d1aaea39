"""Compiled vs numpy relaxation kernel.

Runs a fixed number of projected SOR sweeps on the envelope problem of a
two-atom potential and reports sweeps per second for each backend, plus the
largest difference between their iterates.

    python benchmarks/bench_relax.py --sizes 64 128 256 --sweeps 200
"""
import argparse
import time

import numpy as np

from singmetric.grid import green_potential, kernels, singular_part


def problem(N):
    atoms = [((N // 4, N // 4), 0.3), ((3 * N // 4, N // 2), 0.2)]
    u = green_potential(N, atoms)
    S = singular_part(N, u.atoms)
    bump = 0.05 * np.sin(2 * np.pi * np.arange(N) / N)[:, None] * np.ones((1, N))
    obstacle = np.minimum(u.values, bump - bump.max()) - S
    rhs = np.full((N, N), (1.0 - u.total_lelong) / (4.0 * N * N))
    return obstacle, rhs


def run(backend, obstacle, rhs, sweeps, omega):
    phi = obstacle.copy(order="C")
    t0 = time.perf_counter()
    kernels.relax(phi, obstacle, rhs, omega, tol=0.0, max_iters=sweeps, backend=backend)
    return phi, time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    ap.add_argument("--sweeps", type=int, default=200)
    args = ap.parse_args()

    backends = ["python"] + (["cython"] if kernels._relax is not None else [])
    print(f"{'N':>5} {'backend':>8} {'sweeps/s':>10} {'speedup':>8} {'max |diff|':>11}")
    for N in args.sizes:
        obstacle, rhs = problem(N)
        omega = kernels.optimal_omega(N)
        out = {}
        for b in backends:
            phi, dt = run(b, obstacle, rhs, args.sweeps, omega)
            out[b] = (phi, args.sweeps / dt)
        base = out["python"][1]
        for b in backends:
            diff = np.abs(out[b][0] - out["python"][0]).max()
            print(f"{N:>5} {b:>8} {out[b][1]:>10.1f} {out[b][1] / base:>8.1f} {diff:>11.2e}")
    if "cython" not in backends:
        print("compiled kernel not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
