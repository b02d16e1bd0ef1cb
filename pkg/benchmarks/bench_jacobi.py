"""Time the Jacobi eigensolver on both backends.

    python benchmarks/bench_jacobi.py --sizes 50 100 200 --repeat 3

The numba kernel is compiled (or loaded from cache) before timing. Each line
reports the best wall time per backend and the largest eigenvalue deviation
from ``numpy.linalg.eigvalsh``.
"""
import argparse
import time

import numpy as np

from kvn import graph as gm
from kvn import quantum_graph as qg
from kvn._accel import numba_available
from kvn._jacobi import jacobi_eigh


def best_time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_matrix(A, repeat):
    ref = np.linalg.eigvalsh(A)
    row = {}
    for backend in ("numba", "numpy"):
        if backend == "numba" and not numba_available():
            continue
        t, (vals, _, sweeps) = best_time(lambda: jacobi_eigh(A, backend=backend), repeat)
        row[backend] = (t, float(np.abs(np.sort(vals) - ref).max()), sweeps)
    return row


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mesh", type=int, default=32, help="quantum-graph case: cells per edge")
    args = p.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    if numba_available():
        jacobi_eigh(np.eye(3) + 0.1, backend="numba")  # compile outside the timing

    print(f"{'case':>22} {'backend':>8} {'time [s]':>10} {'max |dlam|':>11} {'sweeps':>6}")
    cases = []
    for n in args.sizes:
        A = rng.standard_normal((n, n))
        cases.append((f"random n={n}", A + A.T))
    g = gm.star_graph(3)
    form = qg.assemble(qg.MetricGraph(g, args.mesh), qg.VertexCondition.krein(g), lumped=True)
    r = 1.0 / np.sqrt(np.diag(form.mass))
    cases.append((f"krein star m={args.mesh}", form.stiffness * r[:, None] * r[None, :]))

    for name, A in cases:
        for backend, (t, err, sweeps) in bench_matrix(A, args.repeat).items():
            print(f"{name:>22} {backend:>8} {t:10.4f} {err:11.2e} {sweeps:6d}")


if __name__ == "__main__":
    main()
