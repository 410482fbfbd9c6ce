"""Compare the compiled and pure-Python path-enumeration kernels.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--quick]

Each case enumerates every path of a random fixture with both backends,
checks the outputs are bit-identical and reports the best wall time.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from epe import kernels
from epe.hilbert import ConfigBasis, Hamiltonian, ProjectorFamily, StateVector, build_propagator
from epe.histories import ChainSpec, class_operators_pathsum
from epe.paths import TimeGrid, weight_table

CASES = [(4, 5), (6, 5), (8, 5), (12, 4)]
QUICK = [(4, 4), (6, 4)]


def fixture(d: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    b = ConfigBasis(d)
    U = build_propagator(Hamiltonian(b, (A + A.conj().T) / 2), 0.5)
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return b, U, StateVector(b, v / np.linalg.norm(v))


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="small cases only")
    args = ap.parse_args(argv)
    try:
        kernels.get_backend("cython")
    except ImportError:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation` first")
        return 1
    print(f"{'kernel':<14}{'d':>4}{'n':>4}{'paths':>10}{'cython s':>12}{'python s':>12}"
          f"{'speedup':>10}  identical")
    for d, n in (QUICK if args.quick else CASES):
        b, U, psi = fixture(d)
        grid = TimeGrid(n, 0.5, b)
        tc, rc = best_of(lambda: weight_table(psi, U, grid, backend="cython"), args.repeat)
        tp, rp = best_of(lambda: weight_table(psi, U, grid, backend="python"), 1)
        same = np.array_equal(rc.weights, rp.weights)
        print(f"{'weights':<14}{d:>4}{n:>4}{grid.n_paths:>10}{tc:>12.4f}{tp:>12.4f}"
              f"{tp / tc:>9.1f}x  {same}")
        half = ProjectorFamily(b, (tuple(range(d // 2)), tuple(range(d // 2, d))))
        chain = ChainSpec((1, n), (half, ProjectorFamily.fine(b)))
        tc, oc = best_of(lambda: class_operators_pathsum(chain, U, n, backend="cython"),
                         args.repeat)
        tp, op = best_of(lambda: class_operators_pathsum(chain, U, n, backend="python"), 1)
        same = all(np.array_equal(oc[k].matrix, op[k].matrix) for k in oc)
        print(f"{'class ops':<14}{d:>4}{n:>4}{grid.n_paths:>10}{tc:>12.4f}{tp:>12.4f}"
              f"{tp / tc:>9.1f}x  {same}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
