"""Benchmark: compiled kernels vs the pure-numpy fallback.

Times the batch PLQ evaluation and membership kernels on a synthetic
piecewise quadratic built from a hyperplane fan, the same workload the
grid-descent oracles generate.  Run:  python benchmarks/bench_kernels.py
"""

import itertools
import timeit

import numpy as np

from plqkit.backend import available_backends
from plqkit.geometry import Polyhedron
from plqkit.plq import PLQFunction, Quadratic


def fan_plq(n: int, n_planes: int, seed: int) -> PLQFunction:
    """Continuous PLQ from squared plus-composite-affine bumps on the cells
    of a random central hyperplane fan."""
    rng = np.random.RandomState(seed)
    normals = rng.randn(n_planes, n)
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    weights = rng.uniform(-1.5, 1.5, n_planes)
    base = Quadratic.build(np.eye(n), rng.randn(n), 0.0)
    pieces = []
    for signs in itertools.product((1.0, -1.0), repeat=n_planes):
        A = np.array([s * a for s, a in zip(signs, normals)])
        P = Polyhedron.build(-A, np.zeros(n_planes))
        Q = base.Q + sum(
            2.0 * w * np.outer(a, a)
            for s, w, a in zip(signs, weights, normals) if s > 0
        )
        pieces.append((P, Quadratic.build(Q, base.c, 0.0)))
    return PLQFunction.build(pieces)


def main():
    backends = available_backends()
    f = fan_plq(n=3, n_planes=3, seed=7)
    data = f.kernel_data()
    pts = np.random.RandomState(0).uniform(-1, 1, (500_000, 3))
    print(f"workload: {f.npieces}-piece PLQ in R^3, {pts.shape[0]:,} points")
    ref = None
    times = {}
    for name, impl in backends.items():
        t = timeit.timeit(
            lambda: impl.plq_eval_batch(*data, 1e-9, pts), number=3) / 3
        vals, inside = impl.plq_eval_batch(*data, 1e-9, pts)
        if ref is None:
            ref = vals
        else:
            assert np.allclose(ref, vals, equal_nan=True), "backends disagree"
        times[name] = t
        rate = pts.shape[0] / t / 1e6
        print(f"  {name:>8}: {t * 1e3:8.1f} ms  ({rate:6.2f} M pts/s)")
    if len(times) == 2:
        print(f"  speedup: {times['python'] / times['compiled']:.1f}x")
    else:
        print("  compiled backend not built; run `python setup.py build_ext "
              "--inplace` to compare")


if __name__ == "__main__":
    main()
