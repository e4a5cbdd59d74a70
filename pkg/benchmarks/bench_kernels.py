"""Compiled versus pure-Python kernel timings.

    python benchmarks/bench_kernels.py [--repeat N]

Prints one row per kernel with the best-of-N wall time of each backend and
the speed-up.  Both backends receive identical inputs and their outputs are
compared before timing.
"""

import argparse
import sys
import timeit

import numpy as np

from mac_sim import _pykernels, kernels


def _antisym(rng, n):
    a = rng.normal(size=(n, n))
    return a - a.T


def _anneal_args(rng, L=48, moves=240, n_temps=60):
    x = rng.normal(size=(3 * L, 3 * L))
    K = np.ascontiguousarray(x @ x.T / L)
    n = rng.normal(size=(L, 3))
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    temps = 0.95 ** np.arange(n_temps)
    total = n_temps * moves
    return (K, n.reshape(-1).copy(), temps, moves, rng.integers(0, L, total).astype(np.int64),
            rng.normal(0, 0.3, total), rng.normal(size=(total, 3)), rng.random(total), False)


def _network(rng, L=256):
    E = np.triu((rng.random((L, L)) < 0.02).astype(np.uint8), 1)
    return np.ascontiguousarray(E + E.T), rng.permutation(L)[: L // 2]


def cases(rng):
    a64 = _antisym(rng, 64)
    stack = np.stack([_antisym(rng, 8) for _ in range(2000)])
    anneal = _anneal_args(rng)
    E, verts = _network(rng)

    def measure(mod):
        def run():
            work = E.copy()
            for v in verts:
                mod.measure_vertex_inplace(work, int(v))
            return mod.distance_profile(work)
        return run

    return {
        "pfaffian 64x64": lambda m: (lambda: m.pfaffian(a64)),
        "pfaffian stack 2000x8x8": lambda m: (lambda: m.pfaffian_stack(stack)),
        "anneal_qfi L=48": lambda m: (lambda: m.anneal_qfi(anneal[0], anneal[1].copy(), *anneal[2:])),
        "measure+profile L=256": measure,
    }


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.allclose(np.asarray(a), np.asarray(b), rtol=1e-8, atol=1e-10)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if kernels.compiled_backend is None:
        print("compiled extension not available; build with `pip install -e . --no-build-isolation`")
        return 1
    rng = np.random.default_rng(0)
    print(f"{'kernel':<26}{'compiled [ms]':>15}{'python [ms]':>14}{'speed-up':>10}")
    for name, make in cases(rng).items():
        fc, fp = make(kernels.compiled_backend), make(_pykernels)
        if not _same(fc(), fp()):
            print(f"{name}: backends disagree")
            return 2
        tc = min(timeit.repeat(fc, number=1, repeat=args.repeat))
        tp = min(timeit.repeat(fp, number=1, repeat=args.repeat))
        print(f"{name:<26}{1e3 * tc:>15.3f}{1e3 * tp:>14.3f}{tp / tc:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
