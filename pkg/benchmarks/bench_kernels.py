"""Timing of the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--M 200000] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from homcone import _kernels_py
from homcone.structure import full_structure, vinberg

try:
    from homcone import _kernels
except ImportError:
    _kernels = None


def bench(label, fn, repeat):
    best = min(timeit.repeat(fn, number=1, repeat=repeat))
    print(f"  {label:<8} {best * 1e3:9.2f} ms")
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--M", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; only the numpy kernels are timed")
    rng = np.random.default_rng(0)
    for name, V, k in (("vinberg", vinberg(), 2), ("vinberg", vinberg(), 6),
                       ("sym(4)", full_structure(4), 4)):
        Z = rng.standard_normal((args.M, k, V.N))
        basis = np.ascontiguousarray(V.z_basis)
        print(f"wishart_coords  {name} k={k} M={args.M}")
        t_py = bench("numpy", lambda: _kernels_py.wishart_coords(Z, basis), args.repeat)
        if _kernels is not None:
            assert np.allclose(_kernels.wishart_coords(Z, basis), _kernels_py.wishart_coords(Z, basis))
            t_cy = bench("cython", lambda: _kernels.wishart_coords(Z, basis), args.repeat)
            print(f"  speedup  {t_py / t_cy:9.2f}x")
        C = _kernels_py.wishart_coords(Z, basis)
        mean = C.mean(axis=0)
        print(f"centered_moments {name} d={V.dim_z} M={args.M}")
        t_py = bench("numpy", lambda: _kernels_py.centered_moments(C, mean), args.repeat)
        if _kernels is not None:
            t_cy = bench("cython", lambda: _kernels.centered_moments(C, mean), args.repeat)
            print(f"  speedup  {t_py / t_cy:9.2f}x")


if __name__ == "__main__":
    main()
