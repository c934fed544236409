"""Compare the compiled and pure-numpy kernel backends.

Times each pointwise kernel and a full time step on 2D and 3D grids:

    python benchmarks/bench_kernels.py [--sizes 128 256 512] [--dim3 64 96] [--repeat 20]

The FFTs are shared by both backends, so the per-step gain is much
smaller than the per-kernel gain.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from umcf import kernels
from umcf.geometry import Sphere, initial_condition
from umcf.grid import Grid, rforward
from umcf.model import ModelParams, Stepper
from umcf.spectral_ops import laplacian


def _setup(grid: Grid):
    eps = 2.0 / grid.n[0]
    params = ModelParams(eps, 4 * eps ** 2, 0.01 * eps ** 2)
    c = tuple(l / 2 for l in grid.length)
    u = initial_condition(Sphere(c, 0.3), grid, eps)
    return params, u


def _time(fn, repeat):
    fn()
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_grid(grid: Grid, repeat: int) -> dict:
    params, u = _setup(grid)
    lap = laplacian(grid, u)
    fp, w = np.empty_like(u), np.empty_like(u)
    uh = rforward(grid, u)
    fph, wh, out = uh.copy(), uh.copy(), np.empty_like(uh)
    m = np.random.default_rng(0).random(uh.shape)
    inv = 1.0 / params.eps ** 2
    stepper = Stepper(grid, params)

    cases = {
        "nonlinear_terms": lambda: kernels.nonlinear_terms(u, lap, inv, fp, w),
        "scale_spectral": lambda: kernels.scale_spectral(uh, m, out),
        "combine_spectral": lambda: kernels.combine_spectral(uh, fph, wh, m, m, m, out),
        "project": lambda: kernels.project(u.copy(), 0.25),
        "full step": lambda: stepper.step(u),
    }
    rows = {}
    for name, fn in cases.items():
        rows[name] = {}
        for backend in ("python", "cython"):
            kernels.use_backend(backend)
            rows[name][backend] = _time(fn, repeat)
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="*", default=[128, 256, 512])
    ap.add_argument("--dim3", type=int, nargs="*", default=[64])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)

    original = kernels.BACKEND
    try:
        kernels.use_backend("cython")
    except ImportError:
        print("compiled kernels are not built; nothing to compare")
        return 1

    grids = [Grid.cube(2, n) for n in args.sizes] + [Grid.cube(3, n) for n in args.dim3]
    print(f"{'grid':>12} {'kernel':>18} {'python ms':>10} {'cython ms':>10} {'speedup':>8}")
    for grid in grids:
        label = "x".join(map(str, grid.n))
        for name, t in bench_grid(grid, args.repeat).items():
            py, cy = 1e3 * t["python"], 1e3 * t["cython"]
            print(f"{label:>12} {name:>18} {py:10.3f} {cy:10.3f} {py / cy:8.2f}")
    kernels.use_backend(original)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
