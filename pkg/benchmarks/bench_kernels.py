"""Numba-vs-numpy kernel benchmark.

Runs every hot kernel on both execution paths and prints a comparison
table. The parent process spawns itself twice (LIQUIDLAB_NUMBA=1 and =0)
so each path is measured in a fresh interpreter with the flag applied at
import time, exactly as a user would select it.

Usage:
    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def _bench(fn, repeat):
    fn()  # warm-up (includes jit compilation on the numba path)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _cases():
    import numpy as np

    from liquidlab.marching import marching_cubes, sample_on_grid
    from liquidlab.mesh import TriMesh, icosphere
    from liquidlab.render import default_rig, render_mask
    from liquidlab.sim.flip import MacGrid, extrapolate, pressure_project
    from liquidlab.sim.kernels import g2p, p2g
    from liquidlab.sim.params import SimParams
    from liquidlab.surface import SurfaceParams, particles_to_field
    from liquidlab.voxel import voxelize

    rng = np.random.default_rng(0)
    cases = {}

    pos = rng.uniform(0.05, 0.75, (200_000, 3))
    val = rng.normal(size=len(pos))
    origin = np.zeros(3)
    shape_u = (33, 32, 32)
    cases["p2g 200k -> 32^3"] = lambda: p2g(pos, val, origin, 0.025,
                                            (0.0, 0.5, 0.5), shape_u)
    grid_u = rng.normal(size=shape_u)
    cases["g2p 32^3 -> 200k"] = lambda: g2p(pos, origin, 0.025,
                                            (0.0, 0.5, 0.5), grid_u)

    splat_pos = rng.uniform(0.0, 0.1, (8_000, 3))
    sp = SurfaceParams(r_k=0.004)
    splat_bounds = (np.full(3, -0.02), np.full(3, 0.12))
    cases["splat 8k, r_k 4mm"] = lambda: particles_to_field(
        splat_pos, sp, splat_bounds)

    blob_src = icosphere(0.35, subdivisions=3)
    blob = TriMesh(blob_src.vertices
                   + rng.normal(0.0, 0.01, blob_src.vertices.shape),
                   blob_src.faces)
    cases["voxelize 5k tris, 64^3"] = lambda: voxelize(blob, 64)

    field = sample_on_grid(lambda p: np.linalg.norm(p, axis=1) - 0.3,
                           np.full(3, -0.45), np.full(3, 0.45), 0.9 / 63.0)
    cases["marching 64^3"] = lambda: marching_cubes(field)

    rig = default_rig(center=np.zeros(3), extent=1.0, resolution=512)
    cases["raster 5k tris, 512^2"] = lambda: render_mask(blob, rig["front"])

    comp = rng.normal(size=(48, 48, 48))
    valid = rng.random((48, 48, 48)) < 0.3
    cases["extrapolate 48^3 x4"] = lambda: extrapolate(comp.copy(),
                                                       valid.copy(), layers=4)

    n = 24
    phi = np.full((n, n, n), -1.0)
    for axis in range(3):
        sl = [slice(None)] * 3
        sl[axis] = 0
        phi[tuple(sl)] = 1.0
        sl[axis] = -1
        phi[tuple(sl)] = 1.0

    def pressure():
        grid = MacGrid(origin=np.zeros(3), dx=0.01, dims=(n, n, n),
                       cavity_phi=phi.copy())
        grid.fluid = ~grid.solid
        grid.fluid[:, :, n // 2:] = False
        vel_rng = np.random.default_rng(17)
        grid.u = vel_rng.normal(0.0, 0.5, grid.u.shape)
        grid.v = vel_rng.normal(0.0, 0.5, grid.v.shape)
        grid.w = vel_rng.normal(0.0, 0.5, grid.w.shape)
        pressure_project(grid, SimParams(dx=grid.dx))

    cases["pressure 24^3 shell"] = pressure
    return cases


def _child(repeat):
    import liquidlab.accel as accel

    results = {"numba": accel.NUMBA_ENABLED, "timings": {}}
    for name, fn in _cases().items():
        results["timings"][name] = _bench(fn, repeat)
    json.dump(results, sys.stdout)


def _run_child(flag, repeat):
    env = dict(os.environ, LIQUIDLAB_NUMBA=flag)
    out = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--as-child",
         "--repeat", str(repeat)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5,
                    help="timed repetitions per kernel (best-of), default 5")
    ap.add_argument("--as-child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)

    if args.as_child:
        _child(args.repeat)
        return 0

    fast = _run_child("1", args.repeat)
    slow = _run_child("0", args.repeat)
    if not fast["numba"]:
        print("warning: numba unavailable; both columns ran the numpy path")

    width = max(len(k) for k in fast["timings"])
    print(f"{'kernel':<{width}}  {'numba (ms)':>11}  {'numpy (ms)':>11}  "
          f"{'speedup':>8}")
    print("-" * (width + 37))
    for name in fast["timings"]:
        t_numba = fast["timings"][name] * 1e3
        t_numpy = slow["timings"][name] * 1e3
        ratio = t_numpy / t_numba if t_numba > 0 else float("inf")
        print(f"{name:<{width}}  {t_numba:>11.2f}  {t_numpy:>11.2f}  "
              f"{ratio:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
