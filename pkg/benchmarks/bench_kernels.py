"""Compiled vs numpy kernels: agreement and wall time.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel is timed on the workloads the quadrature produces at refinement
level 2 for a five-bump family; the maximum relative difference between the
two backends is printed alongside.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from choquard import _kernels_py
from choquard.quadrature import directions, _gauss

try:
    from choquard import _kernels
except ImportError:  # extension not built
    _kernels = None


def _workloads(rng):
    n = 3
    centers = np.array([[0.5 * 5.0 ** -j, 0, 0] for j in range(1, 6)])
    radii = np.abs(centers[:, 0]) / 8 * 0.5 ** np.arange(5)
    amps = 10.0 ** np.arange(5)
    pts = rng.uniform(-1, 1, size=(200_000, n))
    dirs, dw = directions(n, 2)
    glx, glw = _gauss(10)
    x = np.array([0.3, 0.1, -0.2])
    zero = np.zeros(n)
    return {
        "family_potential": lambda k: k.family_potential(pts, centers, radii, amps, n),
        "family_source": lambda k: k.family_source(pts, centers, radii, amps),
        "radial_profile": lambda k: k.radial_profile(np.linspace(0, 3, 2000), n),
        "ray_nodes": lambda k: k.ray_nodes(x, dirs, dw, zero, 1.0, centers, radii * 4,
                                           1e-3, 2.0, glx, glw, n - 1.0),
        "ball_nodes": lambda k: k.ball_nodes(centers[0], radii[0] * 4, radii[0] * 0.01, dirs,
                                             dw, 2.0, glx, glw, x, 1.0, n),
    }


def _max_rel(a, b) -> float:
    a = a if isinstance(a, tuple) else (a,)
    b = b if isinstance(b, tuple) else (b,)
    worst = 0.0
    for u, v in zip(a, b):
        u, v = np.asarray(u, float), np.asarray(v, float)
        if u.shape != v.shape:
            return float("inf")
        scale = np.maximum(np.abs(u), np.abs(v))
        mask = scale > 0
        if mask.any():
            worst = max(worst, float(np.max(np.abs(u - v)[mask] / scale[mask])))
    return worst


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled extension not available; nothing to compare")
        return 1
    work = _workloads(np.random.default_rng(0))
    print(f"{'kernel':<18}{'python [ms]':>13}{'cython [ms]':>13}{'speedup':>9}{'max rel diff':>14}")
    for name, fn in work.items():
        t_py = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat))
        t_cy = min(timeit.repeat(lambda: fn(_kernels), number=1, repeat=args.repeat))
        diff = _max_rel(fn(_kernels_py), fn(_kernels))
        print(f"{name:<18}{1e3 * t_py:>13.2f}{1e3 * t_cy:>13.2f}{t_py / t_cy:>9.1f}{diff:>14.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
