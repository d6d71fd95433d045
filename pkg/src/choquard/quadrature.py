"""Singularity-aware quadrature for ``int_D u(y)^lam |x - y|^{-alpha} dy``.

The integral is written in polar coordinates around ``x``.  Along each ray
the radial variable is split into geometric rings (ratio 2) and Gauss-Legendre
runs in ``w = rho^{n - alpha}``, which absorbs both the kernel singularity and
the Jacobian.  Small, sharply peaked features of the field (the bumps) that
do not contain ``x`` are cut out of the rays and integrated on their own
ball-centred grids, so that a tiny bump far from ``x`` is never missed.

Refinement doubles the angular resolution and raises the radial order; the
error estimate is the difference of the last two levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .errors import ParameterError, QuadratureError


@dataclass(frozen=True)
class Feature:
    """A localised structure of a field: it lives in B(center, core).

    ``cap`` bounds the radius of the ball carved out around it.  ``core = 0``
    with ``cap > 0`` marks an integrable point singularity; ``cap = 0`` only
    sets the length scale of the rings near ``center``.  A non-empty
    ``shells`` makes the feature a cluster: a ball whose radius is picked from
    ``shells`` and which is integrated on its own polar grid, with the holes
    of the features inside it cut out.
    """

    center: tuple
    core: float
    cap: float
    shells: tuple = ()


@dataclass(frozen=True)
class QuadratureSpec:
    max_depth: int = 3
    target_rel: float = 5e-3
    ring_ratio: float = 2.0
    base_theta: int = 8
    base_order: int = 6
    inner_fraction: float = 0.05
    core_fraction: float = 0.01

    def __post_init__(self):
        if self.max_depth < 1:
            raise ParameterError("max_depth must be >= 1")
        if not self.ring_ratio > 1:
            raise ParameterError("ring_ratio must exceed 1")
        if not self.target_rel > 0:
            raise ParameterError("target_rel must be positive")


@dataclass(frozen=True)
class ScalarSample:
    point: tuple
    value: float
    error: float
    level: int = 0

    def __post_init__(self):
        if not self.error >= 0:
            raise ValueError("error estimate must be nonnegative")


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float


@lru_cache(maxsize=64)
def directions(n: int, level: int, base_theta: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Unit directions and weights summing to |S^{n-1}|.

    n = 3: Gauss-Legendre in cos(theta) times a uniform azimuth.  n >= 4:
    fixed-seed Monte Carlo directions with equal weights.
    """
    if n == 3:
        nt = base_theta * 2 ** level
        nphi = 2 * nt
        ct, wt = np.polynomial.legendre.leggauss(nt)
        phi = (np.arange(nphi) + 0.5) * 2 * math.pi / nphi
        st = np.sqrt(1 - ct * ct)
        d = np.stack([np.outer(st, np.cos(phi)).ravel(),
                      np.outer(st, np.sin(phi)).ravel(),
                      np.repeat(ct, nphi)], axis=1)
        w = np.repeat(wt, nphi) * (2 * math.pi / nphi)
        return d, w
    count = 256 * 4 ** level
    rng = np.random.default_rng(12345 + level)
    d = rng.standard_normal((count, n))
    d /= np.linalg.norm(d, axis=1)[:, None]
    return d, np.full(count, kernels.sphere_area(n) / count)


@lru_cache(maxsize=64)
def _gauss(q: int):
    return np.polynomial.legendre.leggauss(q)


def _features_of(u) -> list[Feature]:
    return list(getattr(u, "features", ()) or ())


# grading depth of a hole around a point singularity
POINT_DEPTH = 2.0 ** -48


@dataclass
class _Cluster:
    center: np.ndarray
    radius: float
    scale: float
    holes: list


def _inside(c, ball_c, ball_r) -> bool:
    return float(np.linalg.norm(c - ball_c)) < ball_r


def _layout(u, x, n, domain: Ball, exclude: Sequence[Ball], spec: QuadratureSpec, pole=None):
    """Holes, clusters and the inner ring scale for a polar grid around ``pole``.

    Each hole is (center, radius, innermost ring radius) and is integrated on
    its own ball grid.  ``pole`` is ``x`` unless ``x`` lies well outside the
    domain; neither is ever inside a hole or a cluster.
    """
    pole = x if pole is None else pole
    feats = _features_of(u)
    dom_c = np.asarray(domain.center, float)
    holes, clusters = [], []
    scale = domain.radius
    for f in feats:
        c = np.asarray(f.center, float)
        d = float(np.linalg.norm(x - c))
        dp = float(np.linalg.norm(pole - c))
        if f.shells:
            if any(_inside(c, np.asarray(b.center, float), b.radius) for b in exclude):
                continue
            room = domain.radius - float(np.linalg.norm(c - dom_c))
            limit = min(f.cap, d / 2, dp / 2, room)
            fits = [g for g in f.shells if g <= limit]
            if fits and (dp > 0 or f.core > 0):
                clusters.append(_Cluster(c, max(fits), 0.0, []))
                scale = min(scale, max(fits) if dp > max(fits) else dp)
                continue
        if dp > 0 or f.core > 0:
            scale = min(scale, max(f.core, dp))
        elif f.cap > 0:
            # point singularity at the pole: grade the rings all the way in
            scale = min(scale, POINT_DEPTH * domain.radius)
        if f.cap <= 0 or f.shells or min(d, dp) <= 2 * f.core:
            continue
        if any(_inside(c, np.asarray(b.center, float), b.radius) for b in exclude):
            continue
        room = domain.radius - float(np.linalg.norm(c - dom_c))
        radius = min(f.cap, d / 2, dp / 2, room)
        if radius <= f.core:
            continue
        inner = spec.core_fraction * f.core if f.core > 0 else POINT_DEPTH * radius
        holes.append((c, radius, inner))
    for cl in clusters:
        cl.holes = [h for h in holes if _inside(h[0], cl.center, cl.radius)]
        dists = [max(float(np.linalg.norm(h[0] - cl.center)), 0.0) for h in cl.holes]
        cl.scale = min([d for d in dists if d > 0] + [cl.radius])
    return holes, clusters, scale


def _level_value(u, x, lam, alpha, n, spec, domain, exclude, layout, level, pole):
    holes, clusters, scale = layout
    dirs, dw = directions(n, level, spec.base_theta)
    q = spec.base_order + 2 * level
    glx, glw = _gauss(q)
    nested = {id(h) for cl in clusters for h in cl.holes}
    outer = [h for h in holes if id(h) not in nested]
    hc = np.array([h[0] for h in outer] + [cl.center for cl in clusters]
                  + [np.asarray(b.center, float) for b in exclude], float).reshape(-1, n)
    hr = np.array([h[1] for h in outer] + [cl.radius for cl in clusters]
                  + [b.radius for b in exclude], float)
    exterior = pole is not x
    kexp = n if exterior else n - alpha
    pts, wts = kernels.ray_nodes(pole, dirs, dw, np.asarray(domain.center, float), domain.radius,
                                 hc, hr, spec.inner_fraction * scale, spec.ring_ratio,
                                 glx, glw, kexp)
    if exterior:
        wts = wts * np.sum((pts - x) ** 2, axis=1) ** (-0.5 * alpha)
    total = _weighted_sum(u, pts, wts, lam)
    for cl in clusters:
        chc = np.array([h[0] for h in cl.holes], float).reshape(-1, n)
        chr_ = np.array([h[1] for h in cl.holes], float)
        cp, cw = kernels.ray_nodes(cl.center, dirs, dw, cl.center, cl.radius, chc, chr_,
                                   spec.inner_fraction * cl.scale, spec.ring_ratio, glx, glw, n)
        cw = cw * np.sum((cp - x) ** 2, axis=1) ** (-0.5 * alpha)
        total += _weighted_sum(u, cp, cw, lam)
    for c, radius, inner in holes:
        bp, bw = kernels.ball_nodes(c, radius, inner, dirs, dw,
                                    spec.ring_ratio, glx, glw, x, alpha, n)
        total += _weighted_sum(u, bp, bw, lam)
    return total


def _pole(x, domain: Ball, exclude: Sequence[Ball]):
    """Polar centre: x, or the domain centre when x is well outside the domain."""
    c = np.asarray(domain.center, float)
    if not exclude and np.linalg.norm(x - c) > 1.25 * domain.radius:
        return c
    return x


def _weighted_sum(u, pts, wts, lam) -> float:
    if len(wts) == 0:
        return 0.0
    vals = np.asarray(u(pts), dtype=float)
    if np.any(vals < 0):
        raise ParameterError("field must be nonnegative for fractional powers")
    # fixed summation order: nodes are generated deterministically
    return float(np.dot(wts, vals ** lam))


def riesz_convolution(u: Callable[[np.ndarray], np.ndarray], x, alpha: float, lam: float,
                      n: int = 3, spec: QuadratureSpec | None = None,
                      domain: Ball | None = None, exclude: Sequence[Ball] = ()) -> ScalarSample:
    """``int_{domain minus exclude} u(y)^lam |x - y|^{-alpha} dy`` with an error estimate.

    ``u`` maps an (N, n) array of points to N nonnegative values and may
    carry a ``features`` list (see :class:`Feature`).  The domain defaults to
    the unit ball.  Refinement stops once the two-level difference falls
    below ``target_rel`` relative, or at ``max_depth``; an estimate that
    fails to decrease while still above target raises :class:`QuadratureError`.
    """
    if not 0 < alpha < n:
        raise ParameterError(f"alpha must lie in (0, {n})")
    if not lam > 0:
        raise ParameterError("lambda must be positive")
    spec = spec or QuadratureSpec()
    domain = domain or Ball(tuple([0.0] * n), 1.0)
    x = np.asarray(x, dtype=float).ravel()
    if x.size != n:
        raise ParameterError(f"point must have {n} coordinates")
    pole = _pole(x, domain, exclude)
    layout = _layout(u, x, n, domain, exclude, spec, pole)
    if layout[2] <= 0:
        raise ParameterError("evaluation point coincides with a point singularity")
    args = (u, x, lam, alpha, n, spec, domain, exclude, layout)
    prev = _level_value(*args, 0, pole)
    cur = _level_value(*args, 1, pole)
    err = abs(cur - prev)
    level = 1
    while err > spec.target_rel * abs(cur) and level < spec.max_depth:
        level += 1
        nxt = _level_value(*args, level, pole)
        new_err = abs(nxt - cur)
        if new_err >= err and new_err > spec.target_rel * abs(nxt):
            raise QuadratureError(
                f"refinement stalled at {x.tolist()}: error {err:.3e} -> {new_err:.3e}")
        cur, err = nxt, new_err
    return ScalarSample(tuple(float(v) for v in x), cur, err, level)


def two_level(u, x, alpha, lam, n=3, spec=None, domain=None, exclude=()) -> tuple[float, float, float]:
    """Values at refinement levels (max_depth - 1, max_depth) and their difference.

    Used for consistency tests of the error estimate.
    """
    spec = spec or QuadratureSpec()
    domain = domain or Ball(tuple([0.0] * n), 1.0)
    x = np.asarray(x, float).ravel()
    pole = _pole(x, domain, exclude)
    layout = _layout(u, x, n, domain, exclude, spec, pole)
    args = (u, x, lam, alpha, n, spec, domain, exclude, layout)
    a = _level_value(*args, spec.max_depth - 1, pole)
    b = _level_value(*args, spec.max_depth, pole)
    return a, b, abs(b - a)


class ConstantField:
    """u(y) = value everywhere (validation fixture)."""

    features: tuple = ()

    def __init__(self, value: float = 1.0):
        self.value = float(value)

    def __call__(self, pts):
        return np.full(len(pts), self.value)
