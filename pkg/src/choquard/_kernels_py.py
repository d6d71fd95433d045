"""Pure numpy implementation of the hot kernels.

Mirrors ``_kernels.pyx`` function for function; used when the compiled
extension is unavailable or ``CHOQUARD_PURE_PYTHON=1`` is set.
"""

import math

import numpy as np

GL_ORDER = 64
_GLX, _GLW = np.polynomial.legendre.leggauss(GL_ORDER)
# map to [0, 1]
_U = 0.5 * (_GLX + 1.0)
_UW = 0.5 * _GLW


def sphere_area(n):
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def bump(t):
    """exp(1 - 1/(1 - t^2)) on |t| < 1, zero elsewhere."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ti * ti))
    return out


def bump_mass(n):
    s = _U
    return sphere_area(n) * float(np.sum(_UW * bump(s) * s ** (n - 1)))


def radial_profile(t, n):
    """Newtonian potential of the standard bump at distance t (shell formula)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    area = sphere_area(n)
    mass = bump_mass(n)
    out = np.empty_like(t)
    far = t >= 1.0
    out[far] = mass * t[far] ** (2 - n)
    near = ~far
    tn = t[near][:, None]
    a = tn * _U
    inner = np.sum(tn * _UW * bump(a) * a ** (n - 1), axis=1)
    b = tn + (1.0 - tn) * _U
    outer = np.sum((1.0 - tn) * _UW * bump(b) * b, axis=1)
    tt = t[near]
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(tt > 0, inner / np.where(tt > 0, tt, 1.0) ** (n - 2), 0.0)
    out[near] = area * (scaled + outer)
    return out


TABLE_SIZE = 8192
_TABLES = {}


def profile_table(n):
    """Values and t-derivatives of the profile potential at TABLE_SIZE+1 nodes on [0, 1].

    The derivative is (2-n)|S| t^{1-n} int_0^t psi s^{n-1} ds.
    """
    if n not in _TABLES:
        t = np.linspace(0.0, 1.0, TABLE_SIZE + 1)
        vals = radial_profile(t, n)
        a = t[:, None] * _U
        inner = np.sum(t[:, None] * _UW * bump(a) * a ** (n - 1), axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            der = np.where(t > 0, (2 - n) * sphere_area(n) * inner / np.where(t > 0, t, 1.0) ** (n - 1), 0.0)
        _TABLES[n] = (vals, der)
    return _TABLES[n]


def _profile_fast(t, n):
    """Cubic Hermite interpolation of the profile potential inside the unit ball."""
    vals, der = profile_table(n)
    out = np.empty_like(t)
    far = t >= 1.0
    out[far] = bump_mass(n) * t[far] ** (2 - n)
    tn = t[~far] * TABLE_SIZE
    i = np.minimum(tn.astype(np.int64), TABLE_SIZE - 1)
    u = tn - i
    h = 1.0 / TABLE_SIZE
    u2, u3 = u * u, u * u * u
    out[~far] = ((2 * u3 - 3 * u2 + 1) * vals[i] + (u3 - 2 * u2 + u) * h * der[i]
                 + (-2 * u3 + 3 * u2) * vals[i + 1] + (u3 - u2) * h * der[i + 1])
    return out


def family_potential(points, centers, radii, amps, n):
    points = np.asarray(points, dtype=float)
    total = np.zeros(points.shape[0])
    for c, r, a in zip(centers, radii, amps):
        d = np.sqrt(np.sum((points - c) ** 2, axis=1))
        total += a * _profile_fast(d / r, n)
    return total


def family_source(points, centers, radii, amps):
    points = np.asarray(points, dtype=float)
    total = np.zeros(points.shape[0])
    for c, r, a in zip(centers, radii, amps):
        d = np.sqrt(np.sum((points - c) ** 2, axis=1))
        total += a * bump(d / r)
    return total


def _chord(x, w, c, radius):
    """Parameter interval where x + rho*w lies inside the ball, or None."""
    d = x - c
    b = float(np.dot(d, w))
    disc = b * b - (float(np.dot(d, d)) - radius * radius)
    if disc <= 0.0:
        return None
    s = math.sqrt(disc)
    return -b - s, -b + s


def ray_nodes(x, dirs, dir_w, dom_c, dom_r, hole_c, hole_r, rho_min, ratio, glx, glw, kexp):
    """Quadrature nodes for int_D F(y)|x-y|^{-alpha} dy in polar coordinates about x.

    Each ray is split at geometric ring radii rho_min*ratio^k and at hole
    boundaries; on each piece Gauss-Legendre runs in w = rho^kexp with
    kexp = n - alpha, which absorbs the kernel and the Jacobian.  The
    returned weights already contain 1/kexp and the direction weight.
    """
    x = np.asarray(x, float)
    pts, wts = [], []
    glx = np.asarray(glx, float)
    glw = np.asarray(glw, float)
    for w_dir, wt_dir in zip(dirs, dir_w):
        chord = _chord(x, w_dir, dom_c, dom_r)
        if chord is None:
            continue
        lo, hi = max(0.0, chord[0]), chord[1]
        if hi <= lo:
            continue
        cuts = [lo, hi]
        holes = []
        for hc, hr in zip(hole_c, hole_r):
            ch = _chord(x, w_dir, hc, hr)
            if ch is None or ch[1] <= lo or ch[0] >= hi:
                continue
            holes.append(ch)
            cuts.extend(v for v in ch if lo < v < hi)
        r = rho_min
        while r < hi:
            if r > lo:
                cuts.append(r)
            r *= ratio
        cuts.sort()
        for a, b in zip(cuts[:-1], cuts[1:]):
            if b <= a:
                continue
            mid = 0.5 * (a + b)
            if any(h0 < mid < h1 for h0, h1 in holes):
                continue
            wa, wb = a ** kexp, b ** kexp
            wn = wa + (wb - wa) * 0.5 * (glx + 1.0)
            rho = wn ** (1.0 / kexp)
            pts.append(x + rho[:, None] * w_dir)
            wts.append(wt_dir * 0.5 * (wb - wa) * glw / kexp)
    if not pts:
        return np.empty((0, x.size)), np.empty(0)
    return np.concatenate(pts), np.concatenate(wts)


def ball_nodes(center, radius, core, dirs, dir_w, ratio, glx, glw, x, alpha, n):
    """Nodes for int_{B(center, radius)} F(y)|x-y|^{-alpha} dy, x outside the ball.

    Radial rings shrink geometrically from ``radius`` to ``core``; the
    kernel is smooth on the ball so it is folded into the weights.
    """
    center = np.asarray(center, float)
    x = np.asarray(x, float)
    glx = np.asarray(glx, float)
    glw = np.asarray(glw, float)
    cuts = [radius]
    r = radius
    while r > core:
        r /= ratio
        cuts.append(r)
    cuts.append(0.0)
    cuts = np.array(cuts[::-1])
    a, b = cuts[:-1], cuts[1:]
    rho = (a[:, None] + (b - a)[:, None] * 0.5 * (glx + 1.0)).ravel()
    rw = ((b - a)[:, None] * 0.5 * glw).ravel() * rho ** (n - 1)
    dirs = np.asarray(dirs, float)
    pts = center + rho[:, None, None] * dirs[None, :, :]
    pts = pts.reshape(-1, center.size)
    w = (rw[:, None] * np.asarray(dir_w, float)[None, :]).ravel()
    dist = np.sqrt(np.sum((pts - x) ** 2, axis=1))
    return pts, w * dist ** (-alpha)
