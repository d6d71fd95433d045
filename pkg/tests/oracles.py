"""Independent reference implementations used by the tests.

These are written directly from the defining formulas, without importing the
package's numerical code, and are kept deliberately simple (plain
``scipy.integrate.quad``/``dblquad`` and exact rationals).  Do not "fix" them
to agree with the package: a disagreement is a finding.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy import integrate

# -- threshold and verdict table ---------------------------------------------------


def g_oracle(n, alpha, lam):
    """The piecewise threshold, evaluated branch by branch in exact arithmetic."""
    n, alpha, lam = Fraction(n), Fraction(alpha), Fraction(lam)
    first_break = (n - alpha) / (n - 2)
    second_break = n / (n - 2)
    if 0 < lam < first_break:
        return n / (n - 2)
    if first_break <= lam < second_break:
        return (2 * n - alpha) / (n - 2) - lam
    tail = 1 - (alpha - 2) * lam / n
    return tail if tail > 0 else Fraction(0)


def verdict_oracle(n, alpha, lam, sigma) -> str:
    """Dispatch table: sub-threshold, super-threshold, and the critical cases."""
    n, alpha, lam, sigma = (Fraction(v) for v in (n, alpha, lam, sigma))
    g = g_oracle(n, alpha, lam)
    if sigma > g:
        return "NoPointwiseBound"
    if sigma < g:
        return "HarmonicallyBounded" if lam < n / (n - 2) else "BoundedC1"
    if lam == (n - alpha) / (n - 2):
        return "CriticalNoBound"
    if lam < (n - alpha) / (n - 2):
        return "CriticalHarmonicallyBounded"
    if alpha > 2 and lam > n / (alpha - 2):
        return "CriticalNoBound"
    return "CriticalOpen"


# -- potentials ----------------------------------------------------------------------


def bump(t: float) -> float:
    return math.exp(1.0 - 1.0 / (1.0 - t * t)) if abs(t) < 1 else 0.0


def ball_potential_3d_bruteforce(r: float) -> float:
    """int_{|y|<1} |x - y|^{-1} dy at |x| = r, as a 2-D integral over (s, cos t)."""
    def inner(c, s):
        d2 = r * r + s * s - 2 * r * s * c
        return 2 * math.pi * s * s / math.sqrt(d2) if d2 > 0 else 0.0
    pts = [r] if 0 < r < 1 else None
    val = integrate.quad(lambda s: integrate.quad(inner, -1, 1, args=(s,), limit=200,
                                                  epsabs=0, epsrel=1e-11)[0],
                         0, 1, points=pts, limit=200, epsabs=0, epsrel=1e-11)[0]
    return val


def angular_kernel_polar(a: float, s: float, alpha: float) -> float:
    """int_{S^2} |xi - s w|^{-alpha} dw by 1-D quadrature over the polar angle."""
    f = lambda th: (a * a + s * s - 2 * a * s * math.cos(th)) ** (-alpha / 2) * math.sin(th)
    return 2 * math.pi * integrate.quad(f, 0, math.pi, limit=500, epsabs=0, epsrel=1e-12)[0]


def bump_potential_3d(r: float) -> float:
    """Unnormalised Newtonian potential of the bump in R^3 by the shell theorem."""
    k = min(r, 1.0)
    inner = integrate.quad(lambda s: bump(s) * s * s, 0, k, epsabs=0, epsrel=1e-12)[0]
    outer = integrate.quad(lambda s: bump(s) * s, k, 1, epsabs=0, epsrel=1e-12)[0] if k < 1 else 0.0
    return 4 * math.pi * ((inner / r if r > 0 else 0.0) + outer)


def riesz_of_one_in_ball(x, alpha: float) -> float:
    """int_{|y|<1} |x - y|^{-alpha} dy for |x| < 1 in R^3, by polar coordinates at x.

    Along direction w the ray leaves the ball at rho(w); the radial integral
    is rho^{3-alpha}/(3-alpha), leaving a 2-D integral over the sphere.
    """
    x = np.asarray(x, float)
    a = float(np.linalg.norm(x))

    def rho(c):  # c = cos of the angle between w and x
        return -a * c + math.sqrt(a * a * c * c - a * a + 1.0)

    f = lambda c: 2 * math.pi * rho(c) ** (3 - alpha) / (3 - alpha)
    return integrate.quad(f, -1, 1, epsabs=0, epsrel=1e-12, limit=200)[0]


def reference_integral_polar(a: float, R: float, lam: float, alpha: float) -> float:
    """int_{|eta|<R} Psi(|eta|)^lam |xi - eta|^{-alpha} d eta, |xi| = a, in R^3.

    Psi from :func:`bump_potential_3d`; the angular part by
    :func:`angular_kernel_polar`.  Far-field stretches use Psi = mass/s.
    """
    mass = 4 * math.pi * integrate.quad(lambda s: bump(s) * s * s, 0, 1,
                                        epsabs=0, epsrel=1e-12)[0]

    def psi(s):
        return bump_potential_3d(s) if s < 1 else mass / s

    def g(s):
        return psi(s) ** lam * s * s * angular_kernel_polar(a, s, alpha)

    edges = sorted({0.0, min(a, R), min(1.0, R), min(2.0, R), R})
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        if lo >= 2.0:
            h = lambda t: g(math.exp(t)) * math.exp(t)
            total += integrate.quad(h, math.log(lo), math.log(hi), limit=400,
                                    epsabs=0, epsrel=1e-9)[0]
        else:
            total += integrate.quad(g, lo, hi, limit=400, epsabs=0, epsrel=1e-9)[0]
    return total


def laplacian_fd(f, x, h: float) -> float:
    """Plain 7-point Laplacian (used only on closed-form fields)."""
    x = np.asarray(x, float)
    total = -6.0 * f(x)
    for e in np.eye(3):
        total += f(x + h * e) + f(x - h * e)
    return total / (h * h)
