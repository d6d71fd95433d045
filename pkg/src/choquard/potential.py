"""Newtonian and Riesz-type potentials of the standard bump.

Conventions: ``Psi(t)`` is the unnormalised Newtonian potential
``int psi(zeta) |eta - zeta|^{2-n} d zeta`` of the radial bump at ``|eta| = t``.
The fundamental solution of ``-Laplace`` is ``c_n |x|^{2-n}`` with
``c_n = 1/(n (n-2) omega_n)``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, interpolate, optimize

from . import kernels
from .errors import ParameterError, StencilError

SAFETY = 0.9


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def newton_constant(n: int) -> float:
    """c_n = 1/(n(n-2)omega_n); 1/(4 pi) in three dimensions."""
    return 1.0 / (n * (n - 2) * unit_ball_volume(n))


class ProfileKind(enum.Enum):
    SmoothStandard = "smooth_standard"
    # validation fixture only: indicator of the closed unit ball
    ConstantBall = "constant_ball"


@dataclass(frozen=True)
class BumpProfile:
    kind: ProfileKind = ProfileKind.SmoothStandard

    def __call__(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        if self.kind is ProfileKind.ConstantBall:
            return np.where(t <= 1.0, 1.0, 0.0)
        return kernels.bump(t)

    def mass(self, n: int) -> float:
        """Integral of the profile over R^n."""
        if self.kind is ProfileKind.ConstantBall:
            return unit_ball_volume(n)
        return kernels.bump_mass(n)

    def potential(self, t, n: int) -> np.ndarray:
        """Vectorised Psi(t)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.kind is ProfileKind.SmoothStandard:
            return kernels.radial_profile(t, n)
        return np.array([_shell_formula(self, float(r), n) for r in t])


SMOOTH = BumpProfile()


def _shell_formula(profile: BumpProfile, r: float, n: int) -> float:
    area = kernels.sphere_area(n)
    k = min(r, 1.0)
    inner = integrate.quad(lambda s: float(profile(s)) * s ** (n - 1), 0.0, k,
                           epsabs=0, epsrel=1e-13, limit=200)[0] if k > 0 else 0.0
    outer = integrate.quad(lambda s: float(profile(s)) * s, k, 1.0,
                           epsabs=0, epsrel=1e-13, limit=200)[0] if k < 1 else 0.0
    head = inner / r ** (n - 2) if r > 0 else 0.0
    return area * (head + outer)


def radial_newtonian_potential(profile: BumpProfile, r: float, n: int) -> float:
    """Psi(r) by the shell theorem (exact reduction in every dimension n >= 3)."""
    if n < 3:
        raise ParameterError("n must be >= 3")
    if r < 0:
        raise ParameterError(f"radius must be nonnegative, got {r}")
    return float(profile.potential([r], n)[0])


class RadialPotentialTable:
    """Psi tabulated on 2048 radii (0 plus log-spaced up to 1e6).

    Interpolation is monotone cubic in (log r, log Psi); beyond the last
    radius the exact far-field law ``mass * r^{2-n}`` is used.
    """

    def __init__(self, profile: BumpProfile = SMOOTH, n: int = 3, size: int = 2048,
                 r_min: float = 1e-6, r_max: float = 1e6):
        self.profile = profile
        self.n = n
        self.radii = np.concatenate([[0.0], np.geomspace(r_min, r_max, size - 1)])
        self.values = profile.potential(self.radii, n)
        self.mass = profile.mass(n)
        self._interp = interpolate.PchipInterpolator(
            np.log(self.radii[1:]), np.log(self.values[1:]))

    def __call__(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        lo = r < self.radii[1]
        hi = r > self.radii[-1]
        mid = ~(lo | hi)
        if lo.any():
            out[lo] = self.profile.potential(r[lo], self.n)
        out[hi] = self.mass * r[hi] ** (2 - self.n)
        out[mid] = np.exp(self._interp(np.log(r[mid])))
        return out

    def sandwich(self) -> tuple[float, float]:
        """Fitted (C1, C2) with C1 <= Psi(r)(r^{n-2} + 1) <= C2 over the table."""
        scaled = self.values * (self.radii ** (self.n - 2) + 1.0)
        return float(scaled.min()), float(scaled.max())


@lru_cache(maxsize=None)
def potential_table(n: int = 3) -> RadialPotentialTable:
    return RadialPotentialTable(SMOOTH, n)


def angular_riesz_kernel(xi_norm: float, s: float, alpha: float, n: int = 3) -> float:
    """int over the unit sphere of |xi - s omega|^{-alpha} d omega, |xi| = xi_norm."""
    if s <= 0 or xi_norm < 0:
        raise ParameterError("need s > 0 and xi_norm >= 0")
    if not 0 < alpha < n:
        raise ParameterError(f"alpha must lie in (0, {n})")
    a = float(xi_norm)
    s = float(s)
    if n != 3:
        return _angular_quadrature(a, s, alpha, n)
    big, small = max(a, s), min(a, s)
    rho = small / big
    if rho == 0.0:
        return 4.0 * math.pi * big ** (-alpha)
    if rho == 1.0 and alpha >= 2.0:
        return math.inf
    if rho < 1e-4:
        return 4.0 * math.pi * big ** (-alpha) * (1.0 + alpha * (alpha - 1.0) / 6.0 * rho * rho)
    if alpha == 2.0:
        return 4.0 * math.pi * math.atanh(rho) / (a * s)
    beta = 2.0 - alpha
    if rho == 1.0:
        return 2.0 * math.pi * big ** beta * 2.0 ** beta / (beta * a * s)
    # (1+rho)^beta - (1-rho)^beta without cancellation
    diff = math.expm1(beta * math.log1p(rho)) - math.expm1(beta * math.log1p(-rho))
    return 2.0 * math.pi * big ** beta * diff / (beta * a * s)


def _angular_quadrature(a: float, s: float, alpha: float, n: int) -> float:
    area = kernels.sphere_area(n - 1)
    f = lambda th: (a * a + s * s - 2 * a * s * math.cos(th)) ** (-alpha / 2) * math.sin(th) ** (n - 2)
    val = integrate.quad(f, 0.0, math.pi, epsabs=0, epsrel=1e-12, limit=400)[0]
    return area * val


def scaled_reference_integral(profile: BumpProfile, xi, R_over_r: float, lam: float,
                              alpha: float, n: int = 3,
                              table: RadialPotentialTable | None = None) -> float:
    """I(xi) = int_{|eta| < R} Psi(eta)^lam |xi - eta|^{-alpha} d eta.

    Reduced to a radial integral of ``angular_riesz_kernel`` against the
    tabulated Psi.
    """
    if R_over_r <= 0:
        raise ParameterError("R_over_r must be positive")
    a = float(np.linalg.norm(np.atleast_1d(xi)))
    if a > 1.0 + 1e-12:
        raise ParameterError("xi must lie in the closed unit ball")
    return _radial_segments(profile, a, [R_over_r], lam, alpha, n, table)[-1]


def _radial_segments(profile, a, radii, lam, alpha, n, table=None):
    """Cumulative I(a, R) for an increasing list of R values."""
    if profile.kind is ProfileKind.SmoothStandard:
        tab = table if table is not None else potential_table(n)
        psi = lambda s: float(tab(s)[0])
    else:
        psi = lambda s: _shell_formula(profile, s, n)

    def g(s):
        if s <= 0:
            return 0.0
        k = angular_riesz_kernel(a, s, alpha, n)
        return psi(s) ** lam * s ** (n - 1) * k

    out = []
    total = 0.0
    prev = 0.0
    for R in radii:
        lo, hi = prev, float(R)
        total += _integrate_piece(g, lo, hi, a)
        out.append(total)
        prev = hi
    return out


def _integrate_piece(g, lo, hi, a):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return _integrate_piece_raw(g, lo, hi, a)


def _integrate_piece_raw(g, lo, hi, a):
    if hi <= lo:
        return 0.0
    pts = sorted({p for p in (a, 1.0, 2.0) if lo < p < hi})
    edges = [lo, *pts, hi]
    total = 0.0
    for x0, x1 in zip(edges[:-1], edges[1:]):
        if x0 >= 2.0 and x1 / x0 > 4.0:
            # logarithmic variable for long far-field stretches
            h = lambda t: g(math.exp(t)) * math.exp(t)
            total += integrate.quad(h, math.log(x0), math.log(x1), epsabs=0, epsrel=1e-10,
                                    limit=400)[0]
        else:
            total += integrate.quad(g, x0, x1, epsabs=0, epsrel=1e-10, limit=400)[0]
    return total


# -- the cutoff and the solution potential --------------------------------

CUTOFF_INNER = 2.0
CUTOFF_OUTER = 3.0


def cutoff(radius):
    """Quintic smoothstep: 1 on [0, 2], 0 on [3, inf), C^2 in between."""
    r = np.asarray(radius, dtype=float)
    t = np.clip((r - CUTOFF_INNER) / (CUTOFF_OUTER - CUTOFF_INNER), 0.0, 1.0)
    return 1.0 - t ** 3 * (10.0 - 15.0 * t + 6.0 * t * t)


def newtonian_potential_of_source(family, x) -> np.ndarray:
    """Cutoff times the Newtonian potential of a bump family's source.

    Bump j contributes ``c_n M_j r_j^2 Psi(|x - x_j|/r_j)`` by the change of
    variables y = x_j + r_j eta.  ``x`` may be a single point or an (N, n)
    array.
    """
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    amps = newton_constant(family.n) * family.amplitudes * family.radii ** 2
    vals = kernels.family_potential(pts, family.centers, family.radii, amps, family.n)
    return vals * cutoff(np.sqrt(np.sum(pts * pts, axis=1)))


# -- finite differences ----------------------------------------------------

def fd_laplacian(u: Callable[[np.ndarray], np.ndarray], x, h: float,
                 singular_points: Sequence = ((0.0, 0.0, 0.0),),
                 seams: Sequence[float] = (CUTOFF_INNER, CUTOFF_OUTER)) -> float:
    """Second-order central-difference Laplacian on the 2n-point stencil."""
    if h <= 0:
        raise ParameterError("step must be positive")
    x = np.asarray(x, dtype=float)
    n = x.size
    for sp in singular_points:
        if np.max(np.abs(x - np.resize(np.asarray(sp, float), n))) <= h:
            raise StencilError(f"stencil at {x.tolist()} with h={h} touches a singular point")
    eye = np.eye(n) * h
    pts = np.vstack([x, x + eye, x - eye])
    norms = np.sqrt(np.sum(pts * pts, axis=1))
    for seam in seams:
        if norms.min() < seam <= norms.max():
            raise StencilError(f"stencil straddles the cutoff seam |x| = {seam}")
    vals = np.asarray(u(pts), dtype=float)
    return float((np.sum(vals[1:]) - 2 * n * vals[0]) / (h * h))


# -- constants of the construction ------------------------------------------

# largest bump radius the sequence builder can emit: |x_1|/8 with |x_1| = 1/10
R_OVER_R_MIN = 40.0


@dataclass
class Constants:
    A: float
    B: float
    tag: str
    A_raw: float
    B_raw: float
    xi_star: float
    details: dict = field(default_factory=dict)


def regime_of(n: int, alpha, lam) -> str:
    """Tag name of the lambda range (SubLow, MidCritLow, MidSloped, MidTop, High)."""
    low = (n - alpha) / (n - 2)
    top = n / (n - 2)
    if lam < low:
        return "SubLow"
    if lam == low:
        return "MidCritLow"
    if lam < top:
        return "MidSloped"
    if lam == top:
        return "MidTop"
    return "High"


def growth_exponent(n: int, alpha: float, lam: float) -> float:
    """n - alpha - (n-2) lam, the exponent of r in the scaled reference integral."""
    return n - alpha - (n - 2) * lam


def _xi_grid():
    return np.linspace(0.0, 1.0, 21)


def constant_A(profile: BumpProfile = SMOOTH, n: int = 3) -> tuple[float, float, float]:
    """(A, A_raw, xi_star): A_raw = c_n min_{|xi|<=1} Psi(|xi|), A = 0.9 A_raw."""
    xs = np.linspace(0.0, 1.0, 101)
    vals = profile.potential(xs, n)
    i = int(np.argmin(vals))
    raw = newton_constant(n) * float(vals[i])
    return SAFETY * raw, raw, float(xs[i])


def _B_ratio(profile, a, lam, alpha, n, tag, radii):
    """Normalised reference integral / growth factor at each R in ``radii``."""
    if tag == "High":
        return np.array(_radial_segments(profile, a, [1.0], lam, alpha, n))
    s = growth_exponent(n, alpha, lam)
    cum = np.array(_radial_segments(profile, a, radii, lam, alpha, n))
    R = np.asarray(radii)
    if tag == "SubLow":
        # r^s I(1/(2r)) = (2R)^{-s} I(R)
        return cum * (2 * R) ** (-s)
    if tag == "MidCritLow":
        return cum / np.log(2 * R)
    return cum


def constants_A_B(profile: BumpProfile, lam, alpha, n: int = 3, tag: str | None = None,
                  R_grid: Sequence[float] | None = None) -> Constants:
    """Safe positive constants A and B for the lower bounds on a bump.

    A bounds ``u >= A eps/(r^{n-2} delta)`` (or ``A eps / r^{n/lam}``) on the
    bump; B bounds the ball-restricted convolution from below divided by the
    regime's growth factor.  B is the minimum over |xi| <= 1 and over all
    admissible scale ratios R = 1/(2r) >= 40 (R = 1 for High).  Both carry a
    0.9 safety factor.
    """
    lam_f, alpha_f = float(lam), float(alpha)
    tag = tag or regime_of(n, alpha, lam)
    A, A_raw, _ = constant_A(profile, n)
    if R_grid is None:
        R_grid = R_OVER_R_MIN * 4.0 ** np.arange(0, 48)
    R_grid = list(R_grid)
    cn_lam = newton_constant(n) ** lam_f

    def worst(a):
        return float(np.min(_B_ratio(profile, a, lam_f, alpha_f, n, tag, R_grid)))

    grid = _xi_grid()
    vals = np.array([worst(a) for a in grid])
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(worst, bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-4})
    a_star, best = (float(res.x), float(res.fun)) if res.fun < vals[i] else (float(grid[i]), float(vals[i]))
    details = {"xi_grid_min": float(vals.min()), "xi_grid_argmin": float(grid[i])}
    if tag == "SubLow":
        s = growth_exponent(n, alpha_f, lam_f)
        limit = 2.0 ** (-s) * kernels.sphere_area(n) * profile.mass(n) ** lam_f / s
        details["asymptote"] = limit
        best = min(best, limit)
    elif tag == "MidCritLow":
        limit = kernels.sphere_area(n) * profile.mass(n) ** lam_f
        details["asymptote"] = limit
        best = min(best, limit)
    B_raw = cn_lam * best
    return Constants(A=A, B=SAFETY * B_raw, tag=tag, A_raw=A_raw, B_raw=B_raw,
                     xi_star=a_star, details=details)
