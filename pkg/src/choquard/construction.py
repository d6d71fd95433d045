"""Blow-up families: bump sequences whose potential solves the inequality.

A family places J bumps ``M_j psi((x - x_j)/r_j)`` at ``|x_j| = 5^{-j}/2``
on the first axis with weights ``eps_j = 2^{-j}`` and shrinks each radius by
halving until the regime's pair of constraints holds (with 10% slack):

* a growth constraint making ``u(x_j)`` exceed ``j phi(|x_j|)``;
* a balance constraint making ``-Laplace u <= (|x|^{-alpha} * u^lam) u^sigma``
  on the bump.

Constraints are evaluated in log space, so radii far below the float range
can be recognised as infeasible instead of silently underflowing.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import kernels
from .errors import InfeasibleError, ParameterError, RegimeError
from .potential import (SMOOTH, BumpProfile, Constants, CUTOFF_INNER, CUTOFF_OUTER,
                        constants_A_B, newton_constant, newtonian_potential_of_source,
                        _radial_segments)
from .quadrature import Feature
from .regions import Params, Verdict, classify, _equal

SLACK = 1.1
# holes of radius 0.6|x_j| around the bumps stay disjoint: 0.6 + 0.6/5 < 4/5
HOLE_FRACTION = 0.6
MAX_HALVINGS = 10_000
LOG2 = math.log(2.0)


class RegimeTag(enum.Enum):
    SubLow = "SubLow"
    MidCritLow = "MidCritLow"
    MidSloped = "MidSloped"
    MidTop = "MidTop"
    High = "High"

    @property
    def power_amplitudes(self) -> bool:
        """High families use amplitudes eps/r^{2+n/lam} instead of eps/(r^n delta)."""
        return self is RegimeTag.High


def regime_tag(params: Params) -> RegimeTag:
    exact = params.exact
    lam, low, top = params.lam, params.lam_low, params.lam_top
    if _equal(lam, low, exact):
        return RegimeTag.MidCritLow
    if _equal(lam, top, exact):
        return RegimeTag.MidTop
    if lam < low:
        return RegimeTag.SubLow
    if lam < top:
        return RegimeTag.MidSloped
    return RegimeTag.High


# -- growth targets ------------------------------------------------------------

class GrowthKind(enum.Enum):
    LogReciprocal = "LogReciprocal"
    PowerReciprocal = "PowerReciprocal"
    Tabulated = "Tabulated"


@dataclass(frozen=True)
class GrowthTarget:
    """phi on (0, 1), unbounded as t -> 0+.

    ``Tabulated`` interpolates log phi linearly in log t between the given
    samples and clamps outside them.
    """

    kind: GrowthKind = GrowthKind.LogReciprocal
    exponent: float | None = None
    table: tuple = ()

    def __post_init__(self):
        if self.kind is GrowthKind.PowerReciprocal and not (self.exponent and self.exponent > 0):
            raise ParameterError("PowerReciprocal needs a positive exponent")
        if self.kind is GrowthKind.Tabulated:
            ts = [t for t, _ in self.table]
            vs = [v for _, v in self.table]
            if len(ts) < 2 or any(not 0 < t < 1 for t in ts) or any(v <= 0 for v in vs):
                raise ParameterError("tabulated phi needs >= 2 samples with t in (0,1), phi > 0")
            if sorted(ts) != ts:
                raise ParameterError("tabulated phi samples must be sorted by t")

    @classmethod
    def log(cls):
        return cls(GrowthKind.LogReciprocal)

    @classmethod
    def power(cls, exponent: float):
        return cls(GrowthKind.PowerReciprocal, float(exponent))

    @classmethod
    def tabulated(cls, samples):
        return cls(GrowthKind.Tabulated, table=tuple((float(t), float(v)) for t, v in samples))

    def log_value(self, t: float) -> float:
        """log phi(t)."""
        if not 0 < t < 1:
            raise ParameterError("phi is defined on (0, 1)")
        if self.kind is GrowthKind.LogReciprocal:
            return math.log(math.log(1.0 / t))
        if self.kind is GrowthKind.PowerReciprocal:
            return -self.exponent * math.log(t)
        lt = np.log([p[0] for p in self.table])
        lv = np.log([p[1] for p in self.table])
        return float(np.interp(math.log(t), lt, lv))

    def __call__(self, t: float) -> float:
        return math.exp(self.log_value(t))

    def to_json(self) -> dict:
        out = {"kind": self.kind.value}
        if self.exponent is not None:
            out["exponent"] = self.exponent
        if self.table:
            out["table"] = [list(p) for p in self.table]
        return out

    @classmethod
    def from_json(cls, d: dict) -> "GrowthTarget":
        kind = GrowthKind(d["kind"])
        return cls(kind, d.get("exponent"), tuple(tuple(p) for p in d.get("table", ())))


# -- the family ----------------------------------------------------------------

@dataclass
class BumpFamily:
    params: Params
    tag: RegimeTag
    centers: np.ndarray
    radii: np.ndarray
    eps: np.ndarray
    amplitudes: np.ndarray
    deltas: np.ndarray
    constants: tuple
    phi: GrowthTarget = field(default_factory=GrowthTarget.log)
    profile: BumpProfile = SMOOTH
    halvings: tuple = ()

    def __post_init__(self):
        self.centers = np.atleast_2d(np.asarray(self.centers, float))
        for name in ("radii", "eps", "amplitudes", "deltas"):
            setattr(self, name, np.asarray(getattr(self, name), float).ravel())
        self._check()

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def J(self) -> int:
        return len(self.radii)

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.centers, axis=1)

    def _check(self):
        J = len(self.radii)
        if J < 1 or self.centers.shape != (J, self.n):
            raise ParameterError("inconsistent bump arrays")
        if not (np.all(np.isfinite(self.amplitudes)) and np.all(self.radii > 0)):
            raise ParameterError("radii must be positive and amplitudes finite")
        x = self.norms
        if np.any(x >= 0.5) or np.any(4 * x[1:] >= x[:-1]):
            raise ParameterError("centers must satisfy 0 < 4|x_{j+1}| < |x_j| < 1/2")
        if np.any(self.radii >= x / 4):
            raise ParameterError("radii must satisfy r_j < |x_j|/4")
        if np.any(x[:-1] - self.radii[:-1] <= x[1:] + self.radii[1:]):
            raise ParameterError("bump supports overlap")

    # field protocol for the quadrature
    @property
    def features(self) -> list[Feature]:
        feats = [Feature(tuple(c), float(r), HOLE_FRACTION * float(nx))
                 for c, r, nx in zip(self.centers, self.radii, self.norms)]
        # the origin cluster may end in any gap between consecutive bump holes
        x = self.norms
        gaps = [0.5 * ((1 - HOLE_FRACTION) * a + (1 + HOLE_FRACTION) * b)
                for a, b in zip(x, list(x[1:]) + [0.0])]
        # or swallow every bump when the evaluation point is far enough away
        outer = (1 + HOLE_FRACTION) * x[0] * 1.05
        while outer < 1.0:
            gaps.append(outer)
            outer *= 1.5
        gaps = tuple(sorted(float(g) for g in gaps))
        feats.append(Feature(tuple([0.0] * self.n), 0.0, 1.0, gaps))
        return feats

    def __call__(self, pts) -> np.ndarray:
        return newtonian_potential_of_source(self, pts)

    def source(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, float))
        return kernels.family_source(pts, self.centers, self.radii, self.amplitudes)

    def local(self, j: int) -> "LocalView":
        """The field near bump j in the coordinates xi = (x - x_j)/r_j."""
        return LocalView(self, j)

    def with_radii(self, radii) -> "BumpFamily":
        """Copy with new radii and amplitudes recomputed from the same rule."""
        radii = np.asarray(radii, float)
        deltas = np.array([_delta(self.tag, self.n, math.log(r)) for r in radii])
        amps = np.array([_amplitude_log(self.tag, self.params, e, math.log(r), d)
                         for e, r, d in zip(self.eps, radii, deltas)])
        return BumpFamily(self.params, self.tag, self.centers.copy(), radii, self.eps.copy(),
                          np.exp(amps), deltas, self.constants, self.phi, self.profile,
                          self.halvings)


class LocalView:
    """u and f at ``x_j + r_j xi``, evaluated without forming x.

    Late radii sit far below the spacing of doubles near ``x_j``, so points
    of the bump cannot be represented in absolute coordinates.  Here the
    bump's own term is a function of xi alone; the other terms and the cutoff
    vary on the scale ``|x_j|`` and are frozen at their values at ``x_j``
    (their relative change across the view is about ``r_j/|x_j|``).
    Derivatives in xi carry a factor ``r_j`` per order.
    """

    def __init__(self, family: BumpFamily, j: int):
        if not 0 <= j < family.J:
            raise ParameterError(f"bump index {j} out of range")
        self.family, self.j = family, j
        self.radius = float(family.radii[j])
        self.amplitude = float(family.amplitudes[j])
        n = family.n
        self._origin = np.zeros((1, n))
        self._own = newton_constant(n) * self.amplitude * self.radius ** 2
        others = np.arange(family.J) != j
        c = family.centers[j][None, :]
        rest = kernels.family_potential(c, family.centers[others], family.radii[others],
                                        newton_constant(n) * family.amplitudes[others]
                                        * family.radii[others] ** 2, n)
        self.background = float(rest[0]) if others.any() else 0.0

    @property
    def n(self) -> int:
        return self.family.n

    def __call__(self, xi) -> np.ndarray:
        xi = np.atleast_2d(np.asarray(xi, float))
        own = kernels.family_potential(xi, self._origin, np.ones(1), np.array([self._own]), self.n)
        # |x_j| <= 1/2 lies inside the plateau of the cutoff
        return own + self.background

    def source(self, xi) -> np.ndarray:
        xi = np.atleast_2d(np.asarray(xi, float))
        return kernels.family_source(xi, self._origin, np.ones(1), np.array([self.amplitude]))


def _delta(tag: RegimeTag, n: int, log_r: float) -> float:
    return (-log_r) ** ((n - 2) / n) if tag is RegimeTag.MidTop else 1.0


def _amplitude_log(tag, params, eps, log_r, delta) -> float:
    n, lam = params.n, float(params.lam)
    if tag.power_amplitudes:
        return math.log(eps) - (2 + n / lam) * log_r
    return math.log(eps) - n * log_r - math.log(delta)


@lru_cache(maxsize=32)
def _constants(n: int, alpha: float, lam: float, tag: str) -> Constants:
    return constants_A_B(SMOOTH, lam, alpha, n, tag)


def family_constants(params: Params, tag: RegimeTag | None = None) -> Constants:
    tag = tag or regime_tag(params)
    return _constants(params.n, float(params.alpha), float(params.lam), tag.value)


# -- constraints -----------------------------------------------------------------

def balance_exponent(params: Params, tag: RegimeTag) -> float:
    """Power of r in the balance constraint; must be positive (>= 0 with a log at MidCritLow)."""
    n, a, lam, s = params.n, float(params.alpha), float(params.lam), float(params.sigma)
    if tag is RegimeTag.SubLow or tag is RegimeTag.MidCritLow:
        return (n - 2) * s - n
    if tag is RegimeTag.MidSloped:
        return (n - 2) * s - (2 * n - a - (n - 2) * lam)
    if tag is RegimeTag.MidTop:
        return (n - 2) * s - (n - a)
    return (n / lam) * (s - (1 - (a - 2) * lam / n))


def _growth_ok(tag, params, A, eps, log_r, log_target) -> bool:
    """Lower bound of u on the bump beats SLACK * j phi(|x_j|)."""
    n, lam = params.n, float(params.lam)
    if tag.power_amplitudes:
        lhs = math.log(A * eps) - (n / lam) * log_r
    else:
        lhs = math.log(A * eps) - (n - 2) * log_r - math.log(_delta(tag, n, log_r))
    return lhs > log_target + math.log(SLACK)


def _balance_lhs(tag, params, log_r) -> float:
    n, s = params.n, float(params.sigma)
    e = balance_exponent(params, tag)
    lhs = e * log_r
    if tag is RegimeTag.MidCritLow:
        lhs -= math.log(-log_r)
    elif tag is RegimeTag.MidTop:
        lhs += ((n - 2) * s + 2) / n * math.log(-log_r)
    return lhs


def _balance_ok(tag, params, A, B, eps, log_r) -> bool:
    lam, s = float(params.lam), float(params.sigma)
    rhs = s * math.log(A) + math.log(B) + (lam + s - 1) * math.log(eps)
    return _balance_lhs(tag, params, log_r) < rhs - math.log(SLACK)


def _float_safe(tag, params, eps, log_r) -> bool:
    """Radius and amplitude representable as normal doubles."""
    if log_r < math.log(np.finfo(float).tiny):
        return False
    log_m = _amplitude_log(tag, params, eps, log_r, _delta(tag, params.n, log_r))
    return log_m < math.log(np.finfo(float).max) - 10


def choose_sequences(params: Params, tag: RegimeTag | None = None,
                     phi: GrowthTarget | None = None, J: int = 5,
                     profile: BumpProfile = SMOOTH) -> BumpFamily:
    """Build a J-bump family satisfying the regime's constraint pair.

    Raises :class:`RegimeError` if the parameters do not admit a
    construction (verdict not NoPointwiseBound/CriticalNoBound, tag not
    matching lambda, or a non-positive balance exponent) and
    :class:`InfeasibleError` when a radius cannot be found within 10^4
    halvings of |x_j|/8 in double precision.
    """
    if J < 1:
        raise ParameterError("J must be >= 1")
    phi = phi or GrowthTarget.log()
    actual = regime_tag(params)
    tag = tag or actual
    if tag is not actual:
        raise RegimeError(f"tag {tag.value} does not match lambda (expected {actual.value})")
    verdict = classify(params).verdict
    if verdict not in (Verdict.NoPointwiseBound, Verdict.CriticalNoBound):
        raise RegimeError(f"no blow-up construction in the {verdict.value} regime")
    e = balance_exponent(params, tag)
    if e < 0 or (e == 0 and tag is not RegimeTag.MidCritLow):
        raise RegimeError(f"balance exponent {e} is not positive")
    consts = family_constants(params, tag)
    A, B = consts.A, consts.B

    centers, radii, eps_l, amps, deltas, halvings = [], [], [], [], [], []
    for j in range(1, J + 1):
        xn = 0.5 * 5.0 ** (-j)
        eps = 2.0 ** (-j)
        log_target = math.log(j) + phi.log_value(xn)
        log_r0 = math.log(xn / 8)
        for k in range(MAX_HALVINGS + 1):
            log_r = log_r0 - k * LOG2
            if not _float_safe(tag, params, eps, log_r):
                raise InfeasibleError(
                    f"bump {j}: constraints need r_{j} below double range "
                    f"(after {k} halvings, log r = {log_r:.1f})")
            if (_growth_ok(tag, params, A, eps, log_r, log_target)
                    and _balance_ok(tag, params, A, B, eps, log_r)):
                break
        else:
            raise InfeasibleError(f"bump {j}: no admissible radius within {MAX_HALVINGS} halvings")
        r = math.ldexp(xn / 8, -k)
        log_r = math.log(r)
        d = _delta(tag, params.n, log_r)
        c = np.zeros(params.n)
        c[0] = xn
        centers.append(c)
        radii.append(r)
        eps_l.append(eps)
        deltas.append(d)
        amps.append(math.exp(_amplitude_log(tag, params, eps, log_r, d)))
        halvings.append(k)
    return BumpFamily(params, tag, np.array(centers), radii, eps_l, amps, deltas,
                      (A, B), phi, profile, tuple(halvings))


def build_source(family: BumpFamily):
    """Exact source evaluator f(x) = sum_j M_j psi((x - x_j)/r_j)."""
    return family.source


def evaluate_solution(family: BumpFamily, x) -> np.ndarray:
    """u = chi * c_n * sum_j M_j r_j^2 Psi(|x - x_j|/r_j); scalar for a single point."""
    x = np.asarray(x, float)
    vals = newtonian_potential_of_source(family, x)
    return float(vals[0]) if x.ndim == 1 else vals


def u_lower_bound(family: BumpFamily, j: int) -> float:
    """The guaranteed lower bound of u on bump j (0-based)."""
    A = family.constants[0]
    n, lam = family.n, float(family.params.lam)
    r, e = family.radii[j], family.eps[j]
    if family.tag.power_amplitudes:
        return A * e / r ** (n / lam)
    return A * e / (r ** (n - 2) * family.deltas[j])


@dataclass
class CertificateEntry:
    j: int
    u_center: float
    target: float
    margin: float
    passed: bool


@dataclass
class BlowupReport:
    entries: list
    passed: bool
    first_violation: int | None


def blowup_certificate(family: BumpFamily, phi: GrowthTarget | None = None) -> BlowupReport:
    """Check u(x_j) > j phi(|x_j|) for every constructed bump."""
    phi = phi or family.phi
    entries = []
    u = evaluate_solution(family, family.centers)
    for j, (uj, xn) in enumerate(zip(u, family.norms), start=1):
        target = j * phi(float(xn))
        ok = bool(uj > target)
        entries.append(CertificateEntry(j, float(uj), target, float(uj / target - 1), ok))
    bad = [e.j for e in entries if not e.passed]
    return BlowupReport(entries, not bad, bad[0] if bad else None)


def membership_mass(family: BumpFamily) -> np.ndarray:
    """Per-bump int u_j^lam over B(x_j, |x_j|/4), divided by eps_j^lam.

    u_j is the j-th bump's own potential.  Bounded ratios across j reflect
    the estimate int u_j^lam <= C eps_j^lam that keeps u^lam integrable.
    """
    n, lam = family.n, float(family.params.lam)
    c = newton_constant(n)
    area = kernels.sphere_area(n)
    out = []
    for r, e, m, xn in zip(family.radii, family.eps, family.amplitudes, family.norms):
        R = xn / (4 * r)
        # int_{|eta|<R} Psi^lam via the radial table (alpha-free reduction)
        body = _psi_power_integral(n, lam, R)
        total = (c * m * r * r) ** lam * r ** n * body
        out.append(total / e ** lam)
    return np.array(out)


def _psi_power_integral(n, lam, R):
    from scipy import integrate
    from .potential import potential_table

    tab = potential_table(n)
    g = lambda s: float(tab(s)[0]) ** lam * s ** (n - 1)
    head = integrate.quad(g, 0, min(R, 1.0), limit=200)[0]
    if R <= 1:
        return kernels.sphere_area(n) * head
    m = tab.mass
    p = n - (n - 2) * lam
    tail = m ** lam * (math.log(R) if p == 0 else (R ** p - 1) / p)
    return kernels.sphere_area(n) * (head + tail)


# -- descriptor JSON -----------------------------------------------------------

def _num(v) -> str:
    return str(Fraction(v)) if isinstance(v, (int, Fraction)) else repr(float(v))


def _parse_num(s):
    if isinstance(s, (int, float)):
        return s
    try:
        return Fraction(s) if ("." not in s and "e" not in s.lower()) else float(s)
    except ValueError as exc:
        raise ParameterError(f"bad number {s!r}") from exc


def params_to_json(p: Params) -> dict:
    return {"n": p.n, "alpha": _num(p.alpha), "lambda": _num(p.lam), "sigma": _num(p.sigma)}


def params_from_json(d: dict) -> Params:
    def norm(v):
        v = _parse_num(v)
        return int(v) if isinstance(v, Fraction) and v.denominator == 1 else v
    return Params(int(d["n"]), norm(d["alpha"]), norm(d["lambda"]), norm(d["sigma"]))


def family_to_json(family: BumpFamily) -> dict:
    return {
        "params": params_to_json(family.params),
        "tag": family.tag.value,
        "psi": family.profile.kind.value,
        "cutoff": {"inner": CUTOFF_INNER, "outer": CUTOFF_OUTER},
        "constants": {"A": family.constants[0], "B": family.constants[1]},
        "bumps": [
            {"center": [float(v) for v in c], "r": float(r), "eps": float(e), "M": float(m),
             "delta": float(d)}
            for c, r, e, m, d in zip(family.centers, family.radii, family.eps,
                                     family.amplitudes, family.deltas)
        ],
        "phi": family.phi.to_json(),
    }


def dumps_family(family: BumpFamily) -> str:
    return json.dumps(family_to_json(family), indent=2, sort_keys=True) + "\n"


def family_from_json(d: dict) -> BumpFamily:
    try:
        params = params_from_json(d["params"])
        tag = RegimeTag(d["tag"])
        if d.get("psi", "smooth_standard") != "smooth_standard":
            raise ParameterError(f"unsupported profile {d['psi']!r}")
        cut = d.get("cutoff", {"inner": CUTOFF_INNER, "outer": CUTOFF_OUTER})
        if (cut["inner"], cut["outer"]) != (CUTOFF_INNER, CUTOFF_OUTER):
            raise ParameterError("only the cutoff between radii 2 and 3 is supported")
        bumps = d["bumps"]
        return BumpFamily(
            params, tag,
            np.array([b["center"] for b in bumps], float),
            [b["r"] for b in bumps], [b["eps"] for b in bumps],
            [b["M"] for b in bumps], [b["delta"] for b in bumps],
            (float(d["constants"]["A"]), float(d["constants"]["B"])),
            GrowthTarget.from_json(d.get("phi", {"kind": "LogReciprocal"})))
    except (KeyError, TypeError) as exc:
        raise ParameterError(f"malformed descriptor: {exc}") from exc


def family_hash(family: BumpFamily) -> str:
    return hashlib.sha256(dumps_family(family).encode()).hexdigest()[:16]
