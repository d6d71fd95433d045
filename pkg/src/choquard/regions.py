"""Regime classification in the (lambda, sigma) plane.

The threshold ``g_alpha`` is the continuous piecewise-linear function

    n/(n-2)                      for 0 < lam < (n-alpha)/(n-2)
    (2n-alpha)/(n-2) - lam       for (n-alpha)/(n-2) <= lam < n/(n-2)
    max(0, 1 - (alpha-2) lam/n)  for lam >= n/(n-2)

and a parameter point is classified by comparing sigma against it.  Two
arithmetic paths exist: when alpha, lam and sigma are ``int`` or
``Fraction`` everything is exact; otherwise equality sigma == g is decided
inside a relative band of 1e-12.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

from .errors import ParameterError

FLOAT_BAND = 1e-12


class Verdict(enum.Enum):
    HarmonicallyBounded = "HarmonicallyBounded"
    BoundedC1 = "BoundedC1"
    NoPointwiseBound = "NoPointwiseBound"
    CriticalHarmonicallyBounded = "CriticalHarmonicallyBounded"
    CriticalNoBound = "CriticalNoBound"
    CriticalOpen = "CriticalOpen"

    @property
    def is_critical(self) -> bool:
        return self in _CRITICAL


_CRITICAL = frozenset(
    {Verdict.CriticalHarmonicallyBounded, Verdict.CriticalNoBound, Verdict.CriticalOpen}
)

# integer codes for the vectorised grid path; order fixed for reproducibility
_VERDICT_CODES = list(Verdict)


class Branch(enum.Enum):
    Flat = "Flat"
    Sloped = "Sloped"
    Tail = "Tail"


_BRANCH_CODES = list(Branch)


def _is_exact(x) -> bool:
    return isinstance(x, Rational) and not isinstance(x, bool)


@dataclass(frozen=True)
class Params:
    """The quadruple (n, alpha, lambda, sigma).

    ``lam`` stands for lambda.  ``sigma`` may be omitted for operations that
    only need (n, alpha, lam).
    """

    n: int
    alpha: object
    lam: object
    sigma: object = 0

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 3:
            raise ParameterError(f"n must be an integer >= 3, got {self.n!r}")
        for name in ("alpha", "lam", "sigma"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float, Fraction)):
                raise ParameterError(f"{name} must be a real number, got {v!r}")
            if isinstance(v, float) and not np.isfinite(v):
                raise ParameterError(f"{name} must be finite, got {v!r}")
        if not 0 < self.alpha < self.n:
            raise ParameterError(f"alpha must lie in (0, n) = (0, {self.n}), got {self.alpha}")
        if not self.lam > 0:
            raise ParameterError(f"lambda must be positive, got {self.lam}")
        if not self.sigma >= 0:
            raise ParameterError(f"sigma must be nonnegative, got {self.sigma}")

    @property
    def exact(self) -> bool:
        return _is_exact(self.alpha) and _is_exact(self.lam) and _is_exact(self.sigma)

    def as_fractions(self) -> "Params":
        """Exact copy; floats are converted through their shortest repr."""
        conv = lambda v: Fraction(v) if _is_exact(v) else Fraction(repr(float(v)))
        return Params(self.n, conv(self.alpha), conv(self.lam), conv(self.sigma))

    def as_floats(self) -> "Params":
        return Params(self.n, float(self.alpha), float(self.lam), float(self.sigma))

    # junctions of the threshold
    @property
    def lam_low(self):
        """(n - alpha)/(n - 2), start of the sloped branch."""
        return _div(self.n - self.alpha, self.n - 2)

    @property
    def lam_top(self):
        """n/(n - 2), start of the tail branch."""
        return _div(self.n, self.n - 2)


def _div(a, b):
    if _is_exact(a) and _is_exact(b):
        return Fraction(a) / Fraction(b)
    return a / b


def _close(a, b) -> bool:
    return abs(a - b) <= FLOAT_BAND * max(1.0, abs(b))


def _equal(a, b, exact: bool) -> bool:
    return a == b if exact else _close(float(a), float(b))


def threshold(n: int, alpha, lam) -> tuple[object, Branch]:
    """Return (g_alpha(lam), branch) with half-open intervals as printed."""
    p = Params(n, alpha, lam)
    if lam < p.lam_low:
        return _div(n, n - 2), Branch.Flat
    if lam < p.lam_top:
        return _div(2 * n - alpha, n - 2) - lam, Branch.Sloped
    tail = 1 - _div((alpha - 2) * lam, n)
    return (tail if tail > 0 else tail * 0), Branch.Tail


def g_alpha(n: int, alpha, lam):
    """Evaluate the threshold g_alpha(lam)."""
    return threshold(n, alpha, lam)[0]


@dataclass(frozen=True)
class RegionVerdict:
    verdict: Verdict
    g_value: object
    branch: Branch


def classify(params: Params) -> RegionVerdict:
    """Map a parameter point to the applicable pointwise-bound verdict."""
    p = params
    exact = p.exact
    if not exact:
        p = p.as_floats()
    g, branch = threshold(p.n, p.alpha, p.lam)
    if _equal(p.sigma, g, exact):
        verdict = _critical_verdict(p, exact)
    elif p.sigma < g:
        verdict = Verdict.HarmonicallyBounded if p.lam < p.lam_top else Verdict.BoundedC1
    else:
        verdict = Verdict.NoPointwiseBound
    return RegionVerdict(verdict, g, branch)


def _critical_verdict(p: Params, exact: bool) -> Verdict:
    low = p.lam_low
    if _equal(p.lam, low, exact):
        return Verdict.CriticalNoBound
    if p.lam < low:
        return Verdict.CriticalHarmonicallyBounded
    if p.alpha > 2:
        edge = _div(p.n, p.alpha - 2)
        if p.lam > edge and not _equal(p.lam, edge, exact):
            return Verdict.CriticalNoBound
    return Verdict.CriticalOpen


@dataclass(frozen=True)
class GridRow:
    lam: object
    sigma: object
    g: object
    verdict: Verdict
    branch: Branch


def _axis(lo, hi, count: int, open_low: bool) -> list:
    if count < 1:
        raise ParameterError("resolution must be positive")
    if hi < lo:
        raise ParameterError(f"empty range [{lo}, {hi}]")
    exact = _is_exact(lo) and _is_exact(hi)
    if exact:
        lo, hi = Fraction(lo), Fraction(hi)
    else:
        lo, hi = float(lo), float(hi)
    if lo == hi:
        if count != 1:
            raise ParameterError(f"degenerate range at {lo} needs resolution 1")
        return [lo]
    if open_low:
        return [lo + (hi - lo) * Fraction(i, count) if exact else lo + (hi - lo) * i / count
                for i in range(1, count + 1)]
    if count == 1:
        return [lo]
    return [lo + (hi - lo) * Fraction(i, count - 1) if exact else lo + (hi - lo) * i / (count - 1)
            for i in range(count)]


def grid_scan(n: int, alpha, lam_range: Sequence, sigma_range: Sequence,
              resolution: tuple[int, int]) -> list[GridRow]:
    """Classify a (lambda, sigma) grid, lambda-major.

    lambda runs over (lo, hi] with ``resolution[0]`` equispaced points and
    sigma over [lo, hi] with ``resolution[1]`` points.  Rational endpoints
    select the exact path (row-by-row :func:`classify`); otherwise the float
    path is evaluated vectorised with the same rules.
    """
    lams = _axis(lam_range[0], lam_range[1], resolution[0], open_low=True)
    sigmas = _axis(sigma_range[0], sigma_range[1], resolution[1], open_low=False)
    if lams[0] <= 0:
        raise ParameterError("lambda range must lie in (0, inf)")
    if sigmas[0] < 0:
        raise ParameterError("sigma range must lie in [0, inf)")
    Params(n, alpha, lams[-1], sigmas[-1])  # validates n, alpha

    exact = _is_exact(alpha) and all(_is_exact(v) for v in lams + sigmas)
    if exact:
        rows = []
        for lam in lams:
            # the same rules as classify, with the per-column work done once
            g, branch = threshold(n, alpha, lam)
            column = Params(n, alpha, lam, g)
            crit = _critical_verdict(column, True)
            below = Verdict.HarmonicallyBounded if lam < column.lam_top else Verdict.BoundedC1
            for sigma in sigmas:
                verdict = (crit if sigma == g else below if sigma < g
                           else Verdict.NoPointwiseBound)
                rows.append(GridRow(lam, sigma, g, verdict, branch))
        return rows
    return _grid_float(n, float(alpha), np.array(lams, float), np.array(sigmas, float))


def _grid_float(n: int, alpha: float, lams: np.ndarray, sigmas: np.ndarray) -> list[GridRow]:
    L, S = np.meshgrid(lams, sigmas, indexing="ij")
    L, S = L.ravel(), S.ravel()
    low = (n - alpha) / (n - 2)
    top = n / (n - 2)
    branch = np.where(L < low, 0, np.where(L < top, 1, 2))
    g = np.where(
        branch == 0, n / (n - 2),
        np.where(branch == 1, (2 * n - alpha) / (n - 2) - L,
                 np.maximum(0.0, 1 - (alpha - 2) * L / n)))
    band = FLOAT_BAND * np.maximum(1.0, np.abs(g))
    crit = np.abs(S - g) <= band
    lam_is_low = np.abs(L - low) <= FLOAT_BAND * max(1.0, abs(low))
    if alpha > 2:
        edge = n / (alpha - 2)
        beyond = (L > edge) & ~(np.abs(L - edge) <= FLOAT_BAND * max(1.0, edge))
    else:
        beyond = np.zeros_like(crit)
    code = {v: i for i, v in enumerate(_VERDICT_CODES)}
    crit_code = np.where(
        lam_is_low, code[Verdict.CriticalNoBound],
        np.where(L < low, code[Verdict.CriticalHarmonicallyBounded],
                 np.where(beyond, code[Verdict.CriticalNoBound], code[Verdict.CriticalOpen])))
    below = np.where(L < top, code[Verdict.HarmonicallyBounded], code[Verdict.BoundedC1])
    verdict = np.where(crit, crit_code, np.where(S < g, below, code[Verdict.NoPointwiseBound]))
    return [GridRow(float(l), float(s), float(gv), _VERDICT_CODES[v], _BRANCH_CODES[b])
            for l, s, gv, v, b in zip(L, S, g, verdict, branch)]


CSV_HEADER = ("lambda", "sigma", "g_alpha", "verdict", "branch")


def _fmt(v) -> str:
    return repr(float(v))


def rows_to_csv(rows: Iterable[GridRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow((_fmt(r.lam), _fmt(r.sigma), _fmt(r.g), r.verdict.name, r.branch.name))
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))
