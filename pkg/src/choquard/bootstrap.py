"""Exponent bookkeeping of the two integrability bootstraps.

Only exponents are tracked: each step replaces an integrability exponent
``p`` by a larger ``q`` according to the Riesz-potential and Hoelder
exponent relations, and asserts the proven lower bound on the gain
``1/p - 1/q``.  All arithmetic is in :class:`fractions.Fraction`.

Stage ``Lemma41`` (middle lambda range, start p = 1) with ``1/p - 1/p2 = (2 - eps)/n``:

* Case I (``p2/lam < n/(n - alpha)``): ``lam/p2 - 1/p3 = (n - alpha)/n``,
  ``1/q = 1/p3 + sigma/p2``;
* Case II: ``q_hat = p2/sigma`` and ``1/q`` the mean of ``1/p`` and ``1/q_hat``;

and the stage ends once ``p > n/2``.

Stage ``Lemma51`` (``lam >= n/(n-2)``, start p = lam) with
``lam/p - 1/p2 = (n - alpha - eps)/n`` and ``1/p3 = 1/p2 + sigma/p``: if
``p3 >= n/2`` the target exponent ``n lam/(n - alpha - eps)`` is reached,
otherwise ``1/q = 1/p3 - 2/n`` (capped at the target).  The ``Tail51`` stage
then iterates ``1/q = sigma/p - (2 - eps)/n`` until ``q`` is infinite.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

from .errors import BootstrapContradiction, ParameterError, RegimeError
from .regions import Params

INF = math.inf


class Stage(enum.Enum):
    Lemma41 = "Lemma41"
    Lemma51 = "Lemma51"
    Tail51 = "Tail51"
    DoneLinf = "Done(Linf)"
    DoneTarget = "Done(target)"

    @property
    def terminal(self) -> bool:
        return self in (Stage.DoneLinf, Stage.DoneTarget)


class Case(enum.Enum):
    CaseI = "CaseI"
    CaseII = "CaseII"
    NoCase = "None"


class Start(enum.Enum):
    Lemma41 = "Lemma41"
    Lemma51 = "Lemma51"


Exponent = object  # Fraction, or math.inf for an L-infinity bound


@dataclass(frozen=True)
class ExponentState:
    """One point of a bootstrap trace.

    ``p`` is the exponent known *after* the step that produced this state;
    the intermediates ``p2, p3, q_hat, q`` and ``gain = 1/p_prev - 1/q`` belong
    to that step (``None`` for the initial state and for pure termination
    tests).  ``c0`` is the proven lower bound the gain was checked against.
    """

    p: Exponent
    stage: Stage
    epsilon: Fraction
    case: Case = Case.NoCase
    p2: Optional[Fraction] = None
    p3: Optional[Fraction] = None
    q_hat: Optional[Fraction] = None
    q: Optional[Exponent] = None
    gain: Optional[Fraction] = None
    c0: Optional[Fraction] = None

    def to_json(self) -> dict:
        return {
            "p": _rat(self.p), "stage": self.stage.value, "epsilon": _rat(self.epsilon),
            "case": self.case.value, "p2": _rat(self.p2), "p3": _rat(self.p3),
            "q_hat": _rat(self.q_hat), "q": _rat(self.q), "gain": _rat(self.gain),
            "c0": _rat(self.c0),
        }


@dataclass(frozen=True)
class ExponentTrace:
    """Ordered states; ``stage_c0`` maps each stage run to its gain bound."""

    states: tuple
    stage_c0: tuple = ()
    params: Optional[Params] = None

    @property
    def steps(self) -> int:
        return len(self.states) - 1

    @property
    def verdict(self) -> Stage:
        return self.states[-1].stage

    def steps_in(self, stage: Stage) -> int:
        """Steps taken from a state in ``stage``; a reached target feeds the tail."""
        def source(st):
            return Stage.Tail51 if st is Stage.DoneTarget else st
        return sum(1 for a in self.states[:-1] if source(a.stage) is stage)

    def step_bound(self, stage: Stage) -> int:
        c0 = dict(self.stage_c0)[stage]
        return math.ceil(1 / c0) + 1

    def to_json(self) -> dict:
        out = {
            "states": [s.to_json() for s in self.states],
            "steps": self.steps,
            "verdict": self.verdict.value,
            "stage_c0": {st.value: _rat(c) for st, c in self.stage_c0},
        }
        if self.params is not None:
            p = self.params.as_fractions()
            out["params"] = {"n": p.n, "alpha": _rat(p.alpha), "lambda": _rat(p.lam),
                             "sigma": _rat(p.sigma)}
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def _rat(x) -> Optional[str]:
    """Rationals as "num/den" strings; infinity as "inf"."""
    if x is None:
        return None
    if x == INF:
        return "inf"
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s: str):
    """Inverse of the trace serialization."""
    if s == "inf":
        return INF
    try:
        num, den = s.split("/")
        return Fraction(int(num), int(den))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParameterError(f"not a num/den rational: {s!r}") from exc


def _exact(params: Params) -> tuple[int, Fraction, Fraction, Fraction]:
    p = params.as_fractions()
    return p.n, p.alpha, p.lam, p.sigma


# -- the middle range ----------------------------------------------------------

def epsilon_bounds_41(params: Params) -> Fraction:
    """Supremum of the admissible epsilons for the middle-range bootstrap.

    The three strict inequalities on epsilon solve to
    ``eps < (n+2-alpha)(1 - (n-alpha)/((n-2) lam))``, ``eps < n/lam - (n-2)``
    and ``eps < (2n-alpha)/(lam+sigma) - (n-2)``, together with ``eps < 1``.
    """
    n, a, lam, s = _exact(params)
    if not ((n - a) / (n - 2) < lam < Fraction(n, n - 2) and s > 0
            and 1 < lam + s < (2 * n - a) / (n - 2)):
        raise RegimeError(
            "need (n-alpha)/(n-2) < lambda < n/(n-2), sigma > 0 and "
            f"1 < lambda + sigma < (2n-alpha)/(n-2); got {params}")
    return min(Fraction(1),
               (n + 2 - a) * (1 - (n - a) / ((n - 2) * lam)),
               n / lam - (n - 2),
               (2 * n - a) / (lam + s) - (n - 2))


def _admissible_41(params: Params, eps: Fraction) -> bool:
    n, a, lam, s = _exact(params)
    return (0 < eps < 1
            and (n + 2 - a) / (n + 2 - a - eps) * (n - a) / (n - 2) < lam < n / (n - 2 + eps)
            and lam + s < (2 * n - a) / (n - 2 + eps))


def epsilon_select_41(params: Params) -> Fraction:
    """Midpoint of the admissible interval ``(0, sup)``, re-verified."""
    eps = epsilon_bounds_41(params) / 2
    if not _admissible_41(params, eps):  # pragma: no cover - guarded by the algebra
        raise BootstrapContradiction(f"midpoint epsilon {eps} is not admissible")
    return eps


def c0_41(params: Params, eps: Fraction) -> tuple[Fraction, Fraction]:
    """(Case I, Case II) gain bounds of a middle-range step.

    Case II uses the smaller of its two sub-case bounds (sigma <= 1 and
    sigma > 1), halved by the midpoint rule.
    """
    n, a, lam, s = _exact(params)
    case1 = (2 * n - a - (n - 2 + eps) * (lam + s)) / n
    small = (2 - eps) / n
    large = (n + 2 - a - eps) / (n * lam) * (lam - (n + 2 - a) / (n + 2 - a - eps)
                                             * (n - a) / (n - 2))
    return case1, min(small, large) / 2


def initial_41(params: Params, eps: Fraction | None = None, p: Fraction = Fraction(1)) -> ExponentState:
    eps = epsilon_select_41(params) if eps is None else Fraction(eps)
    if not _admissible_41(params, eps):
        raise RegimeError(f"epsilon {eps} is not admissible at {params}")
    return ExponentState(Fraction(p), Stage.Lemma41, eps)


def step_41(state: ExponentState, params: Params) -> ExponentState:
    """One application of the middle-range lemma (or its termination test)."""
    if state.stage is not Stage.Lemma41:
        raise ParameterError(f"step_41 needs a Lemma41 state, got {state.stage.value}")
    n, a, lam, s = _exact(params)
    p, eps = Fraction(state.p), state.epsilon
    if p > Fraction(n, 2):
        return replace(state, stage=Stage.DoneLinf, case=Case.NoCase, p2=None, p3=None,
                       q_hat=None, q=INF, gain=None, c0=None)
    if p < 1:
        raise ParameterError(f"exponent must lie in [1, n/2], got {p}")
    p2 = 1 / (1 / p - (2 - eps) / n)
    c1, c2 = c0_41(params, eps)
    if p2 / lam < Fraction(n) / (n - a):
        case, c0, q_hat = Case.CaseI, c1, None
        p3 = 1 / (lam / p2 - (n - a) / n)
        inv_q = 1 / p3 + s / p2
    else:
        case, c0, p3 = Case.CaseII, c2, None
        q_hat = p2 / s
        inv_q = (1 / p + 1 / q_hat) / 2
    if inv_q <= 0:
        raise BootstrapContradiction(f"non-positive 1/q = {inv_q} at p = {p}")
    q = 1 / inv_q
    gain = 1 / p - inv_q
    if not gain >= c0 > 0:
        raise BootstrapContradiction(f"gain {gain} below its bound {c0} at p = {p} ({case.value})")
    if not q > p:
        raise BootstrapContradiction(f"exponent did not increase: {p} -> {q}")
    return ExponentState(q, Stage.Lemma41, eps, case, p2, p3, q_hat, q, gain, c0)


# -- the upper range -----------------------------------------------------------

def epsilon_bounds_51(params: Params) -> Fraction:
    """Supremum of admissible epsilons: ``eps < 1``, ``eps < n - alpha`` and
    ``eps < n(1 - sigma)/lam + 2 - alpha``."""
    n, a, lam, s = _exact(params)
    if not (lam >= Fraction(n, n - 2) and 0 < s < 1 - (a - 2) * lam / n):
        raise RegimeError(
            f"need lambda >= n/(n-2) and 0 < sigma < 1 - (alpha-2) lambda/n; got {params}")
    return min(Fraction(1), n - a, n * (1 - s) / lam + 2 - a)


def _admissible_51(params: Params, eps: Fraction) -> bool:
    n, a, lam, s = _exact(params)
    return 0 < eps < 1 and a + eps < n and s < 1 - (a + eps - 2) * lam / n


def epsilon_select_51(params: Params) -> Fraction:
    eps = epsilon_bounds_51(params) / 2
    if not _admissible_51(params, eps):  # pragma: no cover - guarded by the algebra
        raise BootstrapContradiction(f"midpoint epsilon {eps} is not admissible")
    return eps


def target_51(params: Params, eps: Fraction) -> Fraction:
    """``n lam/(n - alpha - eps)``, the exponent that ends the stage."""
    n, a, lam, _ = _exact(params)
    return n * lam / (n - a - eps)


def c0_51(params: Params, eps: Fraction) -> Fraction:
    n, a, lam, s = _exact(params)
    return (1 - (lam + s)) / lam + 1 + (2 - a - eps) / n


def c0_tail(params: Params) -> Fraction:
    """Strict lower bound on tail gains: 1/n for sigma <= 1, alpha/n above."""
    n, a, _, s = _exact(params)
    return Fraction(1, n) if s <= 1 else a / n


def initial_51(params: Params, eps: Fraction | None = None, p: Fraction | None = None) -> ExponentState:
    eps = epsilon_select_51(params) if eps is None else Fraction(eps)
    if not _admissible_51(params, eps):
        raise RegimeError(f"epsilon {eps} is not admissible at {params}")
    return ExponentState(Fraction(params.as_fractions().lam if p is None else p), Stage.Lemma51, eps)


def step_51(state: ExponentState, params: Params) -> ExponentState:
    """One application of the upper-range lemma."""
    if state.stage is not Stage.Lemma51:
        raise ParameterError(f"step_51 needs a Lemma51 state, got {state.stage.value}")
    n, a, lam, s = _exact(params)
    p, eps = Fraction(state.p), state.epsilon
    target = target_51(params, eps)
    if not lam <= p < target:
        raise ParameterError(f"exponent must lie in [lambda, {target}), got {p}")
    p2 = 1 / (lam / p - (n - a - eps) / n)
    p3 = 1 / (1 / p2 + s / p)
    if not p3 > 1:
        raise BootstrapContradiction(f"p3 = {p3} <= 1 at p = {p}")
    c0 = c0_51(params, eps)
    if p3 >= Fraction(n, 2):
        return ExponentState(target, Stage.DoneTarget, eps, Case.CaseI, p2, p3, None, target,
                             1 / p - 1 / target, c0)
    inv_q = 1 / p3 - Fraction(2, n)
    gain = 1 / p - inv_q
    if not gain >= c0 > 0:
        raise BootstrapContradiction(f"gain {gain} below its bound {c0} at p = {p}")
    q = 1 / inv_q
    if q >= target:
        # overshoot: keep the lemma's precondition p < target on re-entry
        return ExponentState(target, Stage.DoneTarget, eps, Case.CaseII, p2, p3, None, target,
                             1 / p - 1 / target, c0)
    return ExponentState(q, Stage.Lemma51, eps, Case.CaseII, p2, p3, None, q, gain, c0)


def tail_step_51(state: ExponentState, params: Params) -> ExponentState:
    n, a, lam, s = _exact(params)
    p, eps = Fraction(state.p), state.epsilon
    if not p > n * lam / (n - a):
        raise ParameterError(f"tail needs p > n lambda/(n - alpha), got {p}")
    c0 = c0_tail(params)
    if p / s >= n / (2 - eps):
        return ExponentState(INF, Stage.DoneLinf, eps, Case.NoCase, q=INF, gain=1 / p, c0=c0)
    inv_q = s / p - (2 - eps) / n
    gain = 1 / p - inv_q
    if not gain > c0:
        raise BootstrapContradiction(f"tail gain {gain} not above {c0} at p = {p}")
    q = 1 / inv_q
    return ExponentState(q, Stage.Tail51, eps, Case.NoCase, q=q, gain=gain, c0=c0)


def tail_iteration_51(p, params: Params, eps) -> ExponentTrace:
    """Iterate the tail map from ``p`` until the bound becomes L-infinity."""
    state = ExponentState(Fraction(p), Stage.Tail51, Fraction(eps))
    states = [state]
    limit = math.ceil(1 / c0_tail(params)) + 1
    while not state.stage.terminal:
        if len(states) > limit:
            raise BootstrapContradiction(f"tail exceeded {limit} steps")
        state = tail_step_51(state, params)
        states.append(state)
    return ExponentTrace(tuple(states), ((Stage.Tail51, c0_tail(params)),), params)


def run_to_termination(params: Params, start: Start | str = Start.Lemma41) -> ExponentTrace:
    """Full trace from p = 1 (middle range) or p = lambda (upper range) to L-infinity."""
    start = Start(start)
    if start is Start.Lemma41:
        state = initial_41(params)
        c1, c2 = c0_41(params, state.epsilon)
        stage_c0 = [(Stage.Lemma41, min(c1, c2))]
        step = step_41
    else:
        state = initial_51(params)
        stage_c0 = [(Stage.Lemma51, c0_51(params, state.epsilon))]
        step = step_51
    states = [state]
    limit = math.ceil(1 / stage_c0[0][1]) + 1
    while not state.stage.terminal:
        if len(states) > limit:
            raise BootstrapContradiction(f"{start.value} exceeded {limit} steps")
        state = step(state, params)
        states.append(state)
    # the stage bound is the weakest case bound actually met along the run
    taken = [s.c0 for s in states[1:] if s.c0 is not None]
    if taken:
        stage_c0[0] = (stage_c0[0][0], min(taken))
    if state.stage is Stage.DoneTarget:
        tail = tail_iteration_51(state.p, params, state.epsilon)
        states.extend(tail.states[1:])
        stage_c0.extend(tail.stage_c0)
    return ExponentTrace(tuple(states), tuple(stage_c0), params)


def trace_from_json(obj: dict) -> ExponentTrace:
    """Rebuild a trace from :meth:`ExponentTrace.to_json` output."""
    def opt(v):
        return None if v is None else parse_rational(v)

    states = tuple(ExponentState(parse_rational(d["p"]), Stage(d["stage"]),
                                 parse_rational(d["epsilon"]), Case(d["case"]), opt(d["p2"]),
                                 opt(d["p3"]), opt(d["q_hat"]), opt(d["q"]), opt(d["gain"]),
                                 opt(d["c0"])) for d in obj["states"])
    stage_c0 = tuple((Stage(k), parse_rational(v)) for k, v in obj["stage_c0"].items())
    params = None
    if "params" in obj:
        d = obj["params"]
        params = Params(int(d["n"]), parse_rational(d["alpha"]), parse_rational(d["lambda"]),
                        parse_rational(d["sigma"]))
    return ExponentTrace(states, stage_c0, params)
