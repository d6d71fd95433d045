"""Numerical laboratory for Choquard-Pekar inequalities at an isolated singularity.

    0 <= -Laplace u <= (|x|^{-alpha} * u^lambda) u^sigma   in B_2 minus {0}

Modules: ``regions`` (verdicts in the (lambda, sigma) plane), ``potential``
and ``quadrature`` (Newtonian/Riesz potentials), ``construction`` (blow-up
bump families), ``verify`` (independent checks), ``bootstrap`` (exact
exponent iterations) and ``cli``.
"""

from .bootstrap import (ExponentState, ExponentTrace, epsilon_select_41, epsilon_select_51,
                        run_to_termination, step_41, step_51, tail_iteration_51)
from .construction import (BumpFamily, GrowthTarget, RegimeTag, blowup_certificate,
                           choose_sequences, dumps_family, family_from_json)
from .errors import (BootstrapContradiction, ChoquardError, InfeasibleError, ParameterError,
                     QuadratureError, RegimeError, StencilError)
from .fixtures import RemarkOneField
from .kernels import BACKEND
from .potential import (BumpProfile, angular_riesz_kernel, constants_A_B,
                        radial_newtonian_potential, scaled_reference_integral)
from .quadrature import QuadratureSpec, riesz_convolution
from .regions import Params, Verdict, classify, g_alpha, grid_scan
from .verify import VerifyConfig, certificate_check, direct_inequality_check, verify

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BootstrapContradiction", "BumpFamily", "BumpProfile", "ChoquardError",
    "ExponentState", "ExponentTrace", "GrowthTarget", "InfeasibleError", "ParameterError",
    "Params", "QuadratureError", "QuadratureSpec", "RegimeError", "RegimeTag",
    "RemarkOneField", "StencilError", "Verdict", "VerifyConfig", "angular_riesz_kernel",
    "blowup_certificate", "certificate_check", "choose_sequences", "classify",
    "constants_A_B", "direct_inequality_check", "dumps_family", "epsilon_select_41",
    "epsilon_select_51", "family_from_json", "g_alpha", "grid_scan",
    "radial_newtonian_potential", "riesz_convolution", "run_to_termination",
    "scaled_reference_integral", "step_41", "step_51", "tail_iteration_51", "verify",
]
