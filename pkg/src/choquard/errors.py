"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: ParameterError -> 2, RegimeError and
InfeasibleError -> 3.
"""


class ChoquardError(Exception):
    pass


class ParameterError(ChoquardError, ValueError):
    """Input outside the admissible domain (n >= 3, 0 < alpha < n, ...)."""


class RegimeError(ChoquardError):
    """Parameters do not lie in the regime an operation was asked to handle."""


class InfeasibleError(RegimeError):
    """A constraint system could not be met within the iteration budget."""


class QuadratureError(ChoquardError):
    """Refinement of a singular quadrature failed to converge."""


class StencilError(ChoquardError):
    """A finite-difference stencil touches a singularity or a non-smooth seam."""


class BootstrapContradiction(ChoquardError, AssertionError):
    """An exponent iteration violated one of its proven lower bounds."""
