"""Exception hierarchy.

Every error raised on purpose by the library derives from
:class:`ToepTraceError`; the CLI maps the subclasses onto exit codes.
"""


class ToepTraceError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class EvalAtSingularity(ToepTraceError):
    """A singular symbol was evaluated at lambda = 0 (mod 2 pi)."""


class ProfileUnavailable(ToepTraceError):
    """A composite symbol has no exact singularity profile.

    ``conservative`` carries a valid but loose ``(alpha, M1, M2)`` envelope.
    """

    def __init__(self, message, conservative=None):
        super().__init__(message)
        self.conservative = conservative


class OutOfRegime(ToepTraceError):
    """Parameters fall outside the range where a rate theorem applies."""

    exit_code = 2


class QuadratureNoConverge(ToepTraceError):
    """Refinement budget exhausted before the error estimate met tolerance."""

    exit_code = 3

    def __init__(self, message, err_est=None, k=None):
        super().__init__(message)
        self.err_est = err_est
        self.k = k


class NonIntegrableProduct(ToepTraceError):
    """The combined singularity exponent at some point is >= 1."""

    exit_code = 2


class NonIntegrablePower(ToepTraceError):
    """``alpha * p >= 1``: the symbol is not in L^p."""

    exit_code = 2


class DimensionMismatch(ToepTraceError, ValueError):
    pass


class DenseGuardExceeded(ToepTraceError):
    """Dense materialisation requested above the size guard."""

    exit_code = 2


class RegimeViolation(ToepTraceError):
    """Divergence-demo parameters violate the admissible region."""

    exit_code = 2


class DegenerateFit(ToepTraceError):
    """Too few usable points for a log-log regression."""


class UnknownPreset(ToepTraceError):
    exit_code = 2


class ConfigError(ToepTraceError):
    exit_code = 2
