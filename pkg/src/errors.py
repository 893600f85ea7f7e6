"""
Exception hierarchy shared by the library and the CLI.

Every error carries a short machine ``code`` and the process ``exit_code``
the CLI reports for it::

    1  input could not be parsed or violates a contract
    2  a solver could not produce a result
    3  the Lorenz model failed validation
    4  a computed curve violated its monotonicity contract
"""
from __future__ import annotations


class ErgoptError(Exception):
    """Base class for all ergopt errors."""

    code: str = "ERGOPT_ERROR"
    exit_code: int = 2

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.__class__.__name__)
        self.details = details


# ---------------------------------------------------------------------------
# Input errors (exit 1)
# ---------------------------------------------------------------------------

class InputError(ErgoptError):
    """Malformed file, symbol out of range, inadmissible word."""
    code = "INVALID_INPUT"
    exit_code = 1


# ---------------------------------------------------------------------------
# Solver errors (exit 2)
# ---------------------------------------------------------------------------

class NotPrimitive(ErgoptError):
    code = "NOT_PRIMITIVE"


class BudgetExceeded(ErgoptError):
    code = "BUDGET_EXCEEDED"


class NonPositiveRoof(ErgoptError):
    code = "NON_POSITIVE_ROOF"


class EmptyGraph(ErgoptError):
    code = "EMPTY_GRAPH"


class WindowTooShort(ErgoptError):
    code = "WINDOW_TOO_SHORT"


class SingularInput(ErgoptError):
    code = "SINGULAR_INPUT"


class QuadratureNotConverged(ErgoptError):
    code = "QUADRATURE_NOT_CONVERGED"


class EmptyFamily(ErgoptError):
    code = "EMPTY_FAMILY"


class SpliceInadmissible(ErgoptError):
    code = "SPLICE_INADMISSIBLE"


# ---------------------------------------------------------------------------
# Experiment contract errors
# ---------------------------------------------------------------------------

class ModelValidationFailed(ErgoptError):
    code = "MODEL_INVALID"
    exit_code = 3


class CurveNotMonotone(ErgoptError):
    code = "CURVE_NOT_MONOTONE"
    exit_code = 4


class ResidualTooLarge(ErgoptError):
    """A solver self-check exceeded the configured tolerance."""
    code = "RESIDUAL_TOO_LARGE"
