"""
Exception hierarchy for qforge.

Input problems derive from ``InputError`` (CLI exit code 2); arithmetic and
internal inconsistencies derive from ``QForgeError`` directly. Failed checks are
never raised: they are recorded as report entries.
"""


class QForgeError(Exception):
    """Base class for all qforge errors"""


class InputError(QForgeError):
    """Malformed or inconsistent user/bundled input"""


class RepSchemaError(InputError):
    """Representation diagram violates the file schema"""


class WeightConflictError(InputError):
    """Weight propagation along diagram edges is inconsistent"""

    def __init__(self, message: str, cycle: list | None = None):
        super().__init__(message)
        self.cycle = cycle or []


class UnsupportedAlgebraError(InputError):
    """Family/rank/layout outside the supported range"""


class CaseDataError(InputError):
    """Induction case data is incomplete or inconsistent"""


class ClaimGrammarError(InputError):
    """A claim expression cannot be parsed or evaluated"""


class ExactArithmeticError(QForgeError):
    """Division by zero or other undefined exact operation"""


class PoleError(ExactArithmeticError):
    """Evaluation point is a zero of the denominator"""


class ExponentDenominatorError(ExactArithmeticError):
    """Scalars built for different exponent denominators were mixed"""


class SingularMatrixError(ExactArithmeticError):
    """Matrix has no inverse"""


class NonMinusculeError(QForgeError):
    """Operation needs a minuscule module"""


class ConventionError(QForgeError):
    """No candidate R-matrix convention reproduces the anchor entries"""


class SpectralError(QForgeError):
    """Minimal polynomial or eigenvalue analysis failed"""


class TemplateMismatchError(QForgeError):
    """Serre extraction rows do not have the two-term shape"""


class InternalConsistencyError(QForgeError):
    """Two independent computations of the same quantity disagree"""
