"""
Error hierarchy for the toolkit.

Every error raised on purpose by the library derives from FidgapError so the
management commands can turn it into a CommandError with a readable message.
"""

from typing import List, Optional


class FidgapError(Exception):
    """Base class for all toolkit errors."""


class NotHermitian(FidgapError):
    pass


class NoConvergence(FidgapError):
    pass


class SingularInput(FidgapError):
    pass


class DimensionMismatch(FidgapError):
    pass


class NotFaithful(FidgapError):
    pass


class WeightTooLarge(FidgapError):
    pass


class NegativeTime(FidgapError):
    pass


class DegenerateBinning(FidgapError):
    pass


class RateFamilyError(FidgapError):
    """The bath rate family violates gamma(-nu) = exp(-nu) * gamma(nu)."""


class UnsupportedAssignment(FidgapError):
    pass


class NotDetailedBalance(FidgapError):
    pass


class InvalidGap(FidgapError):
    pass


class ModularNotTrivialOnQ(FidgapError):
    pass


class ImaginaryResidue(FidgapError):
    """A quantity that must be real came out with a sizeable imaginary part."""


class UnknownParameter(FidgapError):
    pass


class ParseError(FidgapError):
    """
    Raised while reading a model config.

    `field` is the dotted path of the offending entry, `line` the line number
    in the JSON source when the failure is syntactic.
    """

    def __init__(self, message: str, field: Optional[str] = None,
                 line: Optional[int] = None):
        self.field = field
        self.line = line
        context = []
        if line is not None:
            context.append(f'line {line}')
        if field:
            context.append(f'field {field!r}')
        if context:
            message = f"{message} ({', '.join(context)})"
        super().__init__(message)


class InvariantViolation(FidgapError):
    """
    One or more invariant checks failed.

    `failures` holds the failing check dictionaries (name, residual,
    tolerance, passed).
    """

    def __init__(self, failures: List[dict]):
        self.failures = failures
        names = ', '.join(
            f"{f['name']} (residual {f['residual']:.3e} > {f['tolerance']:.1e})"
            for f in failures)
        super().__init__(f'Invariant violation: {names}')
