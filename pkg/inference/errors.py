"""
Structured exceptions raised by the inference and simulation layers.
"""

from typing import Optional


class SparseCIError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SparseCIError, ValueError):
    """Argument outside the domain of a special function or evaluator."""


class InvariantViolation(SparseCIError):
    """A domain type was constructed with values breaking its invariants.

    Not a ValueError, so it propagates unchanged through pydantic validators.
    """


class PreconditionError(SparseCIError, ValueError):
    """Caller-supplied sequences or sizes violate an evaluator's conditions."""


class ConsistencyError(SparseCIError, ArithmeticError):
    """An internal numeric identity failed; indicates a bug, not bad input."""


class ThresholdError(SparseCIError, ValueError):
    """A named threshold is undefined for the given parameters."""

    def __init__(self, name: str, reason: str):
        self.name = name
        self.reason = reason
        super().__init__(f"{name}: {reason}")


class InfeasibleError(SparseCIError):
    """The signal-to-noise ratio is below the cutoff a construction requires."""

    def __init__(self, variant: str, cutoff_name: str, cutoff: float, snr: float, reference: Optional[str] = None):
        self.variant = variant
        self.cutoff_name = cutoff_name
        self.cutoff = cutoff
        self.snr = snr
        self.reference = reference
        message = f"{variant}: a/sigma={snr:.6f} is below {cutoff_name}={cutoff:.6f}"
        if reference:
            message += f" ({reference})"
        super().__init__(message)


class RegimeError(InfeasibleError):
    """Asymptotic ('bar') constructions are undefined below their lowest cutoff."""


class MalformedInputError(SparseCIError, ValueError):
    """A user-supplied CSV could not be parsed; `line` is 1-based and counts the header."""

    def __init__(self, path: str, line: int, reason: str):
        self.path = path
        self.line = line
        self.reason = reason
        super().__init__(f"{path}, line {line}: {reason}")


__all__ = [
    "SparseCIError",
    "DomainError",
    "InvariantViolation",
    "PreconditionError",
    "ConsistencyError",
    "ThresholdError",
    "InfeasibleError",
    "RegimeError",
    "MalformedInputError",
]
