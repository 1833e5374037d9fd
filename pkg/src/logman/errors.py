"""Exception hierarchy.

Three failure families matter operationally, because the command line maps
them to distinct exit codes: violated mathematical hypotheses (exit 1),
numerical breakdowns (exit 2) and configuration mistakes (exit 3).
"""

from __future__ import annotations


class LogmanError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 2


class HypothesisViolation(LogmanError):
    """A mathematical precondition of the requested computation fails."""

    exit_code = 1


class NumericalFailure(LogmanError):
    """The computation ran but did not produce a trustworthy answer."""

    exit_code = 2


class ConfigError(LogmanError):
    """Scenario file or command-line arguments are invalid."""

    exit_code = 3

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class DomainError(HypothesisViolation):
    """Arguments lie outside the mathematical domain of an operation."""


class NoPrincipalEigenvalue(HypothesisViolation):
    """The weighted eigenvalue problem has no positive eigenvalue
    (the weight is nonpositive on the whole ball)."""


class ParabolicManifold(HypothesisViolation):
    """An operation requiring a finite Green kernel was attempted on a
    manifold whose radial capacity integral diverges."""


class InfeasibleWindow(HypothesisViolation):
    """No admissible profile parameter survives the shrinking schedule."""


class KinkSignError(HypothesisViolation):
    """Gluing failed: a junction kink has the wrong sign so the glued
    profile is not a weak subsolution."""


class BracketError(HypothesisViolation):
    """Supplied sub/supersolution bracket is invalid (wrong order or the
    boundary value escapes it)."""


class SingularSystemError(NumericalFailure):
    """A linear radial system was singular or too ill-conditioned to trust."""


class NonConvergence(NumericalFailure):
    """An iteration hit its sweep budget before reaching tolerance.

    The last iterate is attached so callers can inspect how far it got.
    """

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class MonotonicityError(NumericalFailure):
    """A family that must be ordered (in boundary value, exhaustion radius
    or iteration index) violated monotonicity beyond tolerance."""


class InconsistentLimit(NumericalFailure):
    """A computed limit contradicts a certified lower or upper envelope."""
