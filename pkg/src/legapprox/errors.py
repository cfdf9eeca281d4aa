"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line interface:
2 for validation problems, 3 for a failed degree certificate, 4 for a
solver that did not converge and 5 for I/O.
"""


class LegApproxError(Exception):
    exit_code = 2

    def __init__(self, message="", **details):
        super().__init__(message)
        self.details = details
        for key, value in details.items():
            setattr(self, key, value)


# geometry
class ValidationError(LegApproxError):
    pass


class DisjointnessViolation(ValidationError):
    pass


class TangencyViolation(ValidationError):
    pass


class DanglingAttachment(ValidationError):
    pass


class UnderSampled(ValidationError):
    pass


class EpsilonTooLarge(ValidationError):
    pass


# homology
class DisconnectedSet(ValidationError):
    pass


class RoutingFailure(LegApproxError):
    pass


class ResolutionTooCoarse(LegApproxError):
    pass


# contact forms
class NotContact(ValidationError):
    pass


class NotHolomorphic(ValidationError):
    pass


class MissingTangents(LegApproxError):
    pass


class RankDrop(LegApproxError):
    pass


class HolonomyMismatch(LegApproxError):
    pass


class CommonZero(LegApproxError):
    pass


class ApproximationFailure(LegApproxError):
    pass


class NotLegendrianAxis(ValidationError):
    pass


class NotLegendrianInput(ValidationError):
    pass


class ExpressionError(ValidationError):
    pass


# ODE
class Escape(LegApproxError):
    pass


class StepUnderflow(LegApproxError):
    pass


class CommutativityFailure(LegApproxError):
    pass


# rational approximation
class PoleOnPath(LegApproxError):
    pass


class SingularPeriodMatrix(LegApproxError):
    pass


class MissingAnchor(LegApproxError):
    pass


class IllConditioned(LegApproxError):
    pass


# period solver
class CertificateFailed(LegApproxError):
    exit_code = 3


class InsufficientSampling(CertificateFailed):
    pass


class NoConvergence(LegApproxError):
    exit_code = 4


# pipeline
class ToleranceBudgetExceeded(LegApproxError):
    exit_code = 4


class StageError(LegApproxError):
    """Wraps an error raised inside a named pipeline stage."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}", stage=stage)
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 2)


class ConfigError(LegApproxError):
    exit_code = 5
