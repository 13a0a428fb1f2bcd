"""Domain exceptions for the coupled-system analysis."""
from typing import Optional


class AnalysisError(Exception):
    """Base exception for analysis errors."""

    def __init__(
        self,
        message: str,
        details: Optional[dict] = None,
        original_error: Optional[Exception] = None,
    ):
        super().__init__(message)
        self.details = details or {}
        self.original_error = original_error


class MonotonicityError(AnalysisError):
    """Raised when an EXIT function decreases somewhere on its grid check."""

    pass


class DegenerateBoxError(AnalysisError):
    """Raised when a rescaling box has a vanishing or inconsistent side."""

    pass


class PitchMismatchError(AnalysisError):
    """Raised when a profile and a kernel live on different grid pitches."""

    pass


class NoNontrivialCrossingError(AnalysisError):
    """Raised when a pair only crosses at (0,0) and (1,1)."""

    pass


class NoSaturationError(AnalysisError):
    """Raised when coupling does not move the threshold inside the bracket."""

    pass


class NotAFixedPointError(AnalysisError):
    """Raised when a profile pair moves under one more iteration."""

    pass


class NoFrontError(AnalysisError):
    """Raised when a run never shows an interpolating front."""

    pass


class GapViolatedError(AnalysisError):
    """Raised when a continuation path leaves the strictly positive gap region."""

    pass


class StepCollapseError(AnalysisError):
    """Raised when the continuation step shrinks below its floor."""

    pass


class NonContractionError(AnalysisError):
    """Raised when the inverse-space iteration does not contract."""

    pass


class CertificationFailedError(AnalysisError):
    """Raised when a wave solution violates one of the certificate clauses."""

    def __init__(
        self,
        clause: str,
        message: str,
        details: Optional[dict] = None,
    ):
        super().__init__(message, details)
        self.clause = clause


class BadPolynomialError(AnalysisError):
    """Raised when a degree distribution is not a valid polynomial."""

    pass


class BadThresholdBError(AnalysisError):
    """Raised when a Gallager B majority threshold is out of range."""

    pass


class QuadratureFailureError(AnalysisError):
    """Raised when an adaptive quadrature misses its error target."""

    pass


class PriorUnsupportedError(AnalysisError):
    """Raised when a compressed-sensing prior is not known."""

    pass


class ClosureNotFoundError(AnalysisError):
    """Raised when an analytic EXIT function names an unregistered closure."""

    pass


class ConfigurationError(AnalysisError):
    """Raised when an experiment configuration is unusable."""

    pass


class StorageError(AnalysisError):
    """Raised when result files cannot be written or read."""

    pass
