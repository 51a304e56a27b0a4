"""Exception hierarchy for lightstore."""

from __future__ import annotations


class LightstoreError(Exception):
    """Base class for every error raised by this package."""


class DomainError(LightstoreError, ValueError):
    """A physical parameter is outside its allowed domain."""


class RangeError(LightstoreError, ValueError):
    """A detuning lies outside the range covered by a sampled profile."""


class UnsupportedProfileError(LightstoreError, TypeError):
    """The requested operation is undefined for this kind of spectral profile."""


class QuadratureError(LightstoreError, ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved abs. error {achieved:.3g})")
        self.achieved = achieved


class AliasingError(LightstoreError, ArithmeticError):
    """Pulse content reaches the edge of the FFT grid and would wrap around."""


class StabilityError(LightstoreError, ArithmeticError):
    """Lattice discretisation of the time-domain integrator is inadequate."""


class DetectionError(LightstoreError, ArithmeticError):
    """Output energy too small for a delay to be measured."""


class ResolutionError(LightstoreError, ValueError):
    """Echo detection windows cannot be resolved on the time grid."""


class CutoffError(LightstoreError, ValueError):
    """Fourier coefficients do not cover the requested echo orders."""


class TooLateError(LightstoreError, ValueError):
    """A Raman transfer arrives after the coherences have already rephased."""


class AuditInvalidError(LightstoreError, ArithmeticError):
    """Energy audit requested on a pulse that is not contained in the medium.

    The flagged audit is attached as ``audit`` so callers can still inspect it.
    """

    def __init__(self, message: str, audit):
        super().__init__(message)
        self.audit = audit


class ConfigError(LightstoreError, ValueError):
    """Invalid scenario configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
