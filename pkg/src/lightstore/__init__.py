"""Linear-response models of photon echoes, atomic frequency combs and slow light."""

from ._accel import backend
from .echoes import (
    CombDesign,
    EchoOrderAmplitudes,
    EchoReport,
    detect_echoes,
    efficiency_routes,
    eta_3pe,
    eta_afc_forward,
    eta_from_coeffs,
    eta_optimal,
    optimal_finesse,
    order_recursion,
)
from .errors import (
    AliasingError,
    AuditInvalidError,
    ConfigError,
    CutoffError,
    DetectionError,
    DomainError,
    LightstoreError,
    QuadratureError,
    RangeError,
    ResolutionError,
    StabilityError,
    TooLateError,
    UnsupportedProfileError,
)
from .oracle import time_domain_oracle
from .protocol import Direction, ProtocolTimeline, RetrievalPrediction, Scheme, compose_efficiency, predict_retrieval
from .response import (
    MediumParams,
    PulseEnvelope,
    TransferFunction,
    kernel_quadrature,
    propagate,
    propagate_through,
    susceptibility_kernel,
    transfer_function,
)
from .slowlight import (
    DelayReport,
    EnergyAudit,
    containment_fraction,
    delay_report,
    distortion,
    energy_audit,
    expected_delay,
    group_delay,
    vg_over_c,
)
from .spectra import MHZ, FourierCoeffs, ProfileKind, SpectralProfile, finesse, fourier_coeffs

__version__ = "0.1.0"
