"""Echo trains of spectrally periodic absorbers.

Three independent routes to the first-echo efficiency:

* :func:`order_recursion` integrates the triangular system for the echo-order
  amplitudes ``a_p(z)`` from the Fourier coefficients of ``g``;
* :func:`eta_3pe`, :func:`eta_afc_forward`, :func:`eta_from_coeffs` are the
  closed forms;
* :func:`detect_echoes` integrates intensity windows on a propagated trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CutoffError, DomainError, ResolutionError, UnsupportedProfileError
from .response import MediumParams, PulseEnvelope, propagate_through
from .spectra import FourierCoeffs, ProfileKind, SpectralProfile, fourier_coeffs

# Heaviside step at zero in the order recursion: the diagonal term is halved.
HEAVISIDE_AT_ZERO = 0.5
FORWARD_LIMIT = 4.0 * math.exp(-2.0)
DEFAULT_STEPS = 512


@dataclass(frozen=True, eq=False)
class EchoOrderAmplitudes:
    """``orders[p, i]`` is ``a_p`` at ``z_grid[i]`` (in units of the crystal length)."""

    orders: np.ndarray
    z_grid: np.ndarray

    @property
    def P(self) -> int:
        return self.orders.shape[0] - 1

    def at_exit(self) -> np.ndarray:
        return self.orders[:, -1]

    def efficiency(self, p: int = 1) -> float:
        return float(abs(self.orders[p, -1]) ** 2)


@dataclass(frozen=True, eq=False)
class EchoReport:
    echo_times: np.ndarray
    echo_energies: np.ndarray  # p = 0, 1, 2, ... relative to the reference pulse energy

    @property
    def transmitted(self) -> float:
        return float(self.echo_energies[0])

    @property
    def efficiency_first(self) -> float:
        return float(self.echo_energies[1])


@dataclass(frozen=True)
class CombDesign:
    alphaL: float
    finesse: float
    predicted_eta: float
    period_T: float | None = None

    @property
    def gamma_T(self) -> float:
        """Tooth half-width times period, ``π/F``."""
        return math.pi / self.finesse

    @property
    def gamma_peak(self) -> float | None:
        return None if self.period_T is None else self.gamma_T / self.period_T


def order_recursion(
    coeffs: FourierCoeffs,
    alphaL: float,
    P: int = 1,
    n_z: int = DEFAULT_STEPS,
    *,
    y0: float = HEAVISIDE_AT_ZERO,
) -> EchoOrderAmplitudes:
    """Integrate ``∂z a_k = -α Σ_{p≤k} a_p g_{p-k} Y(k-p)`` over the crystal with RK4.

    Order ``k`` is driven only by orders ``p ≤ k``, so the system matrix is
    lower triangular.  Starts from ``a_0 = 1``, ``a_{p≥1} = 0``.
    """
    if P < 1:
        raise DomainError(f"max order P must be >= 1, got {P}")
    if alphaL < 0:
        raise DomainError(f"alphaL must be >= 0, got {alphaL}")
    if coeffs.cutoff < P:
        raise CutoffError(f"Fourier cutoff {coeffs.cutoff} does not reach order {P}")
    M = np.zeros((P + 1, P + 1), dtype=np.complex128)
    for k in range(P + 1):
        M[k, k] = -alphaL * y0 * coeffs[0]
        for p in range(k):
            M[k, p] = -alphaL * coeffs[p - k]
    h = 1.0 / n_z
    a = np.zeros(P + 1, dtype=np.complex128)
    a[0] = 1.0
    out = np.empty((P + 1, n_z + 1), dtype=np.complex128)
    out[:, 0] = a
    for i in range(n_z):
        k1 = M @ a
        k2 = M @ (a + 0.5 * h * k1)
        k3 = M @ (a + 0.5 * h * k2)
        k4 = M @ (a + h * k3)
        a = a + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[:, i + 1] = a
    return EchoOrderAmplitudes(out, np.linspace(0.0, 1.0, n_z + 1))


def eta_3pe(alphaL: float) -> float:
    """First-echo efficiency of a sinusoidal grating, ``(αL/4)² exp(-αL/2)``."""
    if alphaL < 0:
        raise DomainError(f"alphaL must be >= 0, got {alphaL}")
    return (alphaL / 4.0) ** 2 * math.exp(-alphaL / 2.0)


def eta_afc_forward(alphaL: float, F: float) -> float:
    """Forward efficiency of a Lorentzian comb of finesse ``F``."""
    if alphaL < 0:
        raise DomainError(f"alphaL must be >= 0, got {alphaL}")
    if F < 1:
        raise DomainError(f"finesse must be >= 1, got {F}")
    x = math.pi * alphaL / (2.0 * F)
    return x * x * math.exp(-x - 2.0 * math.pi / F)


def eta_optimal(alphaL: float) -> float:
    """Best forward comb efficiency at optical depth ``alphaL``."""
    return FORWARD_LIMIT * (alphaL / (4.0 + alphaL)) ** 2


def optimal_finesse(alphaL: float, period_T: float | None = None) -> CombDesign:
    """Finesse ``π(1 + αL/4)`` maximising :func:`eta_afc_forward` at fixed ``alphaL``."""
    if not alphaL > 0:
        raise DomainError(f"alphaL must be > 0, got {alphaL}")
    return CombDesign(alphaL, math.pi * (1.0 + alphaL / 4.0), eta_optimal(alphaL), period_T)


def eta_from_coeffs(coeffs: FourierCoeffs, alphaL: float) -> float:
    """``(|g_{-1}| αL)² exp(-g_0 αL)`` from (possibly measured) Fourier coefficients."""
    if coeffs.cutoff < 1:
        raise CutoffError("coefficients must include n = 0 and n = -1")
    g0 = coeffs[0].real
    g1 = abs(coeffs[-1])
    return (g1 * alphaL) ** 2 * math.exp(-g0 * alphaL)


def detect_echoes(
    output: PulseEnvelope,
    reference: PulseEnvelope,
    period_T: float,
    max_order: int | None = None,
) -> EchoReport:
    """Energy in windows ``[pT - T/2, pT + T/2)`` after the reference centroid.

    ``reference`` is the same input sent through a bleached sample; energies
    are divided by its total energy.
    """
    if reference.size != output.size or not np.allclose(reference.t, output.t):
        raise DomainError("output and reference must share a time grid")
    rms = reference.rms_duration()
    if period_T < 4.0 * rms:
        raise ResolutionError(f"echo period {period_T:.3g} s is shorter than 4 pulse rms widths ({4 * rms:.3g} s)")
    t = reference.t
    t_c = reference.centroid()
    n_fit = int(math.floor((t[-1] + output.dt - t_c - 0.5 * period_T) / period_T)) + 1
    if n_fit < 2:
        raise ResolutionError("time window does not contain the first echo window")
    n = n_fit if max_order is None else min(n_fit, max_order + 1)
    e_ref = reference.energy()
    intensity = output.intensity
    k = np.floor((t - t_c + 0.5 * period_T) / period_T).astype(int)
    energies = np.zeros(n)
    sel = (k >= 0) & (k < n)
    np.add.at(energies, k[sel], intensity[sel])
    energies *= output.dt / e_ref
    return EchoReport(t_c + period_T * np.arange(n), energies)


def closed_form_eta(profile: SpectralProfile, alphaL: float) -> float:
    kind = profile.kind
    if kind is ProfileKind.COSINE_GRATING:
        return eta_3pe(alphaL)
    if kind is ProfileKind.LORENTZIAN_COMB:
        return eta_afc_forward(alphaL, profile.finesse)
    if kind is ProfileKind.SAMPLED and profile.period_T is not None:
        return eta_from_coeffs(fourier_coeffs(profile, 1), alphaL)
    raise UnsupportedProfileError(f"no closed-form echo efficiency for {kind.value} profiles")


@dataclass(frozen=True)
class EfficiencyRoutes:
    eta_recursion: float
    eta_closed: float
    eta_detected: float
    transmitted: float

    def max_pairwise_rel(self) -> float:
        v = (self.eta_recursion, self.eta_closed, self.eta_detected)
        return max(abs(a - b) / max(abs(a), abs(b)) for a in v for b in v if a or b) if any(v) else 0.0


def efficiency_routes(
    profile: SpectralProfile,
    medium: MediumParams,
    pulse: PulseEnvelope,
    n_z: int = DEFAULT_STEPS,
) -> EfficiencyRoutes:
    """First-echo efficiency by recursion, closed form and trace detection."""
    if not profile.is_periodic:
        raise UnsupportedProfileError("echo efficiencies need a periodic profile")
    aL = medium.optical_depth
    coeffs = fourier_coeffs(profile, 1)
    rec = order_recursion(coeffs, aL, P=1, n_z=n_z).efficiency(1)
    out = propagate_through(pulse, profile, medium)
    report = detect_echoes(out, pulse, profile.period_T, max_order=1)
    return EfficiencyRoutes(rec, closed_form_eta(profile, aL), report.efficiency_first, report.transmitted)
