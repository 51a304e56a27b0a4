"""Linear frequency response of an inhomogeneously broadened absorber.

Fourier convention: analysis with ``exp(-iωt)`` (``numpy.fft.fft``), synthesis
with ``exp(+iωt)``.  With it the dipole response is
``P(ω) = -Ω(ω)/(ω + Δ - iγ)`` and the field obeys ``∂z Ω(ω) = K(ω) Ω(ω)`` with

    K(ω) = (iα/2π) ∫ g(Δ) / (ω + Δ - iγ) dΔ.

A positive group delay shows up as ``Im K'(0) < 0``.  Propagation is done in
the frame moving at ``c``; the vacuum transit ``L/c`` is available as
:attr:`MediumParams.transit_time` but never applied to envelopes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import _kernels
from .errors import AliasingError, DomainError, QuadratureError
from .spectra import TWO_PI, ProfileKind, SpectralProfile

SPEED_OF_LIGHT = 299_792_458.0
DEFAULT_GAMMA = TWO_PI * 10e3  # homogeneous half-width, rad/s

SPECTRAL_EDGE_TOL = 1e-6
TEMPORAL_EDGE_TOL = 1e-3


@dataclass(frozen=True)
class MediumParams:
    """Absorption coefficient ``alpha`` (1/m), ``length_L`` (m), homogeneous width ``gamma`` (rad/s)."""

    alpha: float
    length_L: float
    gamma: float = DEFAULT_GAMMA

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha >= 0):
            raise DomainError(f"alpha must be >= 0, got {self.alpha}")
        if not self.length_L > 0:
            raise DomainError(f"length_L must be > 0, got {self.length_L}")
        if not self.gamma > 0:
            raise DomainError(f"gamma must be > 0, got {self.gamma}")

    @classmethod
    def from_optical_depth(cls, alphaL: float, length_L: float = 0.01, gamma: float = DEFAULT_GAMMA):
        return cls(alphaL / length_L, length_L, gamma)

    @property
    def optical_depth(self) -> float:
        return self.alpha * self.length_L

    @property
    def transit_time(self) -> float:
        return self.length_L / SPEED_OF_LIGHT


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class PulseEnvelope:
    """Complex slowly varying envelope on a uniform time grid of power-of-two length."""

    t: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.array(self.t, dtype=np.float64)
        v = np.array(self.values, dtype=np.complex128)
        if t.ndim != 1 or t.shape != v.shape:
            raise DomainError("t and values must be 1-D arrays of equal length")
        if not _is_pow2(t.size) or t.size < 4:
            raise DomainError(f"grid length must be a power of two >= 4, got {t.size}")
        dt = np.diff(t)
        if np.any(dt <= 0) or not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0):
            raise DomainError("time grid must be uniform and increasing")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)

    @classmethod
    def gaussian(cls, rms: float, center: float, n_points: int, dt: float, t0: float = 0.0, amplitude=1.0):
        """Gaussian whose *intensity* has standard deviation ``rms``."""
        if not rms > 0:
            raise DomainError(f"rms width must be positive, got {rms}")
        t = t0 + dt * np.arange(n_points)
        return cls(t, amplitude * np.exp(-((t - center) ** 2) / (4.0 * rms**2)))

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def size(self) -> int:
        return self.t.size

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def energy(self) -> float:
        return float(np.sum(self.intensity) * self.dt)

    def centroid(self) -> float:
        w = self.intensity
        return float(np.sum(self.t * w) / np.sum(w))

    def rms_duration(self) -> float:
        w = self.intensity
        c = np.sum(self.t * w) / np.sum(w)
        return float(np.sqrt(np.sum((self.t - c) ** 2 * w) / np.sum(w)))

    def omega_grid(self) -> np.ndarray:
        """Ascending angular-frequency grid conjugate to ``t``."""
        return np.fft.fftshift(TWO_PI * np.fft.fftfreq(self.size, self.dt))

    def spectrum(self) -> np.ndarray:
        """Spectrum on :meth:`omega_grid` (ascending order)."""
        return np.fft.fftshift(np.fft.fft(self.values))

    def rms_bandwidth(self) -> float:
        """RMS angular bandwidth of ``|Ω(ω)|²`` about its mean."""
        w = np.abs(self.spectrum()) ** 2
        om = self.omega_grid()
        m = np.sum(om * w) / np.sum(w)
        return float(np.sqrt(np.sum((om - m) ** 2 * w) / np.sum(w)))

    def with_values(self, values) -> "PulseEnvelope":
        return PulseEnvelope(self.t, values)

    def __mul__(self, a):
        return self.with_values(self.values * a)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class TransferFunction:
    """``H(ω) = exp(K(ω) L)`` sampled on an ascending angular-frequency grid."""

    omega: np.ndarray
    values: np.ndarray
    medium: MediumParams = field(repr=False)
    profile: SpectralProfile = field(repr=False)

    @property
    def abs2(self) -> np.ndarray:
        return np.abs(self.values) ** 2


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


def susceptibility_kernel(profile: SpectralProfile, medium: MediumParams, omega):
    """Propagation constant ``K(ω)`` per unit length (1/m), complex.

    Flat, hole, comb and grating use closed forms obtained by residues; sampled
    profiles use the exact Cauchy integral of their linear interpolant, with
    the constant ``background`` level assumed outside the tabulated range.
    """
    om = np.asarray(omega, dtype=np.float64)
    a, gam = medium.alpha, medium.gamma
    kind = profile.kind
    if kind is ProfileKind.FLAT:
        K = np.full(om.shape, -0.5 * a * profile.level, dtype=np.complex128)
    elif kind is ProfileKind.HOLE:
        h = 0.5 * profile.delta0
        K = -0.5 * a - 0.5j * a * h / (om - 1j * (h + gam))
    elif kind is ProfileKind.LORENTZIAN_COMB:
        G, T = profile.gamma_peak, profile.period_T
        # (iαΓT/4) cot((ω - i(Γ+γ))T/2), written with |q| < 1
        q = np.exp(-1j * om * T - (G + gam) * T)
        K = -0.25 * a * G * T * (1.0 + q) / (1.0 - q)
    elif kind is ProfileKind.COSINE_GRATING:
        T = profile.period_T
        K = -0.25 * a - 0.25 * a * np.exp(-1j * om * T - gam * T)
    else:
        K = (1j * a / TWO_PI) * _sampled_cauchy(profile, om.ravel(), gam).reshape(om.shape)
    return complex(K) if np.ndim(K) == 0 else K


def _sampled_cauchy(profile: SpectralProfile, om: np.ndarray, gamma: float) -> np.ndarray:
    x, g, bg = profile.delta_grid, profile.g_values, profile.background
    z = om - 1j * gamma
    inner = _kernels.cauchy_piecewise_linear(x, g, z)
    # constant level bg on the two semi-infinite tails: bg (iπ - ∫_grid dΔ/(Δ+z))
    tails = bg * (1j * math.pi - (np.log(x[-1] + z) - np.log(x[0] + z)))
    return inner + tails


def quadrature_span(profile: SpectralProfile, medium: MediumParams) -> float:
    """Half-width ``W`` of the detuning window used by brute-force routes."""
    W = 100.0 * medium.gamma
    if profile.kind is ProfileKind.HOLE:
        W = max(W, 20.0 * profile.delta0)
    if profile.is_periodic:
        period = TWO_PI / profile.period_T
        W = max(W, 20.0 * period)
        W = math.ceil(W / period) * period  # end on whole periods: truncation error O(1/(WT)^2)
    if profile.kind is ProfileKind.SAMPLED:
        W = max(W, abs(profile.delta_grid[0]), abs(profile.delta_grid[-1]))
    return W


def kernel_quadrature(profile, medium, omega, span=None, epsabs=1e-10, limit=4000):
    """``K(ω)`` by adaptive quadrature; an independent check of :func:`susceptibility_kernel`.

    The far level ``ḡ`` is split off and integrated analytically (its
    principal-value part vanishes, leaving ``iπ ḡ``); ``g - ḡ`` is integrated
    numerically over ``[-W, W]``.  Raises :class:`QuadratureError` when the
    estimated error exceeds ``epsabs`` times the kernel scale.
    """
    W = quadrature_span(profile, medium) if span is None else float(span)
    gbar = profile.far_level
    gam = medium.gamma
    lo, hi = -W, W
    if profile.kind is ProfileKind.SAMPLED:
        lo, hi = profile.delta_grid[0], profile.delta_grid[-1]

    def dev(d):
        return profile(d) - gbar

    # breakpoints at the features of g: kinks of a sampled interpolant, comb teeth
    marks = []
    if profile.kind is ProfileKind.HOLE:
        marks = [-profile.delta0, 0.0, profile.delta0]
    elif profile.kind is ProfileKind.SAMPLED:
        marks = list(profile.delta_grid[1:-1])
    elif profile.is_periodic:
        period = TWO_PI / profile.period_T
        marks = list(np.arange(math.ceil(lo / period), math.floor(hi / period) + 1) * period)
    if len(marks) > limit // 4:
        marks = []

    out = []
    for w in np.atleast_1d(np.asarray(omega, dtype=np.float64)):
        pts = sorted({p for p in [-w, *marks] if lo < p < hi})

        def re_f(d):
            x = d + w
            return dev(d) * x / (x * x + gam * gam)

        def im_f(d):
            x = d + w
            return dev(d) * gam / (x * x + gam * gam)

        kw = dict(limit=limit, epsabs=epsabs, epsrel=1e-10, points=pts or None)
        with warnings.catch_warnings():
            # convergence is judged below from the returned error estimates
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            re, re_err = integrate.quad(re_f, lo, hi, **kw)
            im, im_err = integrate.quad(im_f, lo, hi, **kw)
        err = math.hypot(re_err, im_err)
        if err > max(epsabs, 1e-8 * math.pi) * 1e3:
            raise QuadratureError("kernel quadrature did not converge", err)
        out.append((1j * medium.alpha / TWO_PI) * (complex(re, im) + 1j * math.pi * gbar))
    out = np.array(out)
    return complex(out[0]) if np.ndim(omega) == 0 else out


def transfer_function(profile: SpectralProfile, medium: MediumParams, omega_grid) -> TransferFunction:
    om = np.asarray(omega_grid, dtype=np.float64)
    if om.ndim != 1 or om.size < 2:
        raise DomainError("omega_grid must be a 1-D array")
    d = np.diff(om)
    if np.any(d <= 0) or not np.allclose(d, d[0], rtol=1e-9, atol=0.0):
        raise DomainError("omega_grid must be uniform and ascending")
    if abs(om[0] + om[-1]) > 1.5 * d[0]:
        raise DomainError("omega_grid must be symmetric about 0")
    H = np.exp(susceptibility_kernel(profile, medium, om) * medium.length_L)
    return TransferFunction(om, H, medium, profile)


def transfer_function_for(pulse: PulseEnvelope, profile: SpectralProfile, medium: MediumParams) -> TransferFunction:
    return transfer_function(profile, medium, pulse.omega_grid())


def _edge_max(a: np.ndarray, frac: float = 1 / 64, minimum: int = 2, maximum: int = 16) -> float:
    k = max(minimum, min(int(a.size * frac), maximum))
    return float(max(np.max(a[:k]), np.max(a[-k:])))


def propagate(pulse: PulseEnvelope, tf: TransferFunction) -> PulseEnvelope:
    """Output envelope ``F⁻¹[Ω(0,ω) H(ω)]`` on the input grid.

    Refuses (``AliasingError``) when the input spectrum is not negligible at
    the Nyquist edge, or when the output reaches the ends of the time window
    and would wrap around.
    """
    om = pulse.omega_grid()
    if tf.omega.shape != om.shape or not np.allclose(tf.omega, om, rtol=1e-9, atol=1e-12 * abs(om).max()):
        raise DomainError("transfer function grid is not FFT-conjugate to the pulse grid")
    spec = np.fft.fft(pulse.values)
    mag = np.abs(np.fft.fftshift(spec))
    peak = mag.max()
    if peak == 0:
        return pulse.with_values(np.zeros_like(pulse.values))
    if _edge_max(mag) > SPECTRAL_EDGE_TOL * peak:
        raise AliasingError("input spectrum reaches the edge of the frequency grid; use a finer dt")
    amp = np.abs(pulse.values)
    if _edge_max(amp) > SPECTRAL_EDGE_TOL * amp.max():
        raise AliasingError("input pulse is not negligible at the edges of the time window")
    out = np.fft.ifft(spec * np.fft.ifftshift(tf.values))
    oamp = np.abs(out)
    if oamp.max() > 0 and _edge_max(oamp) > TEMPORAL_EDGE_TOL * oamp.max():
        raise AliasingError("output reaches the edge of the time window and would wrap; use a longer grid")
    return pulse.with_values(out)


def propagate_through(pulse: PulseEnvelope, profile: SpectralProfile, medium: MediumParams) -> PulseEnvelope:
    return propagate(pulse, transfer_function_for(pulse, profile, medium))
