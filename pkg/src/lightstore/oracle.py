"""Brute-force time-domain integration of the weak-signal Maxwell-Bloch equations.

    ∂z Ω(z,τ) = -(iα/2π) Σ_j g(Δ_j) dΔ P_j(z,τ)
    ∂τ P_j    = -(iΔ_j + γ) P_j - i Ω(z,τ)

on a uniform midpoint detuning grid over ``[-W, W]`` (τ is the retarded
time).  Dipoles outside the window are far off resonance and follow the field
adiabatically, ``P ≈ -Ω/Δ - i(γΩ + ∂τΩ)/Δ²``; their net contribution,
``-(α ḡ/πW)(γΩ + ∂τΩ)``, is added to the source so that truncating the window does
not bias the group delay.

This path shares nothing with :mod:`lightstore.response` beyond the profile
evaluation and is used to check it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, StabilityError
from .response import SPEED_OF_LIGHT, MediumParams, PulseEnvelope, quadrature_span
from .spectra import TWO_PI, ProfileKind, SpectralProfile

MAX_DETUNINGS = 4096
MAX_SLICES = 256
REVIVAL_TOL = 1e-2


def _phi(x: np.ndarray):
    """``φ1 = (1 - e^{-x})/x`` and ``ψ = (1 - e^{-x}(1+x))/x²``, series near 0."""
    x = np.asarray(x, dtype=np.complex128)
    small = np.abs(x) < 0.1
    safe = np.where(small, 1.0, x)
    em = np.exp(-safe)
    phi1 = (1.0 - em) / safe
    psi = (1.0 - em * (1.0 + safe)) / safe**2
    if np.any(small):
        xs = x[small]
        s1 = np.zeros_like(xs)
        s2 = np.zeros_like(xs)
        term = np.ones_like(xs)
        fact = 1.0
        for k in range(12):
            fact *= k + 1  # (k+1)!
            s1 += term / fact
            s2 += term * (k + 1) / (fact * (k + 2))
            term = term * (-xs)
        phi1[small] = s1
        psi[small] = s2
    return phi1, psi


@dataclass(frozen=True, eq=False)
class LatticeRun:
    """Full state of one oracle run."""

    t: np.ndarray
    z: np.ndarray
    field: np.ndarray  # Ω(z_i, τ_n)
    stored: np.ndarray  # Σ_j g_j dΔ |P_j|² on each row at the snapshot (if requested)
    span: float
    d_delta: float
    far_level: float
    medium: MediumParams

    def output(self) -> PulseEnvelope:
        return PulseEnvelope(self.t, self.field[-1])


def _detuning_grid(profile: SpectralProfile, W: float, n_delta: int):
    d_delta = 2.0 * W / n_delta
    delta = -W + (np.arange(n_delta) + 0.5) * d_delta
    if profile.kind is ProfileKind.SAMPLED:
        x = profile.delta_grid
        g = np.where((delta >= x[0]) & (delta <= x[-1]), np.interp(delta, x, profile.g_values), profile.background)
    else:
        g = np.asarray(profile(delta), dtype=np.float64)
    return delta, g, d_delta


def run_lattice(
    pulse: PulseEnvelope,
    profile: SpectralProfile,
    medium: MediumParams,
    n_delta: int = 1024,
    n_z: int = 64,
    span: float | None = None,
    snapshot_time: float | None = None,
) -> LatticeRun:
    if not (2 <= n_delta <= MAX_DETUNINGS and 1 <= n_z <= MAX_SLICES):
        raise DomainError(f"oracle is for small lattices: n_delta <= {MAX_DETUNINGS}, n_z <= {MAX_SLICES}")
    W = quadrature_span(profile, medium) if span is None else float(span)
    dt = pulse.dt
    bw = pulse.rms_bandwidth()
    if W < 10.0 * bw:
        raise StabilityError(f"detuning window W={W:.3g} rad/s is too narrow for pulse bandwidth {bw:.3g} rad/s")
    delta, g, d_delta = _detuning_grid(profile, W, n_delta)
    revival = TWO_PI / d_delta
    window = pulse.size * dt
    if medium.alpha > 0 and window > revival and math.exp(-medium.gamma * revival) > REVIVAL_TOL:
        raise StabilityError(
            f"detuning step {d_delta:.3g} rad/s gives spurious revivals after {revival:.3g} s, "
            f"inside the {window:.3g} s window; increase n_delta or gamma"
        )

    keep = g > 0
    delta, g = delta[keep], g[keep]
    lam = 1j * delta + medium.gamma
    phi1, psi = _phi(lam * dt)
    E = np.exp(-lam * dt)
    A = dt * phi1
    B = dt * (phi1 - psi)
    w = g * d_delta

    coef = -1j * medium.alpha / TWO_PI
    gbar = profile.far_level
    tail = -medium.alpha * gbar / (math.pi * W * dt)
    tail0 = -medium.alpha * gbar * medium.gamma / (math.pi * W)
    z = np.linspace(0.0, medium.length_L, n_z + 1)
    dz = medium.length_L / n_z

    snap_k = np.full(n_z + 1, -2, dtype=np.int64)
    snap_f = np.zeros(n_z + 1)
    if snapshot_time is not None:
        tau = snapshot_time - z / SPEED_OF_LIGHT
        pos = (tau - pulse.t[0]) / dt
        if np.any(pos < 0) or np.any(pos > pulse.size - 1):
            raise DomainError("snapshot time outside the simulated window")
        snap_k = np.minimum(np.floor(pos).astype(np.int64), pulse.size - 2)
        snap_f = pos - snap_k

    field, stored = _kernels.bloch_lattice(pulse.values, E, A, B, w, coef, tail, tail0, dz, n_z, snap_k, snap_f)
    return LatticeRun(pulse.t, z, field, stored, W, d_delta, gbar, medium)


def time_domain_oracle(
    pulse: PulseEnvelope,
    profile: SpectralProfile,
    medium: MediumParams,
    n_delta: int = 1024,
    n_z: int = 64,
    span: float | None = None,
) -> PulseEnvelope:
    """Output envelope ``Ω(L, τ)`` from direct lattice integration."""
    return run_lattice(pulse, profile, medium, n_delta=n_delta, n_z=n_z, span=span).output()
