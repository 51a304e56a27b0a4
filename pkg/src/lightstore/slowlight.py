"""Group delay through a transparency window and the field/atom energy split."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import AuditInvalidError, DetectionError, DomainError
from .oracle import run_lattice
from .response import SPEED_OF_LIGHT, MediumParams, PulseEnvelope, propagate_through
from .spectra import TWO_PI, ProfileKind, SpectralProfile

DETECTION_FLOOR = 1e-6
CONTAINMENT_TOL = 0.01


@dataclass(frozen=True)
class DelayReport:
    delay_measured: float
    delay_expected: float
    transmission: float
    distortion: float
    transit_time: float = 0.0

    @property
    def relative_error(self) -> float:
        return (self.delay_measured - self.delay_expected) / self.delay_expected


@dataclass(frozen=True)
class EnergyAudit:
    """Energy bookkeeping at one instant, as fractions of the energy inside the medium.

    ``contained`` is the share of the whole input pulse that is inside the
    medium at the snapshot; fractions are only meaningful when it is close to 1
    (``valid``).
    """

    field_fraction: float
    atomic_fraction: float
    vg_over_c: float
    contained: float
    valid: bool

    @property
    def total(self) -> float:
        return self.field_fraction + self.atomic_fraction


def group_delay(input: PulseEnvelope, output: PulseEnvelope) -> float:
    """Shift of the intensity centroid between two traces on the same grid."""
    if input.size != output.size or not np.allclose(input.t, output.t):
        raise DomainError("input and output must share a time grid")
    e_in, e_out = input.energy(), output.energy()
    if not e_out > DETECTION_FLOOR * e_in:
        raise DetectionError(f"output energy ratio {e_out / e_in:.3g} too small to measure a delay")
    return output.centroid() - input.centroid()


def expected_delay(medium: MediumParams, delta0: float) -> float:
    """``αL/Δ₀``; the vacuum transit ``L/c`` is left out."""
    if not delta0 > 0:
        raise DomainError(f"delta0 must be positive, got {delta0}")
    return medium.optical_depth / delta0


def vg_over_c(medium: MediumParams, delta0: float) -> float:
    """Group velocity in a hole of width ``delta0``, relative to ``c``."""
    if not delta0 > 0:
        raise DomainError(f"delta0 must be positive, got {delta0}")
    return 1.0 / (1.0 + SPEED_OF_LIGHT * medium.alpha / delta0)


def containment_fraction(pulse: PulseEnvelope, medium: MediumParams, delta0: float) -> float:
    """Expected group delay in units of the pulse rms duration (>> 1: fully contained)."""
    rms = pulse.rms_duration()
    if not rms > 0:
        raise DomainError("pulse has zero rms duration")
    return expected_delay(medium, delta0) / rms


def _shifted(values: np.ndarray, omega_fft: np.ndarray, shift: float) -> np.ndarray:
    return np.fft.ifft(np.fft.fft(values) * np.exp(-1j * omega_fft * shift))


def distortion(reference: PulseEnvelope, output: PulseEnvelope) -> float:
    """Normalised L2 mismatch of ``output`` against the best shifted and scaled ``reference``.

    With ``c(s) = <ref(t-s), out>``, the optimal complex scale leaves the residual
    ``sqrt(1 - max_s |c(s)|² / (|ref|² |out|²))``.
    """
    if reference.size != output.size or not np.allclose(reference.t, output.t):
        raise DomainError("reference and output must share a time grid")
    a, b = reference.values, output.values
    na, nb = np.vdot(a, a).real, np.vdot(b, b).real
    if na == 0 or nb == 0:
        return 1.0
    dt = reference.dt
    om = TWO_PI * np.fft.fftfreq(a.size, dt)
    xcorr = np.fft.ifft(np.conj(np.fft.fft(a)) * np.fft.fft(b))
    k = int(np.argmax(np.abs(xcorr)))
    s0 = (k if k <= a.size // 2 else k - a.size) * dt

    def neg_overlap(s):
        return -abs(np.vdot(_shifted(a, om, s), b)) ** 2

    res = optimize.minimize_scalar(neg_overlap, bounds=(s0 - dt, s0 + dt), method="bounded",
                                   options={"xatol": 1e-6 * dt})
    best = max(-res.fun, -neg_overlap(s0))
    return float(math.sqrt(max(0.0, 1.0 - best / (na * nb))))


def delay_report(pulse: PulseEnvelope, profile: SpectralProfile, medium: MediumParams) -> DelayReport:
    """Propagate ``pulse`` through a hole and compare its delay with ``αL/Δ₀``."""
    if profile.kind is not ProfileKind.HOLE:
        raise DomainError("delay reports are defined for hole profiles")
    out = propagate_through(pulse, profile, medium)
    return DelayReport(
        delay_measured=group_delay(pulse, out),
        delay_expected=expected_delay(medium, profile.delta0),
        transmission=out.energy() / pulse.energy(),
        distortion=distortion(pulse, out),
        transit_time=medium.transit_time,
    )


def _cumulative(e: np.ndarray, t0: float, dt: float, when: float) -> float:
    """``∫_{-∞}^{when}`` of the linear interpolant of samples ``e`` (zero before ``t0``)."""
    pos = (when - t0) / dt
    if pos <= 0:
        return 0.0
    k = min(int(math.floor(pos)), e.size - 1)
    full = dt * (0.5 * e[0] + np.sum(e[1:k]) + 0.5 * e[k]) if k > 0 else 0.0
    if k >= e.size - 1:
        return float(full)
    x = (pos - k) * dt
    return float(full + x * e[k] + 0.5 * x * x / dt * (e[k + 1] - e[k]))


def energy_audit(
    pulse: PulseEnvelope,
    profile: SpectralProfile,
    medium: MediumParams,
    snapshot_time: float,
    n_delta: int = 4096,
    n_z: int = 256,
    span: float | None = None,
    strict: bool = True,
) -> EnergyAudit:
    """Split the energy inside the medium at ``snapshot_time`` between field and atoms.

    Works on the lattice state of the time-domain integrator.  Field energy is
    ``∫ |Ω(z,t)|² dz``; atomic energy is the population term
    ``(αc/π) ∫∫ g (w + 1)`` with ``w + 1 = |P|²/2``, which is conserved together
    with the field.  Both are normalised by the net energy that has entered and
    not yet left, ``c ∫ (|Ω_in|² - |Ω_out|²) dt``.  With ``strict`` an
    uncontained pulse raises :class:`AuditInvalidError` carrying the flagged
    audit.
    """
    if profile.kind is not ProfileKind.HOLE:
        raise DomainError("energy audit is defined for hole profiles")
    c = SPEED_OF_LIGHT
    dt, t0 = pulse.dt, pulse.t[0]
    # only the part of the window up to the snapshot matters
    last = int(math.floor((snapshot_time - t0) / dt)) + 2
    if last > pulse.size or snapshot_time < t0:
        raise DomainError("snapshot time outside the pulse grid")
    n_keep = 1 << max(2, (last - 1).bit_length())
    head = PulseEnvelope(pulse.t[:n_keep], pulse.values[:n_keep]) if n_keep < pulse.size else pulse
    run = run_lattice(head, profile, medium, n_delta=n_delta, n_z=n_z, span=span, snapshot_time=snapshot_time)

    z = run.z
    tau = snapshot_time - z / c
    e_rows = np.abs(run.field) ** 2
    pos = (tau - t0) / dt
    k = np.minimum(np.floor(pos).astype(int), head.size - 2)
    f = pos - k
    rows = np.arange(z.size)
    e_snap = (1 - f) * e_rows[rows, k] + f * e_rows[rows, k + 1]

    u_field = float(np.trapezoid(e_snap, z))
    tail_density = run.far_level * e_snap * 2.0 / run.span
    u_atoms = float(medium.alpha * c / TWO_PI * np.trapezoid(run.stored + tail_density, z))

    entered = c * _cumulative(e_rows[0], t0, dt, snapshot_time)
    left = c * _cumulative(e_rows[-1], t0, dt, snapshot_time - medium.length_L / c)
    net = entered - left
    total_in = c * _cumulative(np.abs(pulse.values) ** 2, t0, dt, pulse.t[-1])
    contained = net / total_in
    audit = EnergyAudit(
        field_fraction=u_field / net,
        atomic_fraction=u_atoms / net,
        vg_over_c=vg_over_c(medium, profile.delta0),
        contained=contained,
        valid=bool(contained >= 1.0 - CONTAINMENT_TOL),
    )
    if strict and not audit.valid:
        raise AuditInvalidError(
            f"pulse not contained at t={snapshot_time:.4g} s: only {contained:.3f} of its energy is inside",
            audit,
        )
    return audit
