"""Spectral distributions g(Δ) of the absorbing ensemble and their Fourier series.

Detunings are angular frequencies (rad/s) everywhere.  A periodic profile is
expanded as ``g(Δ) = Σ_n g_n exp(-i n Δ T)`` so that ``g_{-1}`` is the
coefficient that feeds the first echo at time ``T``.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, RangeError, UnsupportedProfileError

TWO_PI = 2.0 * math.pi
MHZ = TWO_PI * 1e6  # rad/s per MHz

DEFAULT_CUTOFF = 8
MIN_POINTS_PER_PERIOD = 64


class ProfileKind(str, enum.Enum):
    FLAT = "flat"
    HOLE = "hole"
    LORENTZIAN_COMB = "lorentzian_comb"
    COSINE_GRATING = "cosine_grating"
    SAMPLED = "sampled"


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SpectralProfile:
    """Normalised inhomogeneous distribution.

    Build instances through the classmethods rather than the constructor;
    each kind uses a different subset of the fields:

    * ``flat(level)`` -- constant ``g = level`` (``0`` is a bleached sample).
    * ``hole(delta0)`` -- ``1 - 1/(1 + 4Δ²/Δ₀²)``; ``delta0`` is the FWHM.
    * ``lorentzian_comb(gamma_peak, period_T)`` -- unit-height Lorentzian
      teeth of half-width ``gamma_peak`` at ``Δ = 2πl/T``.
    * ``cosine_grating(period_T)`` -- ``[1 + cos(ΔT)]/2``.
    * ``sampled(delta_grid, g_values)`` -- linear interpolation of tabulated
      values on a uniform grid.
    """

    kind: ProfileKind
    level: float = 1.0
    delta0: float | None = None
    gamma_peak: float | None = None
    period_T: float | None = None
    delta_grid: np.ndarray | None = field(default=None, repr=False)
    g_values: np.ndarray | None = field(default=None, repr=False)
    background: float | None = None

    # -- constructors -----------------------------------------------------

    @classmethod
    def flat(cls, level: float = 1.0) -> "SpectralProfile":
        if not 0.0 <= level <= 1.0:
            raise DomainError(f"flat level must lie in [0, 1], got {level}")
        return cls(ProfileKind.FLAT, level=float(level))

    @classmethod
    def bleached(cls) -> "SpectralProfile":
        return cls.flat(0.0)

    @classmethod
    def hole(cls, delta0: float) -> "SpectralProfile":
        if not delta0 > 0:
            raise DomainError(f"hole width delta0 must be positive, got {delta0}")
        return cls(ProfileKind.HOLE, delta0=float(delta0))

    @classmethod
    def lorentzian_comb(cls, gamma_peak: float, period_T: float) -> "SpectralProfile":
        if not (gamma_peak > 0 and period_T > 0):
            raise DomainError("comb tooth width and period must be positive")
        if gamma_peak * period_T > math.pi:
            raise DomainError(
                f"teeth overlap: gamma_peak*T = {gamma_peak * period_T:.4g} exceeds pi (finesse < 1)"
            )
        return cls(ProfileKind.LORENTZIAN_COMB, gamma_peak=float(gamma_peak), period_T=float(period_T))

    @classmethod
    def afc(cls, finesse_value: float, period_T: float) -> "SpectralProfile":
        """Lorentzian comb parametrised by its finesse ``F = π/(ΓT)``."""
        if not finesse_value > 0:
            raise DomainError(f"finesse must be positive, got {finesse_value}")
        return cls.lorentzian_comb(math.pi / (finesse_value * period_T), period_T)

    @classmethod
    def cosine_grating(cls, period_T: float) -> "SpectralProfile":
        if not period_T > 0:
            raise DomainError(f"grating period must be positive, got {period_T}")
        return cls(ProfileKind.COSINE_GRATING, period_T=float(period_T))

    @classmethod
    def sampled(
        cls,
        delta_grid,
        g_values,
        period_T: float | None = None,
        background: float | None = None,
    ) -> "SpectralProfile":
        """Tabulated profile.

        ``period_T`` marks the samples as covering whole periods of a periodic
        structure (needed by :func:`fourier_coeffs`; defaults to one period
        spanning the grid).  ``background`` is the level assumed outside the
        grid when computing the medium response; it defaults to the mean of
        the two end values.
        """
        x = _frozen(delta_grid)
        g = _frozen(g_values)
        if x.ndim != 1 or x.shape != g.shape or x.size < 2:
            raise DomainError("delta_grid and g_values must be 1-D arrays of equal length >= 2")
        step = np.diff(x)
        if np.any(step <= 0):
            raise DomainError("delta_grid must be strictly increasing")
        if not np.allclose(step, step[0], rtol=1e-6, atol=0.0):
            raise DomainError("delta_grid must be uniformly spaced")
        if np.any(~np.isfinite(g)) or np.any(g < 0):
            raise DomainError("g_values must be finite and non-negative")
        if period_T is not None and not period_T > 0:
            raise DomainError(f"period_T must be positive, got {period_T}")
        if background is None:
            background = 0.5 * (g[0] + g[-1])
        return cls(
            ProfileKind.SAMPLED,
            period_T=None if period_T is None else float(period_T),
            delta_grid=x,
            g_values=g,
            background=float(background),
        )

    @classmethod
    def from_csv(cls, path, period_T: float | None = None, background: float | None = None) -> "SpectralProfile":
        """Load a two-column ``delta_mhz,g`` CSV (header row required)."""
        with Path(path).open(newline="") as fh:
            reader = csv.reader(fh)
            header = [h.strip() for h in next(reader)]
            if header[:2] != ["delta_mhz", "g"]:
                raise DomainError(f"{path}: expected header 'delta_mhz,g', got {','.join(header)}")
            rows = [(float(r[0]), float(r[1])) for r in reader if r]
        data = np.array(rows)
        return cls.sampled(data[:, 0] * MHZ, data[:, 1], period_T=period_T, background=background)

    # -- properties -------------------------------------------------------

    @property
    def is_periodic(self) -> bool:
        return self.kind in (ProfileKind.LORENTZIAN_COMB, ProfileKind.COSINE_GRATING) or (
            self.kind is ProfileKind.SAMPLED and self.period_T is not None
        )

    @property
    def finesse(self) -> float:
        if self.kind is not ProfileKind.LORENTZIAN_COMB:
            raise UnsupportedProfileError("finesse is defined for Lorentzian combs only")
        return finesse(self.gamma_peak, self.period_T)

    @property
    def far_level(self) -> float:
        """Mean level of g far from the origin (used for analytic tails)."""
        if self.kind is ProfileKind.FLAT:
            return self.level
        if self.kind is ProfileKind.HOLE:
            return 1.0
        if self.kind is ProfileKind.LORENTZIAN_COMB:
            return 0.5 * self.gamma_peak * self.period_T
        if self.kind is ProfileKind.COSINE_GRATING:
            return 0.5
        return self.background

    def __call__(self, delta):
        return eval_profile(self, delta)


def eval_profile(profile: SpectralProfile, delta):
    """Evaluate ``g(Δ)``; scalar in, scalar out."""
    d = np.asarray(delta, dtype=np.float64)
    kind = profile.kind
    if kind is ProfileKind.FLAT:
        out = np.full_like(d, profile.level)
    elif kind is ProfileKind.HOLE:
        out = 1.0 - 1.0 / (1.0 + 4.0 * d**2 / profile.delta0**2)
    elif kind is ProfileKind.COSINE_GRATING:
        out = 0.5 * (1.0 + np.cos(d * profile.period_T))
    elif kind is ProfileKind.LORENTZIAN_COMB:
        out = _comb_values(d, profile.gamma_peak, profile.period_T)
    else:
        x = profile.delta_grid
        lo, hi = x[0], x[-1]
        if np.any(d < lo) or np.any(d > hi):
            raise RangeError(f"detuning outside sampled range [{lo:.6g}, {hi:.6g}] rad/s")
        out = np.interp(d, x, profile.g_values)
    return float(out) if out.ndim == 0 else out


def _comb_values(d, gamma_peak, period_T):
    """Sum of unit Lorentzians at 2πl/T, in closed form.

    Σ_l Γ²/((Δ - 2πl/T)² + Γ²) = (ΓT/2) sinh(ΓT) / (cosh(ΓT) - cos(ΔT))
    """
    gt = gamma_peak * period_T
    # reduce to the nearest tooth so cos() keeps full relative precision
    x = np.remainder(d * period_T + math.pi, TWO_PI) - math.pi
    # cosh(gt) - cos(x) = 2 sinh²(gt/2) + 2 sin²(x/2), no cancellation
    denom = 2.0 * np.sinh(0.5 * gt) ** 2 + 2.0 * np.sin(0.5 * x) ** 2
    return 0.5 * gt * np.sinh(gt) / denom


# ---------------------------------------------------------------------------
# Fourier series
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FourierCoeffs:
    """Coefficients ``g_n`` for ``n = -N..N`` of ``g(Δ) = Σ g_n exp(-i n Δ T)``."""

    period_T: float
    coeffs: np.ndarray
    truncation_error: float = 0.0

    @property
    def cutoff(self) -> int:
        return (len(self.coeffs) - 1) // 2

    def __getitem__(self, n: int) -> complex:
        N = self.cutoff
        if abs(n) > N:
            return 0j
        return complex(self.coeffs[n + N])

    @property
    def orders(self) -> np.ndarray:
        N = self.cutoff
        return np.arange(-N, N + 1)

    def evaluate(self, delta):
        """Resum the truncated series at ``delta``."""
        d = np.asarray(delta, dtype=np.float64)
        phase = np.exp(-1j * np.multiply.outer(d, self.orders) * self.period_T)
        return (phase @ self.coeffs).real


def fourier_coeffs(profile: SpectralProfile, N: int = DEFAULT_CUTOFF) -> FourierCoeffs:
    """Fourier coefficients of a periodic profile up to order ``N``.

    Combs and gratings use closed forms.  Sampled profiles are integrated with
    the trapezoid rule over the largest whole number of periods the grid
    covers (spectrally accurate when the grid tiles the period exactly).
    """
    if N < 1:
        raise DomainError(f"Fourier cutoff must be >= 1, got {N}")
    n = np.arange(-N, N + 1)
    kind = profile.kind
    if kind is ProfileKind.LORENTZIAN_COMB:
        gt = profile.gamma_peak * profile.period_T
        c = 0.5 * gt * np.exp(-np.abs(n) * gt)
        tail = gt * math.exp(-(N + 1) * gt) / (1.0 - math.exp(-gt))
        return FourierCoeffs(profile.period_T, _frozen_c(c), truncation_error=tail)
    if kind is ProfileKind.COSINE_GRATING:
        c = np.where(n == 0, 0.5, np.where(np.abs(n) == 1, 0.25, 0.0))
        return FourierCoeffs(profile.period_T, _frozen_c(c))
    if kind is ProfileKind.SAMPLED:
        return _sampled_coeffs(profile, n)
    raise UnsupportedProfileError(f"{kind.value} profile is not periodic; no Fourier series")


def _frozen_c(c) -> np.ndarray:
    c = np.asarray(c, dtype=np.complex128).copy()
    c.setflags(write=False)
    return c


def _sampled_coeffs(profile: SpectralProfile, n: np.ndarray) -> FourierCoeffs:
    x, g = profile.delta_grid, profile.g_values
    span = x[-1] - x[0]
    step = x[1] - x[0]
    T = profile.period_T if profile.period_T is not None else TWO_PI / span
    period = TWO_PI / T
    n_periods = math.floor(span / period * (1 + 1e-9))
    if n_periods < 1:
        raise DomainError("sampled grid must span at least one full period")
    if period / step < MIN_POINTS_PER_PERIOD:
        raise DomainError(
            f"sampled grid has {period / step:.1f} points per period, need >= {MIN_POINTS_PER_PERIOD}"
        )
    length = n_periods * period
    # nodes inside [x0, x0 + length], closing the last partial step by interpolation
    m = int(math.floor(length / step * (1 + 1e-12)))
    xs = x[: m + 1]
    gs = g[: m + 1]
    end = x[0] + length
    if end - xs[-1] > 1e-9 * step:
        xs = np.append(xs, end)
        gs = np.append(gs, np.interp(end, x, g))
    kernel = np.exp(1j * np.multiply.outer(n, xs) * T)
    c = np.trapezoid(kernel * gs, xs, axis=1) / length
    return FourierCoeffs(T, _frozen_c(c))


def finesse(gamma_peak: float, period_T: float) -> float:
    """Comb finesse ``F = π/(ΓT)``."""
    if not (gamma_peak > 0 and period_T > 0):
        raise DomainError("finesse needs positive tooth width and period")
    return math.pi / (gamma_peak * period_T)


def spectrum_grid(profile: SpectralProfile, n_points: int = 1024) -> np.ndarray:
    """Detuning grid that shows the interesting structure of ``profile``."""
    kind = profile.kind
    if kind is ProfileKind.SAMPLED:
        return np.array(profile.delta_grid)
    if kind is ProfileKind.HOLE:
        half = 5.0 * profile.delta0
    elif profile.is_periodic:
        half = 3.0 * TWO_PI / profile.period_T
    else:
        half = 1.0 * MHZ
    return np.linspace(-half, half, n_points)
