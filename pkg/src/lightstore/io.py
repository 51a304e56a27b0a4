"""Plot-ready CSV output.  Floats carry 9 significant digits, no locale formatting."""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np

from .response import PulseEnvelope, TransferFunction
from .spectra import MHZ, SpectralProfile

TRACE_HEADER = ("t_us", "re", "im", "intensity")
TRANSFER_HEADER = ("omega_mhz", "re_H", "im_H", "abs2_H")
SPECTRUM_HEADER = ("delta_mhz", "g", "optical_depth")
DELAY_SWEEP_HEADER = ("delta0_mhz", "alphaL", "delay_expected_us", "delay_measured_us", "transmission", "distortion")
EFFICIENCY_SWEEP_HEADER = ("alphaL", "F", "eta_recursion", "eta_closed", "eta_detected")
PROTOCOL_HEADER = ("scheme", "retrieval_time_us", "direction", "amplitude_factor", "efficiency")


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if x == 0.0:
        return "0"  # also folds -0
    return f"{x:.9g}"


def write_rows(path: Path | str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def write_trace(path, pulse: PulseEnvelope) -> Path:
    v = pulse.values
    return write_rows(path, TRACE_HEADER, zip(pulse.t * 1e6, v.real, v.imag, pulse.intensity))


def write_transfer(path, tf: TransferFunction) -> Path:
    H = tf.values
    return write_rows(path, TRANSFER_HEADER, zip(tf.omega / MHZ, H.real, H.imag, tf.abs2))


def write_spectrum(path, profile: SpectralProfile, alphaL: float, delta, g=None) -> Path:
    """``delta`` in rad/s; ``optical_depth`` is ``g · αL``."""
    delta = np.asarray(delta, dtype=np.float64)
    g = np.asarray(profile(delta) if g is None else g, dtype=np.float64)
    return write_rows(path, SPECTRUM_HEADER, zip(delta / MHZ, g, g * alphaL))


def read_trace(path) -> PulseEnvelope:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return PulseEnvelope(data[:, 0] * 1e-6, data[:, 1] + 1j * data[:, 2])
