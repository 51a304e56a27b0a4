"""Time the numba and numpy paths of the hot kernels on the same inputs.

    python benchmarks/bench_kernels.py [--repeat N] [--small]

Prints one line per kernel with the best-of-N wall time of each backend, the
speed-up and the max abs difference between the two results.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from lightstore import _accel, _kernels
from lightstore.oracle import _phi
from lightstore.spectra import MHZ


def best_of(fn, repeat):
    best = math.inf
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def run_both(fn, repeat):
    saved = _accel.NUMBA_ENABLED
    try:
        _accel.NUMBA_ENABLED = True
        fn()  # JIT warm-up (or cache load)
        t_nb, r_nb = best_of(fn, repeat)
        _accel.NUMBA_ENABLED = False
        t_np, r_np = best_of(fn, repeat)
    finally:
        _accel.NUMBA_ENABLED = saved
    return t_nb, t_np, r_nb, r_np


def cauchy_case(n_grid, n_omega):
    x = np.linspace(-50.0, 50.0, n_grid) * MHZ
    g = 0.5 * (1.0 + np.cos(x / MHZ))
    z = np.linspace(-5.0, 5.0, n_omega) * MHZ - 1j * 2e4
    return lambda: _kernels.cauchy_piecewise_linear(x, g, z)


def lattice_case(n_t, n_delta, n_z):
    dt = 0.125e-6
    t = dt * np.arange(n_t)
    drive = np.exp(-((t - 8e-6) ** 2) / (4 * 1e-6**2)).astype(np.complex128)
    W = 40.0 * MHZ
    dd = 2 * W / n_delta
    delta = -W + (np.arange(n_delta) + 0.5) * dd
    lam = 1j * delta + 2e4
    phi1, psi = _phi(lam * dt)
    E, A, B = np.exp(-lam * dt), dt * phi1, dt * (phi1 - psi)
    w = 0.5 * (1 + np.cos(delta * 10e-6)) * dd
    snap_k = np.full(n_z + 1, n_t // 2, dtype=np.int64)
    snap_f = np.full(n_z + 1, 0.25)
    return lambda: _kernels.bloch_lattice(drive, E, A, B, w, -1j * 200 / (2 * math.pi), 0.0, 0.0,
                                          0.01 / n_z, n_z, snap_k, snap_f)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--small", action="store_true", help="tiny sizes, for a smoke run")
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    if args.small:
        cases = [("cauchy_piecewise_linear 512x64", cauchy_case(512, 64)),
                 ("bloch_lattice t=128 d=64 z=4", lattice_case(128, 64, 4))]
    else:
        cases = [("cauchy_piecewise_linear 8192x2048", cauchy_case(8192, 2048)),
                 ("bloch_lattice t=1024 d=1024 z=32", lattice_case(1024, 1024, 32))]
    print(f"{'kernel':40s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speed-up':>9s} {'max|diff|':>10s}")
    for name, fn in cases:
        t_nb, t_np, r_nb, r_np = run_both(fn, args.repeat)
        if isinstance(r_nb, tuple):
            diff = max(float(np.max(np.abs(a - b))) for a, b in zip(r_nb, r_np))
        else:
            diff = float(np.max(np.abs(r_nb - r_np)))
        print(f"{name:40s} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:9.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
