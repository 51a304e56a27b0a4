"""Hot numerical loops, each with a numba and a pure-numpy implementation.

Both paths compute the same arithmetic; they differ only in loop order and
summation order, so results agree to round-off.
"""

from __future__ import annotations

import numpy as np

from . import _accel

# ---------------------------------------------------------------------------
# Cauchy integral of a piecewise-linear profile
#
#   I(z) = ∫_{x_0}^{x_N} g(x) / (x + z) dx,   Im z < 0
#
# exact for the linear interpolant of (x_j, g_j).  On [a, b] with slope s:
#   ∫ g/(x+z) = (g_a - s (a + z)) (Log(b+z) - Log(a+z)) + (g_b - g_a)
# The path a+z -> b+z stays in the lower half plane, so principal logs are
# continuous along it.
# ---------------------------------------------------------------------------


def _cauchy_pl_loop(x, g, z):
    n = x.shape[0]
    out = np.empty(z.shape[0], dtype=np.complex128)
    for k in range(z.shape[0]):
        zk = z[k]
        acc = 0j
        log_a = np.log(x[0] + zk)
        for j in range(n - 1):
            log_b = np.log(x[j + 1] + zk)
            s = (g[j + 1] - g[j]) / (x[j + 1] - x[j])
            acc += (g[j] - s * (x[j] + zk)) * (log_b - log_a)
            log_a = log_b
        out[k] = acc + (g[n - 1] - g[0])
    return out


_cauchy_pl_numba = _accel.njit(_cauchy_pl_loop)


def _cauchy_pl_numpy(x, g, z, chunk=256):
    slope = np.diff(g) / np.diff(x)
    out = np.empty(z.shape[0], dtype=np.complex128)
    for start in range(0, z.shape[0], chunk):
        zc = z[start:start + chunk, None]
        logs = np.log(x[None, :] + zc)
        dlog = np.diff(logs, axis=1)
        coef = g[None, :-1] - slope[None, :] * (x[None, :-1] + zc)
        out[start:start + chunk] = np.sum(coef * dlog, axis=1)
    return out + (g[-1] - g[0])


def cauchy_piecewise_linear(x, g, z):
    """Exact ``∫ g(x)/(x+z) dx`` over the span of ``x`` for linearly interpolated ``g``."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    g = np.ascontiguousarray(g, dtype=np.float64)
    z = np.ascontiguousarray(np.atleast_1d(z), dtype=np.complex128)
    if _accel.NUMBA_ENABLED:
        return _cauchy_pl_numba(x, g, z)
    return _cauchy_pl_numpy(x, g, z)


# ---------------------------------------------------------------------------
# Maxwell-Bloch lattice march
#
# Retarded frame, weak-signal limit.  For every z-row the dipoles are advanced
# in time with an exponential integrator that is exact for a field that is
# linear within each step:
#     P(n+1) = E P(n) - i [ (A - B) Ω(n) + B Ω(n+1) ]
# The row-to-row z step is the implicit trapezoid rule, solved per time sample
# (the only unknown coupling is through B Ω(n+1)).
#
# source(n) = coef * Σ_j w_j P_j(n) + tail * (Ω(n) - Ω(n-1)) + tail0 * Ω(n),
# with coef = -iα/2π; ``tail`` and ``tail0`` carry the adiabatic response of
# dipoles outside the simulated detuning window.
# ---------------------------------------------------------------------------


def _lattice_loop(drive, E, A, B, w, coef, tail, tail0, dz, n_z, snap_k, snap_f):
    n_t = drive.shape[0]
    n_d = E.shape[0]
    field = np.zeros((n_z + 1, n_t), dtype=np.complex128)
    stored = np.zeros(n_z + 1, dtype=np.float64)
    s_prev = np.zeros(n_t, dtype=np.complex128)
    s_cur = np.zeros(n_t, dtype=np.complex128)
    p = np.zeros(n_d, dtype=np.complex128)
    amb = A - B
    cb = 0j
    for j in range(n_d):
        cb += w[j] * (-1j * B[j])
    cb *= coef
    denom = 1.0 - 0.5 * dz * (cb + tail + tail0)
    for i in range(n_z + 1):
        for j in range(n_d):
            p[j] = 0j
        prev = 0j
        for n in range(n_t):
            sq = 0j
            for j in range(n_d):
                q = E[j] * p[j] - 1j * amb[j] * prev
                p[j] = q
                sq += w[j] * q
            sq *= coef
            if i == 0:
                cur = drive[n]
            else:
                rhs = field[i - 1, n] + 0.5 * dz * (s_prev[n] + sq - tail * prev)
                cur = rhs / denom
            field[i, n] = cur
            s_cur[n] = sq + (cb + tail0) * cur + tail * (cur - prev)
            acc = 0.0
            for j in range(n_d):
                pj = p[j] - 1j * B[j] * cur
                p[j] = pj
                acc += w[j] * (pj.real * pj.real + pj.imag * pj.imag)
            if n == snap_k[i]:
                stored[i] += (1.0 - snap_f[i]) * acc
            elif n == snap_k[i] + 1:
                stored[i] += snap_f[i] * acc
            prev = cur
        tmp = s_prev
        s_prev = s_cur
        s_cur = tmp
    return field, stored


_lattice_numba = _accel.njit(_lattice_loop)


def _lattice_numpy(drive, E, A, B, w, coef, tail, tail0, dz, n_z, snap_k, snap_f):
    n_t = drive.shape[0]
    field = np.zeros((n_z + 1, n_t), dtype=np.complex128)
    stored = np.zeros(n_z + 1)
    s_prev = np.zeros(n_t, dtype=np.complex128)
    s_cur = np.zeros(n_t, dtype=np.complex128)
    amb = A - B
    cb = coef * np.dot(w, -1j * B)
    denom = 1.0 - 0.5 * dz * (cb + tail + tail0)
    for i in range(n_z + 1):
        p = np.zeros(E.shape[0], dtype=np.complex128)
        prev = 0j
        for n in range(n_t):
            q = E * p - 1j * amb * prev
            sq = coef * np.dot(w, q)
            if i == 0:
                cur = drive[n]
            else:
                cur = (field[i - 1, n] + 0.5 * dz * (s_prev[n] + sq - tail * prev)) / denom
            field[i, n] = cur
            s_cur[n] = sq + (cb + tail0) * cur + tail * (cur - prev)
            p = q - 1j * B * cur
            if n == snap_k[i] or n == snap_k[i] + 1:
                acc = np.dot(w, p.real**2 + p.imag**2)
                stored[i] += (1.0 - snap_f[i]) * acc if n == snap_k[i] else snap_f[i] * acc
            prev = cur
        s_prev, s_cur = s_cur, s_prev
    return field, stored


def bloch_lattice(drive, E, A, B, w, coef, tail, tail0, dz, n_z, snap_k, snap_f):
    """March the (z, t, Δ) lattice; returns ``(field[z, t], stored[z])``.

    ``stored[i]`` is ``Σ_j w_j |P_j|²`` on row ``i``, linearly interpolated
    between time samples ``snap_k[i]`` and ``snap_k[i] + 1`` with weight
    ``snap_f[i]``.  Pass ``snap_k = -2`` to skip a row.
    """
    args = (
        np.ascontiguousarray(drive, dtype=np.complex128),
        np.ascontiguousarray(E, dtype=np.complex128),
        np.ascontiguousarray(A, dtype=np.complex128),
        np.ascontiguousarray(B, dtype=np.complex128),
        np.ascontiguousarray(w, dtype=np.float64),
        complex(coef),
        float(tail),
        float(tail0),
        float(dz),
        int(n_z),
        np.ascontiguousarray(snap_k, dtype=np.int64),
        np.ascontiguousarray(snap_f, dtype=np.float64),
    )
    if _accel.NUMBA_ENABLED:
        return _lattice_numba(*args)
    return _lattice_numpy(*args)
