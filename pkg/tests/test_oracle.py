import math
import os
import subprocess
import sys

import numpy as np
import pytest
from scipy import integrate

from lightstore import _accel, _kernels
from lightstore.errors import DomainError, StabilityError
from lightstore.oracle import _phi, run_lattice, time_domain_oracle
from lightstore.response import MediumParams, PulseEnvelope, propagate_through
from lightstore.spectra import MHZ, TWO_PI, SpectralProfile

US = 1e-6


def l2(a, b):
    return float(np.linalg.norm(a.values - b.values) / np.linalg.norm(b.values))


def pulse(rms=1 * US, n=1024, dt=0.125 * US, center=None):
    return PulseEnvelope.gaussian(rms, 16 * rms if center is None else center, n, dt)


def test_phi_series_matches_direct():
    x = np.array([1e-3, 0.05, 0.09, 0.11, 0.5, 2.0]) * (1 + 0.3j)
    phi1, psi = _phi(x)
    np.testing.assert_allclose(phi1, (1 - np.exp(-x)) / x, rtol=1e-10)
    np.testing.assert_allclose(psi, (1 - np.exp(-x) * (1 + x)) / x**2, rtol=1e-7)
    p0, s0 = _phi(np.array([0.0]))
    assert p0[0] == pytest.approx(1.0) and s0[0] == pytest.approx(0.5)


class TestCauchy:
    def test_against_quadrature(self, backend):
        x = np.linspace(-3.0, 4.0, 29)
        g = np.abs(np.sin(x)) + 0.1
        z = np.array([0.3 - 0.05j, -1.0 - 2.0j, 10.0 - 0.01j])
        got = _kernels.cauchy_piecewise_linear(x, g, z)
        for zk, gk in zip(z, got):
            pts = list(x[1:-1])
            re = integrate.quad(lambda d: (np.interp(d, x, g) / (d + zk)).real, x[0], x[-1], points=pts, limit=400)[0]
            im = integrate.quad(lambda d: (np.interp(d, x, g) / (d + zk)).imag, x[0], x[-1], points=pts, limit=400)[0]
            assert gk == pytest.approx(complex(re, im), rel=1e-8, abs=1e-10)

    def test_backends_agree(self, monkeypatch):
        rng = np.random.default_rng(1)
        x = np.sort(rng.uniform(-5, 5, 300))
        g = rng.uniform(0, 1, 300)
        z = rng.uniform(-6, 6, 700) - 1j * rng.uniform(1e-3, 1, 700)
        monkeypatch.setattr(_accel, "NUMBA_ENABLED", False)
        a = _kernels.cauchy_piecewise_linear(x, g, z)
        if _accel.HAVE_NUMBA:
            monkeypatch.setattr(_accel, "NUMBA_ENABLED", True)
            b = _kernels.cauchy_piecewise_linear(x, g, z)
            # random nodes come arbitrarily close; only summation order differs
            np.testing.assert_allclose(a, b, rtol=0, atol=1e-12 * np.max(np.abs(a)) * x.size)


def test_lattice_backends_agree(monkeypatch):
    if not _accel.HAVE_NUMBA:
        pytest.skip("numba not installed")
    p = pulse(n=128, center=6 * US, dt=0.1 * US)
    prof = SpectralProfile.hole(2 * MHZ)
    m = MediumParams.from_optical_depth(1.5, gamma=TWO_PI * 50e3)
    kw = dict(n_delta=512, n_z=6, span=8 * MHZ, snapshot_time=8 * US)
    monkeypatch.setattr(_accel, "NUMBA_ENABLED", True)
    a = run_lattice(p, prof, m, **kw)
    monkeypatch.setattr(_accel, "NUMBA_ENABLED", False)
    b = run_lattice(p, prof, m, **kw)
    np.testing.assert_allclose(a.field, b.field, rtol=0, atol=1e-12)
    np.testing.assert_allclose(a.stored, b.stored, rtol=1e-10, atol=1e-300)
    assert np.all(a.stored > 0)


def test_env_flag_selects_numpy():
    env = dict(os.environ, LIGHTSTORE_DISABLE_NUMBA="1")
    code = "import lightstore; print(lightstore.backend())"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


class TestOracle:
    def test_bleached_identity(self):
        p = pulse(n=256)
        out = time_domain_oracle(p, SpectralProfile.bleached(), MediumParams.from_optical_depth(3.0), n_delta=64, n_z=4)
        np.testing.assert_allclose(out.values, p.values, atol=1e-14)

    @pytest.mark.parametrize("aL", [0.5, 1.0, 2.0])
    def test_flat_beer_lambert(self, aL):
        p = pulse(n=256)
        m = MediumParams.from_optical_depth(aL, gamma=TWO_PI * 100e3)
        out = time_domain_oracle(p, SpectralProfile.flat(), m, n_delta=1024, n_z=32)
        assert out.energy() / p.energy() == pytest.approx(math.exp(-aL), rel=0.02)

    def test_hole_matches_propagate(self):
        p = pulse()
        prof = SpectralProfile.hole(2 * MHZ)
        m = MediumParams.from_optical_depth(2.0)
        ref = propagate_through(p, prof, m)
        out = time_domain_oracle(p, prof, m, n_delta=4096, n_z=64, span=10 * prof.delta0)
        assert l2(out, ref) < 0.02
        assert abs(out.centroid() - ref.centroid()) < p.dt

    def test_cosine_matches_propagate(self):
        T = 10 * US
        p = pulse()
        prof = SpectralProfile.cosine_grating(T)
        m = MediumParams.from_optical_depth(2.0)
        ref = propagate_through(p, prof, m)
        out = time_domain_oracle(p, prof, m, n_delta=2048, n_z=64)
        assert l2(out, ref) < 0.02

    def test_window_too_narrow(self):
        p = pulse()
        with pytest.raises(StabilityError):
            time_domain_oracle(p, SpectralProfile.flat(), MediumParams.from_optical_depth(1.0), span=1.0 / US)

    def test_revivals_detected(self):
        p = pulse(n=2048)
        m = MediumParams.from_optical_depth(1.0, gamma=TWO_PI * 1e3)
        with pytest.raises(StabilityError):
            time_domain_oracle(p, SpectralProfile.hole(2 * MHZ), m, n_delta=256)

    @pytest.mark.parametrize("kw", [dict(n_delta=8192), dict(n_z=512), dict(n_delta=1), dict(n_z=0)])
    def test_size_limits(self, kw):
        with pytest.raises(DomainError):
            time_domain_oracle(pulse(), SpectralProfile.flat(), MediumParams.from_optical_depth(1.0), **kw)
