import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import optimize

from lightstore.echoes import (
    FORWARD_LIMIT,
    CombDesign,
    closed_form_eta,
    detect_echoes,
    efficiency_routes,
    eta_3pe,
    eta_afc_forward,
    eta_from_coeffs,
    eta_optimal,
    optimal_finesse,
    order_recursion,
)
from lightstore.errors import CutoffError, DomainError, ResolutionError, UnsupportedProfileError
from lightstore.response import MediumParams, PulseEnvelope, propagate_through
from lightstore.spectra import MHZ, TWO_PI, FourierCoeffs, SpectralProfile, fourier_coeffs

US = 1e-6
T = 10 * US
E2 = math.exp(-2.0)
# γT ~ 1e-6: the closed forms neglect homogeneous dephasing between echoes
TINY_GAMMA = 0.1


def coeffs(values, period=T):
    """FourierCoeffs from a dict {n: g_n}."""
    N = max(abs(n) for n in values)
    c = np.zeros(2 * N + 1, dtype=np.complex128)
    for n, v in values.items():
        c[n + N] = v
    return FourierCoeffs(period, c)


def pulse(rms=1 * US, n=2048, dt=0.125 * US):
    return PulseEnvelope.gaussian(rms, 12 * rms, n, dt)


class TestRecursion:
    @pytest.mark.parametrize("g0,aL", [(1.0, 1.0), (0.5, 3.0), (0.2, 7.5)])
    def test_no_grating(self, g0, aL):
        amp = order_recursion(coeffs({0: g0, 3: 0.0}), aL, P=3)
        assert amp.at_exit()[0] == pytest.approx(math.exp(-g0 * aL / 2), rel=1e-10)
        assert np.all(amp.at_exit()[1:] == 0)

    @pytest.mark.parametrize("g0,g1,aL", [(0.5, 0.25, 4.0), (0.3, 0.1, 2.0), (0.2, 0.18, 9.0)])
    def test_first_order_closed_form(self, g0, g1, aL):
        c = coeffs({-1: g1, 0: g0, 1: g1})
        assert order_recursion(c, aL).efficiency(1) == pytest.approx(eta_from_coeffs(c, aL), rel=1e-9)

    def test_cosine_at_four(self):
        c = fourier_coeffs(SpectralProfile.cosine_grating(T), 1)
        assert order_recursion(c, 4.0).efficiency(1) == pytest.approx(E2, rel=1e-9)

    @pytest.mark.parametrize("y0", [0.0, 1.0])
    def test_half_step_is_required(self, y0):
        c = coeffs({-1: 0.25, 0: 0.5, 1: 0.25})
        assert order_recursion(c, 4.0, y0=y0).efficiency(1) != pytest.approx(E2, rel=0.05)

    def test_grid_shape(self):
        amp = order_recursion(coeffs({-2: 0.1, 0: 0.5}), 1.0, P=2, n_z=16)
        assert amp.P == 2 and amp.orders.shape == (3, 17)
        assert amp.z_grid[0] == 0.0 and amp.z_grid[-1] == 1.0

    def test_errors(self):
        c = coeffs({-1: 0.25, 0: 0.5, 1: 0.25})
        with pytest.raises(DomainError):
            order_recursion(c, 1.0, P=0)
        with pytest.raises(DomainError):
            order_recursion(c, -1.0)
        with pytest.raises(CutoffError):
            order_recursion(c, 1.0, P=2)

    @given(k=st.integers(1, 4), aL=st.floats(0.1, 10.0), seed=st.integers(0, 2**16))
    def test_causality(self, k, aL, seed):
        rng = np.random.default_rng(seed)
        N = 5
        raw = rng.uniform(0, 0.3, 2 * N + 1) + 1j * rng.uniform(-0.1, 0.1, 2 * N + 1)
        full = FourierCoeffs(T, raw)
        cut = raw.copy()
        cut[: N - k] = 0.0  # n < -k
        a = order_recursion(full, aL, P=N, n_z=64).at_exit()[k]
        b = order_recursion(FourierCoeffs(T, cut), aL, P=N, n_z=64).at_exit()[k]
        assert a == b


class TestClosedForms:
    def test_3pe_values(self):
        assert eta_3pe(0.0) == 0.0
        assert eta_3pe(4.0) == pytest.approx(0.13534, abs=1e-5)
        res = optimize.minimize_scalar(lambda x: -eta_3pe(x), bounds=(0, 20), method="bounded",
                                       options={"xatol": 1e-8})
        assert res.x == pytest.approx(4.0, abs=1e-3)

    def test_afc_values(self):
        assert eta_afc_forward(0.0, 5.0) == 0.0
        assert eta_afc_forward(4.0, 2 * math.pi) == pytest.approx(E2, rel=1e-12)
        assert eta_afc_forward(4.0, 1e6) < 1e-10
        with pytest.raises(DomainError):
            eta_afc_forward(1.0, 0.5)

    def test_from_coeffs(self):
        assert eta_from_coeffs(coeffs({-1: 0.25, 0: 0.5, 1: 0.25}), 4.0) == pytest.approx(E2)
        assert eta_from_coeffs(coeffs({-1: 0.0, 0: 0.5, 1: 0.0}), 4.0) == 0.0

    def test_optimal_design(self):
        d = optimal_finesse(4.0, period_T=T)
        assert d.finesse == pytest.approx(2 * math.pi)
        assert d.predicted_eta == pytest.approx(E2)
        assert d.gamma_T == pytest.approx(0.5)
        assert d.gamma_peak == pytest.approx(0.5 / T)
        assert CombDesign(1.0, 3.0, 0.1).gamma_peak is None
        with pytest.raises(DomainError):
            optimal_finesse(0.0)

    def test_numeric_argmax_at_ten(self):
        res = optimize.minimize_scalar(lambda F: -eta_afc_forward(10.0, F), bounds=(1, 100), method="bounded",
                                       options={"xatol": 1e-9})
        assert res.x == pytest.approx(10.996, rel=1e-3)
        assert optimal_finesse(10.0).finesse == pytest.approx(res.x, rel=1e-3)

    def test_forward_limit(self):
        assert FORWARD_LIMIT == pytest.approx(0.5413, abs=1e-4)
        assert eta_optimal(1e6) == pytest.approx(FORWARD_LIMIT, rel=1e-4)

    @given(aL=st.floats(0.1, 50.0))
    def test_optimal_is_envelope(self, aL):
        res = optimize.minimize_scalar(lambda F: -eta_afc_forward(aL, F), bounds=(1, 200), method="bounded",
                                       options={"xatol": 1e-10})
        assert abs(-res.fun - eta_optimal(aL)) <= 1e-6

    @given(a=st.floats(0.0, 200.0), b=st.floats(0.0, 200.0))
    def test_optimal_monotone_and_bounded(self, a, b):
        lo, hi = min(a, b), max(a, b)
        assert eta_optimal(lo) <= eta_optimal(hi) <= FORWARD_LIMIT

    @given(aL=st.floats(0.0, 100.0))
    def test_afc_versus_3pe(self, aL):
        # the two curves cross at αL = 4, where both equal e⁻²
        diff = eta_optimal(aL) - eta_3pe(aL)
        if aL > 4.0 + 1e-9:
            assert diff > 0
        elif aL < 4.0 - 1e-9:
            assert diff <= 0
        assert eta_optimal(4.0) == pytest.approx(eta_3pe(4.0), rel=1e-12)

    def test_closed_form_dispatch(self):
        assert closed_form_eta(SpectralProfile.cosine_grating(T), 2.0) == eta_3pe(2.0)
        assert closed_form_eta(SpectralProfile.afc(5.0, T), 2.0) == pytest.approx(eta_afc_forward(2.0, 5.0))
        with pytest.raises(UnsupportedProfileError):
            closed_form_eta(SpectralProfile.hole(MHZ), 2.0)


class TestDetection:
    def test_reference_only(self):
        p = pulse()
        r = detect_echoes(p, p, T)
        # a Gaussian leaks exp(-(T/2σ)²/2) ≈ 8e-7 of its energy past ±T/2
        assert r.transmitted == pytest.approx(1.0, abs=1e-5)
        assert np.all(r.echo_energies[1:] < 1e-5)
        assert r.echo_times[1] - r.echo_times[0] == pytest.approx(T)

    def test_cosine_at_four(self):
        p = pulse()
        out = propagate_through(p, SpectralProfile.cosine_grating(T),
                               MediumParams.from_optical_depth(4.0, gamma=TINY_GAMMA))
        assert detect_echoes(out, p, T).efficiency_first == pytest.approx(0.1353, abs=0.007)

    def test_optimal_comb_at_ten(self):
        p = pulse(n=4096)
        design = optimal_finesse(10.0, period_T=T)
        prof = SpectralProfile.lorentzian_comb(design.gamma_peak, T)
        out = propagate_through(p, prof, MediumParams.from_optical_depth(10.0, gamma=TINY_GAMMA))
        eta = detect_echoes(out, p, T, max_order=1).efficiency_first
        assert eta == pytest.approx(FORWARD_LIMIT * (10 / 14) ** 2, rel=0.1)

    def test_max_order(self):
        p = pulse()
        assert detect_echoes(p, p, T, max_order=3).echo_energies.size == 4

    def test_period_too_short(self):
        p = pulse()
        with pytest.raises(ResolutionError):
            detect_echoes(p, p, 3 * US)

    def test_window_too_short(self):
        p = pulse(n=128)
        with pytest.raises(ResolutionError):
            detect_echoes(p, p, T)

    def test_grid_mismatch(self):
        with pytest.raises(DomainError):
            detect_echoes(pulse(), pulse(n=1024), T)


class TestRoutes:
    @pytest.mark.parametrize("aL", [0.5, 4.0, 10.0])
    def test_cosine(self, aL):
        r = efficiency_routes(SpectralProfile.cosine_grating(T), MediumParams.from_optical_depth(aL, gamma=TINY_GAMMA),
                              pulse())
        assert r.max_pairwise_rel() < 0.05

    @pytest.mark.parametrize("F,aL", [(3.0, 1.0), (3.0, 10.0), (10.0, 4.0)])
    def test_comb(self, F, aL):
        r = efficiency_routes(SpectralProfile.afc(F, T), MediumParams.from_optical_depth(aL, gamma=TINY_GAMMA),
                              pulse())
        assert r.max_pairwise_rel() < 0.05

    def test_sampled_comb(self):
        comb = SpectralProfile.afc(4.0, T)
        period = TWO_PI / T
        x = np.linspace(-40 * period, 40 * period, 80 * 256 + 1)
        s = SpectralProfile.sampled(x, comb(x), period_T=T, background=comb.far_level)
        r = efficiency_routes(s, MediumParams.from_optical_depth(3.0, gamma=TINY_GAMMA), pulse())
        assert r.max_pairwise_rel() < 0.05

    def test_non_periodic(self):
        with pytest.raises(UnsupportedProfileError):
            efficiency_routes(SpectralProfile.hole(MHZ), MediumParams.from_optical_depth(1.0), pulse())

    def test_pairwise_metric(self):
        from lightstore.echoes import EfficiencyRoutes

        assert EfficiencyRoutes(0.1, 0.11, 0.1, 0.5).max_pairwise_rel() == pytest.approx(0.01 / 0.11)
        assert EfficiencyRoutes(0.0, 0.0, 0.0, 1.0).max_pairwise_rel() == 0.0
