import math
import warnings

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lightstore.errors import DomainError, TooLateError
from lightstore.protocol import (
    Direction,
    ProtocolTimeline,
    RetrievalPrediction,
    Scheme,
    compose_efficiency,
    predict_retrieval,
)

US = 1e-6
T = 1.5 * US


def afc(**kw):
    base = dict(scheme=Scheme.AFC, signal_in_time=2 * US, comb_period_T=T)
    base.update(kw)
    return ProtocolTimeline(**base)


class TestAFC:
    def test_no_raman(self):
        r = predict_retrieval(afc())
        assert r.retrieval_time == 2 * US + T
        assert r.direction is Direction.FORWARD
        assert r.amplitude_factor == 1.0

    def test_frozen_phase_clock(self):
        t_spin = 20 * US
        r1 = 2 * US + T / 2
        tl = afc(raman1_time=r1, raman2_time=r1 + t_spin, retrieval_direction="Backward", spin_lifetime=100 * US)
        r = predict_retrieval(tl)
        assert r.retrieval_time == pytest.approx(r1 + t_spin + T / 2, rel=1e-15)
        assert r.direction is Direction.BACKWARD
        assert r.amplitude_factor == pytest.approx(math.exp(-0.2))

    def test_zero_storage_matches_plain_echo(self):
        t_in = 2 * US
        for frac in (0.0, 0.3, 1.0):
            r1 = t_in + frac * T
            r = predict_retrieval(afc(signal_in_time=t_in, raman1_time=r1, raman2_time=r1))
            assert r.retrieval_time == pytest.approx(t_in + T, abs=1e-21)
            assert r.amplitude_factor == 1.0

    def test_too_late(self):
        with pytest.raises(TooLateError):
            predict_retrieval(afc(raman1_time=2 * US + 1.1 * T, raman2_time=10 * US))

    def test_raman_before_signal(self):
        with pytest.raises(DomainError):
            predict_retrieval(afc(raman1_time=1 * US, raman2_time=3 * US))

    def test_transfer_efficiency_scales_amplitude(self):
        r = predict_retrieval(afc(raman1_time=2.5 * US, raman2_time=2.5 * US, transfer_efficiency=0.9))
        assert r.amplitude_factor == pytest.approx(0.9)


class TestDirection:
    @pytest.mark.parametrize("which", ["raman1_time", "raman2_time"])
    def test_backward_needs_both_pulses(self, which):
        with pytest.warns(UserWarning):
            r = predict_retrieval(afc(retrieval_direction="Backward", **{which: 2.5 * US}))
        assert r.direction is Direction.FORWARD
        assert r.retrieval_time == 2 * US + T

    def test_backward_with_pair(self):
        r = predict_retrieval(afc(raman1_time=2.5 * US, raman2_time=5 * US, retrieval_direction=Direction.BACKWARD))
        assert r.direction is Direction.BACKWARD

    def test_forward_pair_stays_forward(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            r = predict_retrieval(afc(raman1_time=2.5 * US, raman2_time=5 * US))
        assert r.direction is Direction.FORWARD


class TestSHBSL:
    def test_without_raman_exits_after_delay(self):
        tl = ProtocolTimeline(Scheme.SHBSL, 10 * US, group_delay=3 * US)
        r = predict_retrieval(tl)
        assert r.retrieval_time == 13 * US and r.direction is Direction.FORWARD

    def test_retrieval_at_second_raman(self):
        tl = ProtocolTimeline(Scheme.SHBSL, 10 * US, raman1_time=12 * US, raman2_time=40 * US, spin_lifetime=28 * US)
        r = predict_retrieval(tl)
        assert r.retrieval_time == 40 * US
        assert r.direction is Direction.FORWARD
        assert r.amplitude_factor == pytest.approx(math.exp(-1))


class TestValidation:
    @pytest.mark.parametrize(
        "kw",
        [
            dict(comb_period_T=None),
            dict(comb_period_T=0.0),
            dict(raman1_time=5 * US, raman2_time=4 * US),
            dict(spin_lifetime=0.0),
            dict(transfer_efficiency=0.0),
            dict(transfer_efficiency=1.2),
            dict(group_delay=-1.0),
        ],
    )
    def test_rejects(self, kw):
        with pytest.raises(DomainError):
            afc(**kw)

    def test_string_enums(self):
        tl = ProtocolTimeline("SHBSL", 0.0, retrieval_direction="Forward")
        assert tl.scheme is Scheme.SHBSL and tl.retrieval_direction is Direction.FORWARD
        with pytest.raises(ValueError):
            ProtocolTimeline("EIT", 0.0)


class TestCompose:
    def test_examples(self):
        assert compose_efficiency(0.54, RetrievalPrediction(0.0, Direction.FORWARD, 1.0)) == 0.54
        r = predict_retrieval(afc(raman1_time=2.5 * US, raman2_time=12.5 * US, spin_lifetime=10 * US))
        assert compose_efficiency(0.54, r) == pytest.approx(0.0731, abs=1e-4)
        assert compose_efficiency(0.0, r) == 0.0

    @pytest.mark.parametrize("bad", [-0.1, 1.1])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            compose_efficiency(bad, RetrievalPrediction(0.0, Direction.FORWARD, 1.0))


@given(
    shift=st.floats(-1e-3, 1e-3),
    frac=st.floats(0.0, 1.0),
    t_spin=st.floats(0.0, 1e-4),
    backward=st.booleans(),
)
def test_shift_invariance(shift, frac, t_spin, backward):
    t_in = 5 * US
    r1 = t_in + frac * T
    tl = afc(signal_in_time=t_in, raman1_time=r1, raman2_time=r1 + t_spin,
             retrieval_direction="Backward" if backward else "Forward", spin_lifetime=50 * US)
    a = predict_retrieval(tl)
    b = predict_retrieval(tl.shifted(shift))
    assert b.retrieval_time - shift == pytest.approx(a.retrieval_time, rel=1e-12, abs=1e-18)
    assert b.direction is a.direction
    assert b.amplitude_factor == pytest.approx(a.amplitude_factor, rel=1e-9)
    assert 0.0 < a.amplitude_factor <= 1.0
