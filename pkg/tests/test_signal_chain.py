import math

import numpy as np
import pytest

from pulsebench.device import CHANNEL_BY_LABEL, ChannelSettings
from pulsebench.measure import CaptureConfig, measure_delay, measure_rise_time
from pulsebench.signal_chain import (
    ChainConfigError,
    ChainModel,
    DEFAULT_TAU_S,
    PulseTiming,
    apply_delay,
    apply_edge_filter,
    apply_output_stage,
    ideal_pulse,
    synthesize,
)
from pulsebench.waveform import Waveform

AC1 = CHANNEL_BY_LABEL["AC1"]


def settings(amp=60, delay=0, enabled=True, channel=AC1):
    return ChannelSettings(channel, amplitude=amp, delay=delay, enabled=enabled)


class TestIdealPulse:
    def test_disabled_channel_is_flat(self):
        w = ideal_pulse(settings(amp=60, enabled=False), PulseTiming(2e-9, 2e-9),
                        40e9, 10e-9)
        assert np.all(w.samples == 0.0)

    def test_zero_amplitude_is_flat(self):
        w = ideal_pulse(settings(amp=0), PulseTiming(2e-9, 2e-9), 40e9, 10e-9)
        assert np.all(w.samples == 0.0)

    def test_sample_count_and_level(self):
        # Oracle: count the sample times landing inside [start, start+width).
        rate, duration, start, width = 40e9, 10e-9, 2e-9, 2e-9
        n = int(round(duration * rate))
        expected_hot = sum(
            1 for k in range(n) if start <= k / rate < start + width
        )
        assert expected_hot == 80

        w = ideal_pulse(settings(amp=60), PulseTiming(start, width), rate, duration)
        assert len(w) == 400
        hot = w.samples == 3.0
        assert int(np.count_nonzero(hot)) == expected_hot
        assert np.all(w.samples[~hot] == 0.0)

    def test_window_too_short_for_delayed_pulse(self):
        with pytest.raises(ChainConfigError, match="cannot contain"):
            ideal_pulse(settings(delay=150), PulseTiming(2e-9, 2e-9), 40e9, 10e-9)

    def test_negative_delay_before_window(self):
        with pytest.raises(ChainConfigError, match="cannot contain"):
            ideal_pulse(settings(delay=-150), PulseTiming(2e-9, 2e-9), 40e9, 10e-9)

    def test_invalid_settings_rejected(self):
        bad = ChannelSettings(AC1, amplitude=121, delay=0, enabled=True)
        with pytest.raises(ChainConfigError, match="amplitude"):
            ideal_pulse(bad, PulseTiming(2e-9, 2e-9), 40e9, 10e-9)


class TestApplyDelay:
    def base(self):
        return ideal_pulse(settings(amp=120), PulseTiming(10e-9, 5e-9), 40e9, 50e-9)

    def test_zero_delay_is_identity(self):
        w = self.base()
        assert apply_delay(w, 0.0) == w

    def test_exact_sample_multiple_shifts_without_interpolation(self):
        w = self.base()
        shifted = apply_delay(w, 100e-12)  # 4 samples at 40 GS/s
        np.testing.assert_array_equal(shifted.samples[4:], w.samples[:-4])
        assert np.all(shifted.samples[:4] == 0.0)

    def test_subsample_residue_moves_crossing(self):
        # Oracle: the 50% crossing of the shifted trace must sit 110 ps later.
        w = apply_edge_filter(self.base(), DEFAULT_TAU_S)
        shifted = apply_delay(w, 110e-12)
        moved = measure_delay(w, shifted)
        assert abs(moved - 110e-12) <= 1e-12

    def test_left_shift_drops_samples(self):
        w = self.base()
        shifted = apply_delay(w, -100e-12)
        np.testing.assert_array_equal(shifted.samples[:-4], w.samples[4:])
        assert np.all(shifted.samples[-4:] == 0.0)

    def test_beyond_span_rejected(self):
        with pytest.raises(ChainConfigError, match="span"):
            apply_delay(self.base(), 16e-9)


class TestEdgeFilter:
    def test_dc_gain_is_unity(self):
        w = Waveform(40e9, 0.0, np.full(8000, 4.0))
        out = apply_edge_filter(w, 1e-9)
        assert out.samples[-1] == pytest.approx(4.0, rel=1e-12)

    def test_step_rise_time_tau_1ns(self):
        # Analytic oracle: 10-90% rise of a first-order step is tau*ln(9).
        step = Waveform(40e9, 0.0, np.concatenate([np.zeros(40), np.ones(3960)]))
        out = apply_edge_filter(step, 1e-9)
        assert measure_rise_time(out) == pytest.approx(1e-9 * math.log(9.0),
                                                       rel=1e-3)

    def test_step_rise_time_default_tau(self):
        # The device default tau = 1 ns / ln(9) gives exactly a 1 ns edge.
        step = Waveform(40e9, 0.0, np.concatenate([np.zeros(40), np.ones(3960)]))
        out = apply_edge_filter(step, DEFAULT_TAU_S)
        assert measure_rise_time(out) == pytest.approx(1e-9, rel=1e-3)

    def test_causal(self):
        w = ideal_pulse(settings(amp=120), PulseTiming(10e-9, 5e-9), 40e9, 50e-9)
        out = apply_edge_filter(w, DEFAULT_TAU_S)
        first_hot = int(np.argmax(w.samples > 0))
        assert np.all(out.samples[:first_hot] == 0.0)


class TestOutputStage:
    def test_below_rail_unchanged(self):
        w = Waveform(40e9, 0.0, np.array([0.0, 3.0, 6.0]))
        out = apply_output_stage(w, ChainModel())
        np.testing.assert_array_equal(out.samples, w.samples)
        assert out.load_ohms == 50.0

    def test_six_volt_plateau_untouched_by_seven_volt_rail(self):
        w = Waveform(40e9, 0.0, np.full(100, 6.0))
        out = apply_output_stage(w, ChainModel())
        np.testing.assert_array_equal(out.samples, w.samples)

    def test_clamps_above_rail(self):
        w = Waveform(40e9, 0.0, np.full(100, 8.0))
        out = apply_output_stage(w, ChainModel())
        assert np.all(out.samples == 7.0)


class TestSynthesize:
    def test_plateau_matches_first_order_step_response(self):
        # Closed-form oracle: after K in-pulse samples the filtered level is
        # amp * (1 - exp(-K*dt/tau)); with start=2ns, width=2ns, K=80 and the
        # default tau this is 3.0 * 80/81 = 2.963 V.
        cap = CaptureConfig(sample_rate=40e9, window=10e-9)
        w = synthesize(settings(amp=60), PulseTiming(2e-9, 2e-9), ChainModel(), cap)
        k = 80
        expected = 3.0 * (1.0 - math.exp(-k / (40e9 * DEFAULT_TAU_S)))
        assert expected == pytest.approx(3.0 * 80 / 81, rel=1e-12)
        assert float(np.max(w.samples)) == pytest.approx(expected, rel=1e-9)
        assert float(np.max(w.samples)) == pytest.approx(2.963, abs=2e-3)

    def test_disabled_channel_renders_flat(self):
        w = synthesize(settings(enabled=False))
        assert np.all(w.samples == 0.0)

    def test_full_scale_vpp_with_5ns_pulse(self):
        # Step response bound: Vpp >= 6 * (1 - exp(-5ns/tau)).
        cap = CaptureConfig(sample_rate=40e9, window=40e-9)
        w = synthesize(settings(amp=120), PulseTiming(10e-9, 5e-9), ChainModel(), cap)
        vpp = float(np.max(w.samples) - np.min(w.samples))
        assert 5.9 <= vpp <= 6.0

    def test_deterministic(self):
        a = synthesize(settings(amp=77, delay=33))
        b = synthesize(settings(amp=77, delay=33))
        assert a == b

    def test_linear_below_rail(self):
        # Doubling the code exactly doubles every sample while under the rail.
        cap = CaptureConfig(sample_rate=40e9, window=30e-9)
        timing = PulseTiming(5e-9, 4e-9)
        one = synthesize(settings(amp=30, delay=21), timing, ChainModel(), cap)
        two = synthesize(settings(amp=60, delay=21), timing, ChainModel(), cap)
        np.testing.assert_array_equal(two.samples, 2.0 * one.samples)

    def test_delay_moves_crossing_for_every_tenth_code(self):
        cap = CaptureConfig(sample_rate=40e9, window=100e-9)
        timing = PulseTiming(20e-9, 10e-9)
        reference = synthesize(settings(amp=120, delay=0), timing, ChainModel(), cap)
        for code in range(-150, 151, 10):
            w = synthesize(settings(amp=120, delay=code), timing, ChainModel(), cap)
            moved = measure_delay(reference, w)
            assert abs(moved - code * 100e-12) <= 25e-12

    def test_settled_plateau_mean_tracks_command(self):
        # A long pulse settles to the commanded level; the trailing half of
        # the plateau must average to it within 0.1%.
        cap = CaptureConfig(sample_rate=40e9, window=100e-9)
        w = synthesize(settings(amp=100), PulseTiming(10e-9, 60e-9), ChainModel(), cap)
        t = w.times()
        plateau = w.samples[(t >= 40e-9) & (t < 70e-9)]
        assert np.mean(plateau) == pytest.approx(5.0, rel=1e-3)

    def test_noise_knob_is_reproducible_with_seeded_rng(self):
        chain = ChainModel(noise_sigma=0.01)
        a = synthesize(settings(amp=60), rng=np.random.default_rng(7), chain=chain)
        b = synthesize(settings(amp=60), rng=np.random.default_rng(7), chain=chain)
        assert a == b
        clean = synthesize(settings(amp=60))
        assert a != clean
