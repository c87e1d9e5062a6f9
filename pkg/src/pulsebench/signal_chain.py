"""Renders channel settings into output waveforms.

The chain mirrors the hardware signal path: an ideal logic-level pulse, the
programmable delay line, an edge-shaping single-pole low-pass, and the
output stage that clamps against the supply rail into a 50 ohm load.

The edge filter's time constant defaults to 1 ns / ln(9), which makes the
10-90% rise time of a step exactly 1 ns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .device import (
    DELAY_SPAN_S,
    ChannelSettings,
    amplitude_code_to_volts,
    delay_code_to_seconds,
    validate_settings,
)
from .measure import CaptureConfig
from .waveform import Waveform

NOMINAL_RISE_TIME_S = 1e-9
DEFAULT_TAU_S = NOMINAL_RISE_TIME_S / math.log(9.0)  # 10-90% rise of 1 ns

# Residual sub-sample shifts below this fraction of a sample are treated as
# zero, so delays that are exact sample multiples shift without interpolation.
_FRAC_SNAP = 1e-9


class ChainConfigError(ValueError):
    """Capture window or chain parameters cannot render the request."""


@dataclass(frozen=True)
class PulseTiming:
    """Slot-relative position of the undelayed pulse."""

    start: float
    width: float

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("pulse width must be positive")


DEFAULT_TIMING = PulseTiming(start=20e-9, width=10e-9)


@dataclass(frozen=True)
class ChainModel:
    """Edge shaping, gain ceiling, and load of the output path."""

    tau: float = DEFAULT_TAU_S
    rail_peak: float = 7.0
    load_ohms: float = 50.0
    polarity: int = 1  # unipolar positive: baseline 0 V
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.rail_peak <= 0:
            raise ValueError("rail_peak must be positive")
        if self.polarity != 1:
            raise ValueError("only unipolar positive output is modeled")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")


def ideal_pulse(
    settings: ChannelSettings,
    timing: PulseTiming,
    sample_rate: float,
    duration: float,
) -> Waveform:
    """Rectangular logic pulse before delay and shaping.

    Disabled channels render all-zero. The window must contain the pulse
    even after the channel's programmed delay is applied.
    """
    problems = validate_settings(settings)
    if problems:
        raise ChainConfigError("; ".join(problems))
    n = int(round(duration * sample_rate))
    if n < 1:
        raise ChainConfigError("duration shorter than one sample")
    delay = delay_code_to_seconds(settings.delay)
    if timing.start + delay < 0 or timing.start + timing.width + delay > duration:
        raise ChainConfigError(
            f"window of {duration:.3g} s cannot contain the pulse "
            f"[{timing.start:.3g}, {timing.start + timing.width:.3g}) s "
            f"shifted by {delay:.3g} s"
        )
    t = np.arange(n) / sample_rate
    amplitude = amplitude_code_to_volts(settings.amplitude) if settings.enabled else 0.0
    samples = np.where(
        (t >= timing.start) & (t < timing.start + timing.width), amplitude, 0.0
    )
    return Waveform(sample_rate, 0.0, samples)


def apply_delay(w: Waveform, delay: float) -> Waveform:
    """Shift a trace by `delay` seconds (positive = later).

    Integer-sample part shifts directly; the sub-sample residue is linearly
    interpolated. Samples pushed outside the window are dropped and vacated
    samples are zero.
    """
    if abs(delay) > DELAY_SPAN_S * (1 + 1e-9):
        raise ChainConfigError(
            f"delay {delay:.3g} s outside the +/-{DELAY_SPAN_S:.3g} s span"
        )
    shift = delay * w.sample_rate
    n_int = math.floor(shift)
    frac = shift - n_int
    if frac < _FRAC_SNAP:
        frac = 0.0
    elif frac > 1.0 - _FRAC_SNAP:
        n_int += 1
        frac = 0.0
    samples = kernels.fractional_shift(np.asarray(w.samples), n_int, frac)
    return Waveform(w.sample_rate, w.t0, samples, load_ohms=w.load_ohms)


def apply_edge_filter(w: Waveform, tau: float) -> Waveform:
    """Single-pole low-pass with the exact per-sample exponential update.

    y[n] = a*y[n-1] + (1-a)*x[n] with a = exp(-dt/tau); DC gain is exactly 1.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    alpha = math.exp(-1.0 / (w.sample_rate * tau))
    samples = kernels.iir_lowpass(np.asarray(w.samples), alpha)
    return Waveform(w.sample_rate, w.t0, samples, load_ohms=w.load_ohms)


def apply_output_stage(w: Waveform, chain: ChainModel) -> Waveform:
    """Hard-clamp to [0, rail] and annotate the assumed load."""
    samples = np.clip(w.samples, 0.0, chain.rail_peak)
    return Waveform(w.sample_rate, w.t0, samples, load_ohms=chain.load_ohms)


def synthesize(
    settings: ChannelSettings,
    timing: PulseTiming | None = None,
    chain: ChainModel | None = None,
    capture: CaptureConfig | None = None,
    rng: np.random.Generator | None = None,
) -> Waveform:
    """Full chain: ideal pulse -> delay -> edge filter -> output stage.

    Deterministic unless the chain has noise_sigma > 0, in which case
    Gaussian noise is added ahead of the clamp (pass `rng` to pin it).
    """
    timing = timing or DEFAULT_TIMING
    chain = chain or ChainModel()
    capture = capture or CaptureConfig()
    w = ideal_pulse(settings, timing, capture.sample_rate, capture.window)
    w = apply_delay(w, delay_code_to_seconds(settings.delay))
    w = apply_edge_filter(w, chain.tau)
    if chain.noise_sigma > 0.0:
        if rng is None:
            rng = np.random.default_rng()
        noisy = w.samples + rng.normal(0.0, chain.noise_sigma, len(w))
        w = Waveform(w.sample_rate, w.t0, noisy)
    return apply_output_stage(w, chain)
