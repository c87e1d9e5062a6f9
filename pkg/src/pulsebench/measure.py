"""Virtual oscilloscope: capture configuration and waveform measurements.

Capture defaults follow the bench scope the hardware was verified on
(40 GS/s, 100 ns window). All level crossings are linearly interpolated
between the bracketing samples, which is what makes 100 ps delay steps
resolvable at a 25 ps sample period.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .device import DeviceLimits
from .waveform import Waveform

DEFAULT_SAMPLE_RATE = 40e9
DEFAULT_WINDOW = 100e-9


class MeasurementAbsent(ValueError):
    """The requested measurement is undefined for this trace."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class CaptureConfig:
    """Virtual scope acquisition settings."""

    sample_rate: float = DEFAULT_SAMPLE_RATE
    window: float = DEFAULT_WINDOW
    trigger_level: float = 0.5
    trigger_edge: str = "rising"  # "rising" | "falling"

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if self.window <= 0:
            raise ValueError("window must be positive")
        if self.trigger_edge not in ("rising", "falling"):
            raise ValueError("trigger_edge must be 'rising' or 'falling'")


@dataclass(frozen=True)
class MeasurementReport:
    """Scalar readouts for one captured trace.

    Measurements that do not apply to the trace (no pulse, no edge) are None,
    with the reason recorded in `notes`. `flags` lists violated device limits.
    """

    vpp: float
    rise_time_10_90: float | None = None
    pulse_width_fwhm: float | None = None
    delay_vs_reference: float | None = None
    flags: tuple[str, ...] = ()
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "vpp": self.vpp,
            "rise_time_10_90": self.rise_time_10_90,
            "pulse_width_fwhm": self.pulse_width_fwhm,
            "delay_vs_reference": self.delay_vs_reference,
            "flags": list(self.flags),
            "notes": list(self.notes),
        }


def measure_vpp(w: Waveform) -> float:
    """Peak-to-peak amplitude: max(samples) - min(samples)."""
    return float(np.max(w.samples) - np.min(w.samples))


def _cross_up(t: np.ndarray, x: np.ndarray, j: int, level: float) -> float:
    """Interpolated time where x crosses `level` between samples j and j+1."""
    x0, x1 = x[j], x[j + 1]
    if x1 == x0:
        return float(t[j])
    return float(t[j] + (level - x0) / (x1 - x0) * (t[j + 1] - t[j]))


def _main_rising_run(x: np.ndarray) -> tuple[int, int]:
    """Maximal-swing non-decreasing run (start, end indices); earliest wins ties."""
    best = (0, 0)
    best_swing = 0.0
    i = 0
    n = len(x)
    while i < n - 1:
        if x[i + 1] < x[i]:
            i += 1
            continue
        j = i
        while j < n - 1 and x[j + 1] >= x[j]:
            j += 1
        swing = x[j] - x[i]
        if swing > best_swing:
            best = (i, j)
            best_swing = swing
        i = j
    if best_swing <= 0.0:
        raise MeasurementAbsent("no rising edge in trace")
    return best


def measure_rise_time(w: Waveform) -> float:
    """10-90% rise time of the main edge, interpolated between samples."""
    x = w.samples
    lo = float(np.min(x))
    hi = float(np.max(x))
    if hi <= lo:
        raise MeasurementAbsent("trace is constant")
    l10 = lo + 0.1 * (hi - lo)
    l90 = lo + 0.9 * (hi - lo)
    i0, i1 = _main_rising_run(x)
    if x[i0] > l10 or x[i1] < l90:
        raise MeasurementAbsent("main edge does not span the 10-90% band")
    t = w.times()
    t10 = t90 = None
    for j in range(i0, i1):
        if x[j] <= l10 <= x[j + 1] and x[j + 1] > x[j]:
            t10 = _cross_up(t, x, j, l10)  # last 10% crossing inside the run
        if t90 is None and x[j] < l90 <= x[j + 1]:
            t90 = _cross_up(t, x, j, l90)  # first 90% crossing
    if t10 is None or t90 is None:
        raise MeasurementAbsent("could not bracket the 10-90% crossings")
    return t90 - t10


def measure_width_fwhm(w: Waveform) -> float:
    """Full width at half maximum of the dominant pulse."""
    x = w.samples
    base = float(np.min(x))
    peak_idx = int(np.argmax(x))
    peak = float(x[peak_idx])
    if peak <= base:
        raise MeasurementAbsent("no pulse in trace")
    half = base + 0.5 * (peak - base)
    t = w.times()

    t_rise = None
    for j in range(peak_idx - 1, -1, -1):
        if x[j] <= half <= x[j + 1]:
            t_rise = _cross_up(t, x, j, half)
            break
    t_fall = None
    for j in range(peak_idx, len(x) - 1):
        if x[j] >= half >= x[j + 1]:
            t_fall = _cross_up(t, x, j, half)
            break
    if t_rise is None or t_fall is None:
        raise MeasurementAbsent("pulse does not cross 50% on both sides")
    return t_fall - t_rise


def _edge_crossing_time(w: Waveform) -> float:
    """50% crossing time of the main rising edge."""
    x = w.samples
    lo = float(np.min(x))
    hi = float(np.max(x))
    if hi <= lo:
        raise MeasurementAbsent("trace is constant")
    half = lo + 0.5 * (hi - lo)
    i0, i1 = _main_rising_run(x)
    t = w.times()
    for j in range(i0, i1):
        if x[j] <= half <= x[j + 1] and x[j + 1] > x[j]:
            return _cross_up(t, x, j, half)
    raise MeasurementAbsent("main edge does not cross 50%")


def measure_delay(reference: Waveform, w: Waveform) -> float:
    """Difference of the 50% rising-edge crossing times (w minus reference)."""
    return _edge_crossing_time(w) - _edge_crossing_time(reference)


def trigger_time(w: Waveform, level: float, edge: str = "rising") -> float:
    """First interpolated crossing of `level` in the given direction."""
    x = w.samples
    t = w.times()
    for j in range(len(x) - 1):
        if edge == "rising" and x[j] <= level <= x[j + 1] and x[j + 1] > x[j]:
            return _cross_up(t, x, j, level)
        if edge == "falling" and x[j] >= level >= x[j + 1] and x[j + 1] < x[j]:
            return _cross_up(t, x, j, level)
    raise MeasurementAbsent(f"no {edge} crossing of {level} V")


def limit_flags(w: Waveform, limits: DeviceLimits) -> tuple[str, ...]:
    """Device-limit violations visible in a trace."""
    flags = []
    peak = float(np.max(w.samples))
    if peak > limits.rail_peak_volts * (1 + 1e-12):
        flags.append(
            f"peak {peak:.6g} V exceeds rail {limits.rail_peak_volts:.6g} V"
        )
    vpp = measure_vpp(w)
    if vpp > limits.max_vpp_into_load * (1 + 1e-12):
        flags.append(
            f"vpp {vpp:.6g} V exceeds capability "
            f"{limits.max_vpp_into_load:.6g} Vpp into {limits.load_ohms:.0f} ohm"
        )
    return tuple(flags)


def build_report(
    w: Waveform,
    limits: DeviceLimits | None = None,
    reference: Waveform | None = None,
) -> MeasurementReport:
    """Run every measurement on a trace, recording absences instead of raising."""
    limits = limits or DeviceLimits()
    notes = []
    values: dict[str, float | None] = {}
    for name, fn in (
        ("rise_time_10_90", measure_rise_time),
        ("pulse_width_fwhm", measure_width_fwhm),
    ):
        try:
            values[name] = fn(w)
        except MeasurementAbsent as exc:
            values[name] = None
            notes.append(f"{name}: {exc.reason}")
    delay = None
    if reference is not None:
        try:
            delay = measure_delay(reference, w)
        except MeasurementAbsent as exc:
            notes.append(f"delay_vs_reference: {exc.reason}")
    return MeasurementReport(
        vpp=measure_vpp(w),
        rise_time_10_90=values["rise_time_10_90"],
        pulse_width_fwhm=values["pulse_width_fwhm"],
        delay_vs_reference=delay,
        flags=limit_flags(w, limits),
        notes=tuple(notes),
    )
