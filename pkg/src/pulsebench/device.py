"""Static device description and code <-> physical-unit conversions.

The pulse driver exposes twelve named outputs spread over five functional
groups (chopper, decoy, normalization, phase, time). Every output has a
121-step amplitude grid (0..6 V in 0.05 V steps) and a 301-step delay grid
(-15..+15 ns in 100 ps steps). Integer codes are the source of truth;
voltages and delays are derived views, which keeps round trips exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from importlib import resources

VOLTS_PER_STEP = 0.05
STEPS_PER_VOLT = 20.0  # exact reciprocal of the step, representable in binary
AMPLITUDE_CODE_MAX = 120
MAX_VOLTS = 6.0

DELAY_STEP_S = 100e-12
DELAY_STEPS_PER_SECOND = 1e10  # exact reciprocal of the step
DELAY_CODE_SPAN = 150  # codes run -150..+150
DELAY_SPAN_S = 15e-9

NUM_CHANNELS = 12


class CodeRangeError(ValueError):
    """An amplitude or delay code (or its physical value) is off-grid."""


class ChannelMapError(ValueError):
    """A channel-map config is malformed or inconsistent."""


class ChannelGroup(Enum):
    CHOPPER = "chopper"
    DECOY = "decoy"
    NORMALIZATION = "normalization"
    PHASE = "phase"
    TIME = "time"


GROUP_SIZES = {
    ChannelGroup.CHOPPER: 2,
    ChannelGroup.DECOY: 4,
    ChannelGroup.NORMALIZATION: 2,
    ChannelGroup.PHASE: 2,
    ChannelGroup.TIME: 2,
}


@dataclass(frozen=True)
class ChannelId:
    """One of the twelve physical outputs."""

    label: str
    group: ChannelGroup
    index_in_group: int
    wire_index: int


def load_channel_map(text: str) -> tuple[ChannelId, ...]:
    """Parse a channel-map config (JSON: label -> {wire_index, group}).

    Rejects duplicate labels, duplicate or out-of-range wire indices, and
    group populations that do not match the device.
    """

    def no_dup_pairs(pairs):
        seen = set()
        for key, _ in pairs:
            if key in seen:
                raise ChannelMapError(f"duplicate channel label {key!r}")
            seen.add(key)
        return dict(pairs)

    try:
        raw = json.loads(text, object_pairs_hook=no_dup_pairs)
    except json.JSONDecodeError as exc:
        raise ChannelMapError(f"channel map is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ChannelMapError("channel map must be a JSON object")

    entries = []
    seen_wires: set[int] = set()
    for label, body in raw.items():
        try:
            wire = body["wire_index"]
            group = ChannelGroup(body["group"])
        except (TypeError, KeyError, ValueError) as exc:
            raise ChannelMapError(f"bad entry for {label!r}: {exc}") from exc
        if not isinstance(wire, int) or not 0 <= wire < NUM_CHANNELS:
            raise ChannelMapError(
                f"{label!r}: wire_index must be an integer in 0..{NUM_CHANNELS - 1}"
            )
        if wire in seen_wires:
            raise ChannelMapError(f"{label!r}: duplicate wire_index {wire}")
        seen_wires.add(wire)
        entries.append((label, group, wire))

    if len(entries) != NUM_CHANNELS:
        raise ChannelMapError(f"expected {NUM_CHANNELS} channels, got {len(entries)}")

    entries.sort(key=lambda e: e[2])
    counters = {g: 0 for g in ChannelGroup}
    channels = []
    for label, group, wire in entries:
        channels.append(ChannelId(label, group, counters[group], wire))
        counters[group] += 1
    for group, size in GROUP_SIZES.items():
        if counters[group] != size:
            raise ChannelMapError(
                f"group {group.value}: expected {size} channels, got {counters[group]}"
            )
    return tuple(channels)


def default_channel_map() -> tuple[ChannelId, ...]:
    """The channel map shipped with the package."""
    text = resources.files("pulsebench.data").joinpath("channel_map.json").read_text()
    return load_channel_map(text)


CHANNELS: tuple[ChannelId, ...] = default_channel_map()
CHANNEL_BY_LABEL: dict[str, ChannelId] = {c.label: c for c in CHANNELS}
CHANNEL_BY_WIRE: dict[int, ChannelId] = {c.wire_index: c for c in CHANNELS}


def amplitude_code_to_volts(code: int) -> float:
    """Voltage commanded by an amplitude code (code x 0.05 V)."""
    if not 0 <= code <= AMPLITUDE_CODE_MAX:
        raise CodeRangeError(
            f"amplitude code {code} outside 0..{AMPLITUDE_CODE_MAX}"
        )
    return code * VOLTS_PER_STEP


def volts_to_amplitude_code(volts: float) -> int:
    """Nearest amplitude code for a voltage; exact midpoints round up."""
    if not 0.0 <= volts <= MAX_VOLTS:
        raise CodeRangeError(f"voltage {volts} V outside 0..{MAX_VOLTS} V")
    # Multiplying by the exact reciprocal avoids drift that v / 0.05 picks up.
    return min(math.floor(volts * STEPS_PER_VOLT + 0.5), AMPLITUDE_CODE_MAX)


def delay_code_to_seconds(code: int) -> float:
    """Delay commanded by a delay code (code x 100 ps, signed)."""
    if not -DELAY_CODE_SPAN <= code <= DELAY_CODE_SPAN:
        raise CodeRangeError(
            f"delay code {code} outside -{DELAY_CODE_SPAN}..+{DELAY_CODE_SPAN}"
        )
    # Dividing by the exact steps-per-second avoids the double rounding that
    # code * float(100e-12) picks up (e.g. 150 steps must give exactly 15 ns).
    return code / DELAY_STEPS_PER_SECOND


@dataclass(frozen=True)
class ChannelSettings:
    """Live configuration of a single output."""

    channel: ChannelId
    amplitude: int = 0
    delay: int = 0
    enabled: bool = False


def validate_settings(settings: ChannelSettings) -> list[str]:
    """List every violated bound; empty means valid. Never raises."""
    problems = []
    if not 0 <= settings.amplitude <= AMPLITUDE_CODE_MAX:
        problems.append(
            f"{settings.channel.label}: amplitude code {settings.amplitude} "
            f"outside 0..{AMPLITUDE_CODE_MAX}"
        )
    if not -DELAY_CODE_SPAN <= settings.delay <= DELAY_CODE_SPAN:
        problems.append(
            f"{settings.channel.label}: delay code {settings.delay} "
            f"outside -{DELAY_CODE_SPAN}..+{DELAY_CODE_SPAN}"
        )
    return problems


@dataclass(frozen=True)
class DeviceLimits:
    """Electrical limits of the output stage."""

    volts_per_step: float = VOLTS_PER_STEP
    max_volts: float = MAX_VOLTS
    delay_step_s: float = DELAY_STEP_S
    delay_span_s: float = DELAY_SPAN_S
    nominal_rise_time_s: float = 1e-9  # 10-90%
    rail_peak_volts: float = 7.0
    load_ohms: float = 50.0
    max_vpp_into_load: float = 10.0

    def __post_init__(self):
        for name in (
            "volts_per_step",
            "max_volts",
            "delay_step_s",
            "delay_span_s",
            "nominal_rise_time_s",
            "rail_peak_volts",
            "load_ohms",
            "max_vpp_into_load",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if not math.isclose(
            self.max_volts, AMPLITUDE_CODE_MAX * self.volts_per_step, rel_tol=1e-12
        ):
            raise ValueError(
                "max_volts must equal the top of the amplitude code grid"
            )
