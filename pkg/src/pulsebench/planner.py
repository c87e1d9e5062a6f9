"""Maps QKD symbols onto per-slot channel firings and command streams.

Each 10 ns slot carries one symbol as an early/late pulse pair. The fixed
channel roles:

    AC1/AC2  chop the early/late bin out of the wide laser pulse
    AD1/AD3  coarse intensity-class attenuation, early/late bin
    AD2/AD4  fine intensity trim, early/late bin (unity by default)
    AU1/AU2  static normalization of the time- / phase-encoder arm
    AP1/AP2  phase drive for the early/late bin (X basis only)
    AT1/AT2  gates selecting the early/late bin

Z basis puts the bit in the surviving time bin; X basis keeps both bins and
puts the bit in their relative phase (0 or pi on the late bin). Vacuum slots
command zero transmission on the intensity channels but keep the choppers
firing so slot timing stays uniform.

Intensity modulators follow the sin^2 Mach-Zehnder transfer; phase
modulators are linear in voltage with a half-wave voltage v_pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .device import (
    CHANNEL_BY_LABEL,
    MAX_VOLTS,
    NUM_CHANNELS,
    ChannelId,
    ChannelSettings,
    amplitude_code_to_volts,
    validate_settings,
    volts_to_amplitude_code,
)
from .emulator import SlotSnapshot
from .protocol import BROADCAST, Command, Opcode, set_delay_command


class Intensity(Enum):
    SIGNAL = "signal"
    DECOY = "decoy"
    VACUUM = "vacuum"


class Basis(Enum):
    Z = "Z"
    X = "X"


class PlanError(ValueError):
    """A symbol or calibration cannot be realized on the device grid."""


class UnreachableSetpoint(PlanError):
    """The requested transmission/phase needs a voltage beyond the grid."""


@dataclass(frozen=True)
class QkdSymbol:
    intensity: Intensity
    basis: Basis
    bit: int

    def __post_init__(self):
        if self.bit not in (0, 1):
            raise ValueError("bit must be 0 or 1")

    def short(self) -> str:
        return f"{self.intensity.value},{self.basis.value},{self.bit}"


@dataclass(frozen=True)
class ModulatorCalibration:
    """Electro-optic constants and slot geometry.

    Defaults: v_pi 5 V keeps the full transfer branch on the 0..6 V grid;
    mean photon numbers are signal 0.5, decoy 0.1, vacuum 0.
    """

    v_pi: float = 5.0
    intensity_targets: dict[Intensity, float] = field(
        default_factory=lambda: {
            Intensity.SIGNAL: 0.5,
            Intensity.DECOY: 0.1,
            Intensity.VACUUM: 0.0,
        }
    )
    slot_period: float = 10e-9
    bin_separation: float = 3e-9
    pulse_width: float = 1e-9
    normalization_time_arm: float = 1.0  # transmission of the AU trims
    normalization_phase_arm: float = 1.0
    delay_trims: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.v_pi <= 0:
            raise ValueError("v_pi must be positive")
        mu = self.intensity_targets.get(Intensity.SIGNAL, 0.0)
        nu = self.intensity_targets.get(Intensity.DECOY, 0.0)
        if not mu > nu >= 0:
            raise ValueError("intensity targets must satisfy signal > decoy >= 0")
        if self.intensity_targets.get(Intensity.VACUUM, 0.0) != 0.0:
            raise ValueError("vacuum target must be 0")
        if not 0 < self.bin_separation < self.slot_period:
            raise ValueError("bin_separation must lie inside the slot period")
        if self.pulse_width <= 0:
            raise ValueError("pulse_width must be positive")


def intensity_transmission(v: float, v_pi: float) -> float:
    """Mach-Zehnder intensity transfer sin^2(pi*v / (2*v_pi)) on [0, v_pi]."""
    if not 0.0 <= v <= v_pi * (1 + 1e-12):
        raise PlanError(f"drive {v} V outside the monotone branch [0, {v_pi}] V")
    return math.sin(math.pi * v / (2.0 * v_pi)) ** 2


def phase_shift(v: float, v_pi: float) -> float:
    """Linear phase modulator: pi * v / v_pi radians."""
    if v < 0:
        raise PlanError("phase drive must be non-negative")
    return math.pi * v / v_pi


@dataclass(frozen=True)
class QuantizedSetpoint:
    """A transmission target snapped to the amplitude grid."""

    code: int
    volts: float
    achieved: float
    residual: float  # achieved - target


def voltage_for_transmission(target: float, v_pi: float) -> QuantizedSetpoint:
    """Drive voltage for a transmission target, quantized to the code grid."""
    if not 0.0 <= target <= 1.0:
        raise PlanError(f"transmission target {target} outside [0, 1]")
    v = (2.0 * v_pi / math.pi) * math.asin(math.sqrt(target))
    if v > MAX_VOLTS * (1 + 1e-12):
        raise UnreachableSetpoint(
            f"target {target} needs {v:.3f} V, beyond the {MAX_VOLTS} V grid "
            f"(v_pi={v_pi} V)"
        )
    code = volts_to_amplitude_code(min(v, MAX_VOLTS))
    achieved = intensity_transmission(
        min(amplitude_code_to_volts(code), v_pi), v_pi
    )
    return QuantizedSetpoint(code, amplitude_code_to_volts(code), achieved,
                             achieved - target)


def voltage_for_phase(phi: float, v_pi: float) -> QuantizedSetpoint:
    """Drive voltage for a phase target in [0, pi], quantized to the grid."""
    if not 0.0 <= phi <= math.pi * (1 + 1e-12):
        raise PlanError(f"phase target {phi} outside [0, pi]")
    v = phi * v_pi / math.pi
    if v > MAX_VOLTS * (1 + 1e-12):
        raise UnreachableSetpoint(
            f"phase {phi:.3f} rad needs {v:.3f} V, beyond the {MAX_VOLTS} V grid"
        )
    code = volts_to_amplitude_code(min(v, MAX_VOLTS))
    achieved = phase_shift(amplitude_code_to_volts(code), v_pi)
    return QuantizedSetpoint(code, amplitude_code_to_volts(code), achieved,
                             achieved - phi)


@dataclass(frozen=True)
class Firing:
    """One channel's contribution to a slot."""

    channel: ChannelId
    amplitude: int
    delay: int
    start: float  # slot-relative leading edge, seconds
    width: float


@dataclass(frozen=True)
class PlanSlot:
    index: int
    symbol: QkdSymbol
    firings: tuple[Firing, ...]

    def snapshot(self) -> SlotSnapshot:
        """12-channel wire image: (amplitude, delay, enabled) per output."""
        rows: list[tuple[int, int, bool]] = [(0, 0, False)] * NUM_CHANNELS
        for f in self.firings:
            rows[f.channel.wire_index] = (f.amplitude, f.delay, True)
        return tuple(rows)


@dataclass(frozen=True)
class PulsePlan:
    slot_period: float
    slots: tuple[PlanSlot, ...]

    def wire_snapshots(self) -> tuple[SlotSnapshot, ...]:
        return tuple(slot.snapshot() for slot in self.slots)


def _bin_timing(cal: ModulatorCalibration, late: bool) -> tuple[float, float]:
    center = cal.slot_period / 2.0 + (0.5 if late else -0.5) * cal.bin_separation
    return center - cal.pulse_width / 2.0, cal.pulse_width


def plan_symbol(symbol: QkdSymbol, cal: ModulatorCalibration) -> PlanSlot:
    """Channel firings realizing one symbol in one slot."""
    mu_signal = cal.intensity_targets[Intensity.SIGNAL]
    target = cal.intensity_targets[symbol.intensity] / mu_signal
    full = voltage_for_transmission(1.0, cal.v_pi)
    coarse = voltage_for_transmission(target, cal.v_pi)

    early = _bin_timing(cal, late=False)
    late = _bin_timing(cal, late=True)
    slot_wide = (0.0, cal.slot_period)

    def fire(label: str, code: int, timing: tuple[float, float]) -> Firing:
        return Firing(
            CHANNEL_BY_LABEL[label],
            code,
            cal.delay_trims.get(label, 0),
            timing[0],
            timing[1],
        )

    firings = [
        # Choppers carve both bins every slot, vacuum included.
        fire("AC1", full.code, early),
        fire("AC2", full.code, late),
        # Intensity class: coarse attenuators carry the target, fine trims
        # sit at unity transmission.
        fire("AD1", coarse.code, early),
        fire("AD2", full.code, early),
        fire("AD3", coarse.code, late),
        fire("AD4", full.code, late),
        # Static per-arm normalization.
        fire(
            "AU1",
            voltage_for_transmission(cal.normalization_time_arm, cal.v_pi).code,
            slot_wide,
        ),
        fire(
            "AU2",
            voltage_for_transmission(cal.normalization_phase_arm, cal.v_pi).code,
            slot_wide,
        ),
    ]

    if symbol.intensity != Intensity.VACUUM:
        gate = full.code
        if symbol.basis == Basis.Z:
            # Bit picks the surviving time bin.
            if symbol.bit == 0:
                firings.append(fire("AT1", gate, early))
            else:
                firings.append(fire("AT2", gate, late))
        else:
            # Both bins survive; the bit rides the late bin's relative phase.
            firings.append(fire("AT1", gate, early))
            firings.append(fire("AT2", gate, late))
            phi = math.pi if symbol.bit else 0.0
            firings.append(fire("AP1", 0, early))
            firings.append(
                fire("AP2", voltage_for_phase(phi, cal.v_pi).code, late)
            )

    firings.sort(key=lambda f: f.channel.wire_index)
    for f in firings:
        problems = validate_settings(
            ChannelSettings(f.channel, f.amplitude, f.delay, True)
        )
        if problems:
            raise PlanError("; ".join(problems))
        if f.start < 0 or f.start + f.width > cal.slot_period:
            raise PlanError(
                f"{f.channel.label} firing [{f.start:.3g}, "
                f"{f.start + f.width:.3g}) s does not fit the "
                f"{cal.slot_period:.3g} s slot"
            )
    return PlanSlot(0, symbol, tuple(firings))


def plan_sequence(
    symbols: list[QkdSymbol], cal: ModulatorCalibration
) -> tuple[PulsePlan, list[Command]]:
    """Plan a symbol train and emit the command stream that uploads it.

    The stream is LOAD_PATTERN(n) followed by each slot's full 12-channel
    write group (amplitude, delay, enable per output in wire order), then a
    single ARM. Replaying it through the emulator reconstructs the plan.
    """
    slots = []
    for k, symbol in enumerate(symbols):
        try:
            slot = plan_symbol(symbol, cal)
        except PlanError as exc:
            raise PlanError(f"slot {k} ({symbol.short()}): {exc}") from exc
        slots.append(PlanSlot(k, symbol, slot.firings))

    plan = PulsePlan(cal.slot_period, tuple(slots))
    commands: list[Command] = []
    if slots:
        commands.append(Command(Opcode.LOAD_PATTERN, BROADCAST, len(slots)))
        for slot in slots:
            for wire, (amp, delay, enabled) in enumerate(slot.snapshot()):
                commands.append(Command(Opcode.SET_AMPLITUDE, wire, amp))
                commands.append(set_delay_command(wire, delay))
                commands.append(Command(Opcode.SET_ENABLE, wire, int(enabled)))
    commands.append(Command(Opcode.ARM, BROADCAST, 0))
    return plan, commands


def format_plan(plan: PulsePlan) -> str:
    """Line-oriented plan dump: `slot | symbol | channel:amp:delay,...`."""
    lines = []
    for slot in plan.slots:
        firings = ",".join(
            f"{f.channel.label}:{f.amplitude}:{f.delay}" for f in slot.firings
        )
        lines.append(f"{slot.index} | {slot.symbol.short()} | {firings}")
    return "\n".join(lines) + ("\n" if lines else "")


_INTENSITY_BY_NAME = {i.value: i for i in Intensity}
_BASIS_BY_NAME = {b.value: b for b in Basis}


def parse_symbols(text: str) -> list[QkdSymbol]:
    """Parse a symbol file: one `intensity,basis,bit` triple per line.

    Blank lines and #-comments are allowed; errors carry line numbers.
    """
    symbols = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise PlanError(
                f"line {lineno}: expected `intensity,basis,bit`, got {raw!r}"
            )
        intensity, basis, bit = parts
        if intensity.lower() not in _INTENSITY_BY_NAME:
            raise PlanError(f"line {lineno}: unknown intensity {intensity!r}")
        if basis.upper() not in _BASIS_BY_NAME:
            raise PlanError(f"line {lineno}: unknown basis {basis!r}")
        if bit not in ("0", "1"):
            raise PlanError(f"line {lineno}: bit must be 0 or 1, got {bit!r}")
        symbols.append(
            QkdSymbol(
                _INTENSITY_BY_NAME[intensity.lower()],
                _BASIS_BY_NAME[basis.upper()],
                int(bit),
            )
        )
    return symbols


def format_symbols(symbols: list[QkdSymbol]) -> str:
    return "\n".join(s.short() for s in symbols) + ("\n" if symbols else "")
