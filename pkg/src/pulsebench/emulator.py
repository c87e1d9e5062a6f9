"""Device emulator: command-driven state machine plus capture hooks.

`apply_command` is a pure transition (state, command) -> (state, reply);
the `Emulator` wrapper owns one mutable state behind a lock and applies
commands strictly serially, which is the device's concurrency contract.

Pattern upload convention: LOAD_PATTERN announces the slot count, then each
slot arrives as one Set* write per field for all twelve channels (36 writes
per slot, amplitude/delay/enable in wire order). Every 36th accepted write
freezes the live settings into the next pattern slot. ARM toggles the armed
flag and, if an upload is still in progress, cancels it.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace

import numpy as np

from .device import (
    AMPLITUDE_CODE_MAX,
    CHANNEL_BY_WIRE,
    CHANNELS,
    DELAY_CODE_SPAN,
    NUM_CHANNELS,
    ChannelSettings,
    DeviceLimits,
)
from .measure import CaptureConfig
from .protocol import (
    BROADCAST,
    Command,
    FrameError,
    Opcode,
    RangeViolation,
    Reply,
    ReplyStatus,
    ack,
    decode_frame,
    encode_reply,
    nak,
)
from .signal_chain import ChainModel, PulseTiming, synthesize
from .waveform import Waveform

# One pattern slot is uploaded as amplitude+delay+enable for every channel.
WRITES_PER_SLOT = 3 * NUM_CHANNELS

# Wire image of one channel inside a pattern slot: (amplitude, delay, enabled).
SlotSnapshot = tuple[tuple[int, int, bool], ...]


@dataclass(frozen=True)
class LoadProgress:
    """Pattern upload in flight."""

    expected_slots: int
    staged: tuple[SlotSnapshot, ...] = ()
    writes: int = 0


@dataclass(frozen=True)
class DeviceState:
    """Complete device-visible state.

    `uptime` counts accepted state-changing commands; it is diagnostic and
    excluded from equality so that no-op writes leave equal states equal.
    """

    settings: tuple[ChannelSettings, ...]
    armed: bool = False
    pattern: tuple[SlotSnapshot, ...] | None = None
    loading: LoadProgress | None = None
    uptime: int = field(default=0, compare=False)


def initial_state() -> DeviceState:
    return DeviceState(settings=tuple(ChannelSettings(c) for c in CHANNELS))


def _snapshot(settings: tuple[ChannelSettings, ...]) -> SlotSnapshot:
    return tuple((s.amplitude, s.delay, s.enabled) for s in settings)


def _status_value(state: DeviceState) -> int:
    enabled = sum(1 for s in state.settings if s.enabled)
    value = enabled
    if state.armed:
        value |= 1 << 8
    if state.pattern is not None:
        value |= 1 << 9
    if state.loading is not None:
        value |= 1 << 10
    return value


def _record_write(state: DeviceState) -> DeviceState:
    """Advance pattern upload accounting after an accepted Set* write."""
    load = state.loading
    if load is None:
        return state
    writes = load.writes + 1
    staged = load.staged
    if writes % WRITES_PER_SLOT == 0:
        staged = staged + (_snapshot(state.settings),)
    if len(staged) >= load.expected_slots:
        return replace(state, pattern=staged, loading=None)
    return replace(state, loading=LoadProgress(load.expected_slots, staged, writes))


def apply_command(state: DeviceState, cmd: Command) -> tuple[DeviceState, Reply]:
    """Apply one command; failures come back as NAK replies, never raises."""
    try:
        opcode = Opcode(cmd.opcode)
    except ValueError:
        return state, nak(ReplyStatus.BAD_OPCODE, int(cmd.opcode) & 0xFF)

    def reject() -> tuple[DeviceState, Reply]:
        return state, nak(ReplyStatus.RANGE_VIOLATION, int(opcode))

    if opcode in (
        Opcode.SET_AMPLITUDE,
        Opcode.SET_DELAY,
        Opcode.GET_AMPLITUDE,
        Opcode.GET_DELAY,
        Opcode.SET_ENABLE,
    ):
        if not 0 <= cmd.channel < NUM_CHANNELS:
            return reject()
    elif cmd.channel != BROADCAST:
        return reject()

    if opcode == Opcode.GET_AMPLITUDE:
        return state, ack(opcode, state.settings[cmd.channel].amplitude)
    if opcode == Opcode.GET_DELAY:
        return state, ack(opcode, state.settings[cmd.channel].delay + DELAY_CODE_SPAN)
    if opcode == Opcode.GET_STATUS:
        return state, ack(opcode, _status_value(state))

    if opcode == Opcode.ARM:
        armed = not state.armed
        next_state = replace(
            state, armed=armed, loading=None, uptime=state.uptime + 1
        )
        return next_state, ack(opcode, int(armed))

    if opcode == Opcode.LOAD_PATTERN:
        if not 0 <= cmd.payload <= 0xFFFF:
            return reject()
        if cmd.payload == 0:
            next_state = replace(
                state, pattern=(), loading=None, uptime=state.uptime + 1
            )
        else:
            next_state = replace(
                state,
                pattern=None,
                loading=LoadProgress(cmd.payload),
                uptime=state.uptime + 1,
            )
        return next_state, ack(opcode, cmd.payload)

    # Set* writes.
    current = state.settings[cmd.channel]
    if opcode == Opcode.SET_AMPLITUDE:
        if not 0 <= cmd.payload <= AMPLITUDE_CODE_MAX:
            return reject()
        updated = replace(current, amplitude=cmd.payload)
    elif opcode == Opcode.SET_DELAY:
        if not 0 <= cmd.payload <= 2 * DELAY_CODE_SPAN:
            return reject()
        updated = replace(current, delay=cmd.payload - DELAY_CODE_SPAN)
    else:  # SET_ENABLE
        if cmd.payload not in (0, 1):
            return reject()
        updated = replace(current, enabled=bool(cmd.payload))

    if updated == current and state.loading is None:
        # Idempotent write: state untouched, still acknowledged.
        return replace(state, uptime=state.uptime + 1), ack(opcode, cmd.payload)

    settings = list(state.settings)
    settings[cmd.channel] = updated
    next_state = replace(
        state, settings=tuple(settings), uptime=state.uptime + 1
    )
    next_state = _record_write(next_state)
    return next_state, ack(opcode, cmd.payload)


class Emulator:
    """Single logical owner of a DeviceState; thread-safe, serialized."""

    def __init__(
        self,
        chain: ChainModel | None = None,
        limits: DeviceLimits | None = None,
    ):
        self.chain = chain or ChainModel()
        self.limits = limits or DeviceLimits()
        self._state = initial_state()
        self._lock = threading.Lock()

    @property
    def state(self) -> DeviceState:
        with self._lock:
            return self._state

    def reset(self) -> None:
        with self._lock:
            self._state = initial_state()

    def submit(self, cmd: Command) -> Reply:
        """Apply one command under the device lock."""
        with self._lock:
            self._state, reply = apply_command(self._state, cmd)
            return reply

    def submit_frame(self, frame: bytes) -> bytes:
        """Byte-level entry point: decode, apply, return the reply frame."""
        try:
            cmd = decode_frame(frame)
        except FrameError as exc:
            echo = frame[1] if len(frame) > 1 else 0
            return encode_reply(nak(exc.status, echo))
        return encode_reply(self.submit(cmd))

    def channel_settings(self, wire_index: int) -> ChannelSettings:
        return self.state.settings[wire_index]

    def capture(
        self,
        wire_index: int,
        timing: PulseTiming | None = None,
        capture: CaptureConfig | None = None,
        rng: np.random.Generator | None = None,
    ) -> Waveform:
        """Render the named output from the current settings snapshot."""
        if not 0 <= wire_index < NUM_CHANNELS:
            raise RangeViolation(
                f"capture channel {wire_index} outside 0..{NUM_CHANNELS - 1}"
            )
        settings = self.state.settings[wire_index]
        return synthesize(settings, timing, self.chain, capture, rng=rng)

    def describe(self) -> dict:
        """JSON-friendly snapshot of the full device state."""
        state = self.state
        return {
            "channels": [
                {
                    "label": CHANNEL_BY_WIRE[i].label,
                    "wire_index": i,
                    "group": CHANNEL_BY_WIRE[i].group.value,
                    "amplitude": s.amplitude,
                    "delay": s.delay,
                    "enabled": s.enabled,
                }
                for i, s in enumerate(state.settings)
            ],
            "armed": state.armed,
            "pattern_slots": None if state.pattern is None else len(state.pattern),
            "loading": state.loading is not None,
            "uptime": state.uptime,
        }
