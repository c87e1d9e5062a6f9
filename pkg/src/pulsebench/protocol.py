"""Framed serial control protocol.

Command frame (6 bytes):

    SOF 0xA5 | opcode | channel | payload hi | payload lo | crc

Reply frame (6 bytes):

    SOF 0x5A | status | echo opcode | value hi | value lo | crc

The CRC is CRC-8 (poly 0x07, init 0x00, unreflected, xor-out 0x00) over the
four bytes between SOF and CRC. Payloads are big-endian unsigned 16-bit;
delay codes travel offset by +150 so the wire stays unsigned. Channel-scoped
opcodes address wire indices 0..11; device-wide opcodes use 0xFF.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

from . import kernels
from .device import AMPLITUDE_CODE_MAX, DELAY_CODE_SPAN, NUM_CHANNELS

SOF_COMMAND = 0xA5
SOF_REPLY = 0x5A
FRAME_LEN = 6
BROADCAST = 0xFF
DELAY_OFFSET = DELAY_CODE_SPAN  # wire delay payload = code + 150


class Opcode(IntEnum):
    SET_AMPLITUDE = 0x01
    SET_DELAY = 0x02
    GET_AMPLITUDE = 0x03
    GET_DELAY = 0x04
    SET_ENABLE = 0x05
    GET_STATUS = 0x06
    LOAD_PATTERN = 0x07
    ARM = 0x08


CHANNEL_SCOPED = frozenset(
    {
        Opcode.SET_AMPLITUDE,
        Opcode.SET_DELAY,
        Opcode.GET_AMPLITUDE,
        Opcode.GET_DELAY,
        Opcode.SET_ENABLE,
    }
)

# Legal payload range per opcode; Get*/Arm frames carry zero.
PAYLOAD_RANGE: dict[Opcode, tuple[int, int]] = {
    Opcode.SET_AMPLITUDE: (0, AMPLITUDE_CODE_MAX),
    Opcode.SET_DELAY: (0, 2 * DELAY_CODE_SPAN),
    Opcode.GET_AMPLITUDE: (0, 0),
    Opcode.GET_DELAY: (0, 0),
    Opcode.SET_ENABLE: (0, 1),
    Opcode.GET_STATUS: (0, 0),
    Opcode.LOAD_PATTERN: (0, 0xFFFF),
    Opcode.ARM: (0, 0),
}


class ReplyStatus(IntEnum):
    ACK = 0x00
    BAD_SOF = 0x01
    TRUNCATED = 0x02
    BAD_CRC = 0x03
    BAD_OPCODE = 0x04
    RANGE_VIOLATION = 0x05


class FrameError(ValueError):
    """Base for frame decode failures; `status` is the matching NAK reason."""

    status = ReplyStatus.RANGE_VIOLATION


class BadSof(FrameError):
    status = ReplyStatus.BAD_SOF


class Truncated(FrameError):
    status = ReplyStatus.TRUNCATED


class BadCrc(FrameError):
    status = ReplyStatus.BAD_CRC


class BadOpcode(FrameError):
    status = ReplyStatus.BAD_OPCODE


class RangeViolation(FrameError):
    status = ReplyStatus.RANGE_VIOLATION


class EncodeError(ValueError):
    """Command fields are outside their legal ranges; no bytes produced."""


def crc8(data: bytes) -> int:
    """CRC-8/ATM over arbitrary bytes."""
    return kernels.crc8(data)


@dataclass(frozen=True)
class Command:
    opcode: Opcode
    channel: int
    payload: int = 0

    def delay_code(self) -> int:
        """Signed delay code carried by a SET_DELAY payload."""
        return self.payload - DELAY_OFFSET


def set_delay_command(channel: int, delay_code: int) -> Command:
    """SET_DELAY with the signed code offset-encoded for the wire."""
    return Command(Opcode.SET_DELAY, channel, delay_code + DELAY_OFFSET)


def _check_command(cmd: Command, error: type[Exception]) -> None:
    try:
        opcode = Opcode(cmd.opcode)
    except ValueError:
        raise error(f"unknown opcode {cmd.opcode!r}") from None
    if opcode in CHANNEL_SCOPED:
        if not 0 <= cmd.channel < NUM_CHANNELS:
            raise error(
                f"{opcode.name}: channel {cmd.channel} outside 0..{NUM_CHANNELS - 1}"
            )
    elif cmd.channel != BROADCAST:
        raise error(f"{opcode.name}: device-wide opcode requires channel 0xFF")
    lo, hi = PAYLOAD_RANGE[opcode]
    if not lo <= cmd.payload <= hi:
        raise error(
            f"{opcode.name}: payload {cmd.payload} outside {lo}..{hi}"
        )


def encode_frame(cmd: Command) -> bytes:
    """Render a command as its 6-byte wire image."""
    _check_command(cmd, EncodeError)
    body = bytes(
        (cmd.opcode, cmd.channel, (cmd.payload >> 8) & 0xFF, cmd.payload & 0xFF)
    )
    return bytes((SOF_COMMAND,)) + body + bytes((crc8(body),))


def decode_frame(buf: bytes) -> Command:
    """Decode one 6-byte command frame; total over arbitrary input.

    Checks run in order: SOF, length, CRC, opcode, channel/payload ranges.
    Each failure raises the matching FrameError subclass.
    """
    if len(buf) == 0 or buf[0] != SOF_COMMAND:
        raise BadSof(f"expected SOF 0x{SOF_COMMAND:02X}")
    if len(buf) != FRAME_LEN:
        raise Truncated(f"expected {FRAME_LEN}-byte frame, got {len(buf)}")
    body = bytes(buf[1:5])
    if crc8(body) != buf[5]:
        raise BadCrc(
            f"crc mismatch: computed 0x{crc8(body):02X}, frame has 0x{buf[5]:02X}"
        )
    try:
        opcode = Opcode(buf[1])
    except ValueError:
        raise BadOpcode(f"unknown opcode 0x{buf[1]:02X}") from None
    cmd = Command(opcode, buf[2], (buf[3] << 8) | buf[4])
    _check_command(cmd, RangeViolation)
    return cmd


@dataclass(frozen=True)
class Reply:
    status: ReplyStatus
    opcode_echo: int
    value: int = 0

    @property
    def ok(self) -> bool:
        return self.status == ReplyStatus.ACK


def ack(opcode: Opcode, value: int = 0) -> Reply:
    return Reply(ReplyStatus.ACK, int(opcode), value)


def nak(reason: ReplyStatus, opcode_echo: int = 0) -> Reply:
    return Reply(reason, opcode_echo, 0)


def encode_reply(reply: Reply) -> bytes:
    if not 0 <= reply.opcode_echo <= 0xFF:
        raise EncodeError(f"opcode echo {reply.opcode_echo} outside one byte")
    if not 0 <= reply.value <= 0xFFFF:
        raise EncodeError(f"reply value {reply.value} outside 16 bits")
    body = bytes(
        (
            int(reply.status),
            reply.opcode_echo,
            (reply.value >> 8) & 0xFF,
            reply.value & 0xFF,
        )
    )
    return bytes((SOF_REPLY,)) + body + bytes((crc8(body),))


def decode_reply(buf: bytes) -> Reply:
    if len(buf) == 0 or buf[0] != SOF_REPLY:
        raise BadSof(f"expected reply SOF 0x{SOF_REPLY:02X}")
    if len(buf) != FRAME_LEN:
        raise Truncated(f"expected {FRAME_LEN}-byte reply, got {len(buf)}")
    body = bytes(buf[1:5])
    if crc8(body) != buf[5]:
        raise BadCrc("reply crc mismatch")
    try:
        status = ReplyStatus(buf[1])
    except ValueError:
        raise BadOpcode(f"unknown reply status 0x{buf[1]:02X}") from None
    return Reply(status, buf[2], (buf[3] << 8) | buf[4])


@dataclass(frozen=True)
class ScanEvent:
    """One scanner outcome: a decoded command or a positioned decode error."""

    offset: int
    command: Command | None = None
    error: FrameError | None = None


class FrameScanner:
    """Resynchronizing reader extracting command frames from a byte stream.

    Bytes that are not a frame start are reported (one BadSof event per
    byte) and skipped. A corrupt frame-shaped region is reported once and
    the scanner re-locks by advancing a single byte.
    """

    def __init__(self):
        self._buf = bytearray()
        self._consumed = 0

    @property
    def pending(self) -> int:
        """Bytes held waiting for a complete frame."""
        return len(self._buf)

    def feed(self, data: bytes) -> list[ScanEvent]:
        self._buf.extend(data)
        events: list[ScanEvent] = []
        while self._buf:
            if self._buf[0] != SOF_COMMAND:
                events.append(
                    ScanEvent(self._consumed, error=BadSof("stream byte is not SOF"))
                )
                self._advance(1)
                continue
            if len(self._buf) < FRAME_LEN:
                break  # wait for the rest of the frame
            frame = bytes(self._buf[:FRAME_LEN])
            try:
                cmd = decode_frame(frame)
            except FrameError as exc:
                events.append(ScanEvent(self._consumed, error=exc))
                self._advance(1)
                continue
            events.append(ScanEvent(self._consumed, command=cmd))
            self._advance(FRAME_LEN)
        return events

    def _advance(self, n: int) -> None:
        del self._buf[:n]
        self._consumed += n
