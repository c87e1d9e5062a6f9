"""Transports carrying command/reply frames, plus the host-side driver.

The codec is transport-agnostic: the same 6-byte frames run over an
in-process loopback, a TCP socket, or any file-like byte stream (which is
how a real serial port plugs in -- hand `StreamTransport` the open port).

The host driver retries each frame up to 3 times with a 100 ms reply
timeout per attempt.
"""

from __future__ import annotations

import socket
import socketserver
import threading

from .device import CHANNEL_BY_LABEL, ChannelId
from .emulator import Emulator
from .protocol import (
    BROADCAST,
    DELAY_OFFSET,
    FRAME_LEN,
    Command,
    FrameScanner,
    Opcode,
    Reply,
    ReplyStatus,
    decode_reply,
    encode_frame,
    encode_reply,
    nak,
    set_delay_command,
)

DEFAULT_TIMEOUT_S = 0.1
DEFAULT_RETRIES = 3


class TransportError(ConnectionError):
    """The transport failed to deliver a frame or a reply."""


class TransportTimeout(TransportError):
    """No reply arrived within the per-frame timeout."""


class CommandRejected(RuntimeError):
    """The device NAKed a command."""

    def __init__(self, step: str, status: ReplyStatus):
        super().__init__(f"{step} rejected: {status.name}")
        self.step = step
        self.status = status


class LoopbackTransport:
    """In-process transport applying frames directly to an emulator."""

    def __init__(self, emulator: Emulator):
        self._emulator = emulator

    def exchange(self, frame: bytes, timeout: float) -> bytes:
        return self._emulator.submit_frame(frame)

    def close(self) -> None:
        pass


class StreamTransport:
    """Transport over any file-like object with read(n)/write(bytes).

    Works unchanged over a pyserial port opened with a read timeout.
    """

    def __init__(self, stream):
        self._stream = stream

    def exchange(self, frame: bytes, timeout: float) -> bytes:
        self._stream.write(frame)
        if hasattr(self._stream, "flush"):
            self._stream.flush()
        reply = bytearray()
        while len(reply) < FRAME_LEN:
            chunk = self._stream.read(FRAME_LEN - len(reply))
            if not chunk:
                raise TransportTimeout("stream closed or timed out mid-reply")
            reply.extend(chunk)
        return bytes(reply)

    def close(self) -> None:
        if hasattr(self._stream, "close"):
            self._stream.close()


class TcpTransport:
    """Client side of the raw frame-over-TCP link."""

    def __init__(self, host: str, port: int, connect_timeout: float = 2.0):
        self._sock = socket.create_connection((host, port), timeout=connect_timeout)

    def exchange(self, frame: bytes, timeout: float) -> bytes:
        self._sock.settimeout(timeout)
        try:
            self._sock.sendall(frame)
            reply = bytearray()
            while len(reply) < FRAME_LEN:
                chunk = self._sock.recv(FRAME_LEN - len(reply))
                if not chunk:
                    raise TransportError("connection closed mid-reply")
                reply.extend(chunk)
        except socket.timeout as exc:
            raise TransportTimeout("no reply within timeout") from exc
        except OSError as exc:
            raise TransportError(str(exc)) from exc
        return bytes(reply)

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass


class _FrameHandler(socketserver.BaseRequestHandler):
    def handle(self):
        scanner = FrameScanner()
        emulator: Emulator = self.server.emulator  # type: ignore[attr-defined]
        while True:
            try:
                data = self.request.recv(4096)
            except OSError:
                return
            if not data:
                return
            for event in scanner.feed(data):
                if event.command is not None:
                    reply = emulator.submit(event.command)
                    self.request.sendall(encode_reply(reply))
                elif event.error is not None and event.error.status.value >= 3:
                    # Frame-shaped garbage (bad CRC/opcode/range) earns a NAK;
                    # stray non-SOF bytes are dropped silently during resync.
                    self.request.sendall(
                        encode_reply(nak(event.error.status))
                    )


class FrameServer:
    """Threaded TCP server exposing an emulator over raw frames."""

    def __init__(self, emulator: Emulator, host: str = "127.0.0.1", port: int = 0):
        self._server = socketserver.ThreadingTCPServer(
            (host, port), _FrameHandler, bind_and_activate=True
        )
        self._server.daemon_threads = True
        self._server.emulator = emulator  # type: ignore[attr-defined]
        self._thread = threading.Thread(
            target=self._server.serve_forever, name="pulsebench-frames", daemon=True
        )
        self._thread.start()

    @property
    def address(self) -> tuple[str, int]:
        return self._server.server_address[:2]

    def close(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self) -> "FrameServer":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def _wire_index(channel: int | str | ChannelId) -> int:
    if isinstance(channel, ChannelId):
        return channel.wire_index
    if isinstance(channel, str):
        return CHANNEL_BY_LABEL[channel].wire_index
    return channel


class HostDriver:
    """Host-side command issuer with retry and NAK surfacing.

    May be shared across threads; frame exchanges are serialized so replies
    cannot interleave on the wire.
    """

    def __init__(
        self,
        transport,
        timeout: float = DEFAULT_TIMEOUT_S,
        retries: int = DEFAULT_RETRIES,
    ):
        self._transport = transport
        self._timeout = timeout
        self._retries = retries
        self._lock = threading.Lock()

    def close(self) -> None:
        self._transport.close()

    def send(self, cmd: Command) -> Reply:
        """Send one command, retrying on timeout; returns the decoded reply."""
        frame = encode_frame(cmd)
        last_exc: TransportError | None = None
        with self._lock:
            for _ in range(self._retries):
                try:
                    raw = self._transport.exchange(frame, self._timeout)
                    return decode_reply(raw)
                except TransportTimeout as exc:
                    last_exc = exc
        raise TransportTimeout(
            f"no reply after {self._retries} attempts "
            f"({self._timeout * 1e3:.0f} ms each)"
        ) from last_exc

    def _expect_ack(self, cmd: Command, step: str) -> Reply:
        reply = self.send(cmd)
        if not reply.ok:
            raise CommandRejected(step, reply.status)
        return reply

    def set_channel(
        self, channel: int | str | ChannelId, amplitude: int, delay: int
    ) -> tuple[Reply, Reply]:
        """Program amplitude then delay; reports which step failed."""
        wire = _wire_index(channel)
        first = self._expect_ack(
            Command(Opcode.SET_AMPLITUDE, wire, amplitude), "SET_AMPLITUDE"
        )
        second = self._expect_ack(set_delay_command(wire, delay), "SET_DELAY")
        return first, second

    def set_enable(self, channel: int | str | ChannelId, enabled: bool) -> Reply:
        return self._expect_ack(
            Command(Opcode.SET_ENABLE, _wire_index(channel), int(enabled)),
            "SET_ENABLE",
        )

    def get_channel(self, channel: int | str | ChannelId) -> tuple[int, int]:
        """Read back (amplitude code, signed delay code)."""
        wire = _wire_index(channel)
        amp = self._expect_ack(
            Command(Opcode.GET_AMPLITUDE, wire), "GET_AMPLITUDE"
        ).value
        delay = self._expect_ack(Command(Opcode.GET_DELAY, wire), "GET_DELAY").value
        return amp, delay - DELAY_OFFSET

    def get_status(self) -> int:
        return self._expect_ack(
            Command(Opcode.GET_STATUS, BROADCAST), "GET_STATUS"
        ).value

    def arm(self) -> bool:
        return bool(self._expect_ack(Command(Opcode.ARM, BROADCAST), "ARM").value)

    def replay(self, commands: list[Command]) -> list[Reply]:
        """Send a command list in order, requiring an ACK for each."""
        return [
            self._expect_ack(cmd, f"{Opcode(cmd.opcode).name}[{i}]")
            for i, cmd in enumerate(commands)
        ]


def host_set_channel(
    driver: HostDriver, channel: int | str | ChannelId, amplitude: int, delay: int
) -> tuple[Reply, Reply]:
    """Convenience wrapper: program one channel's amplitude and delay."""
    return driver.set_channel(channel, amplitude, delay)
