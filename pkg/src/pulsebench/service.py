"""Control API exposing an emulator to operator consoles.

HTTP request/response for state reads, command submission, and captures,
plus a WebSocket event stream (`/events`) broadcasting state changes and
capture results to every subscriber in order. Message field names are
pinned by docs/control_api_schema.md.
"""

from __future__ import annotations

import asyncio
from typing import Union

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from pydantic import BaseModel, Field

from .device import CHANNEL_BY_LABEL, NUM_CHANNELS
from .emulator import Emulator
from .measure import CaptureConfig, build_report
from .planner import ModulatorCalibration, PlanError, parse_symbols, plan_sequence
from .protocol import Command, Opcode
from .signal_chain import DEFAULT_TIMING, PulseTiming


class CommandBody(BaseModel):
    opcode: Union[str, int]
    channel: Union[int, str, None] = None  # None = device-wide (0xFF)
    payload: int = Field(default=0, ge=0, le=0xFFFF)


class CaptureBody(BaseModel):
    channel: Union[int, str]
    start: float | None = None
    width: float | None = None
    sample_rate: float | None = None
    window: float | None = None
    include_samples: bool = True


class PlanBody(BaseModel):
    symbols: str  # one `intensity,basis,bit` per line


def _resolve_opcode(raw: Union[str, int]) -> Opcode:
    if isinstance(raw, int):
        try:
            return Opcode(raw)
        except ValueError:
            raise HTTPException(422, f"unknown opcode {raw}") from None
    name = raw.strip()
    for op in Opcode:
        if op.name == name.upper() or op.name.replace("_", "") == name.upper():
            return op
    raise HTTPException(422, f"unknown opcode {raw!r}")


def _resolve_channel(raw: Union[int, str, None]) -> int:
    if raw is None:
        return 0xFF
    if isinstance(raw, str):
        channel = CHANNEL_BY_LABEL.get(raw.upper())
        if channel is None:
            raise HTTPException(422, f"unknown channel label {raw!r}")
        return channel.wire_index
    if not (0 <= raw < NUM_CHANNELS or raw == 0xFF):
        raise HTTPException(422, f"channel {raw} outside 0..{NUM_CHANNELS - 1}")
    return raw


class EventBroker:
    """Fan-out of ordered events to WebSocket subscribers."""

    def __init__(self):
        self._queues: list[asyncio.Queue] = []
        self._seq = 0

    def subscribe(self) -> asyncio.Queue:
        q: asyncio.Queue = asyncio.Queue()
        self._queues.append(q)
        return q

    def unsubscribe(self, q: asyncio.Queue) -> None:
        if q in self._queues:
            self._queues.remove(q)

    def publish(self, event: dict) -> dict:
        self._seq += 1
        stamped = {"seq": self._seq, **event}
        for q in list(self._queues):
            q.put_nowait(stamped)
        return stamped


def create_app(
    emulator: Emulator | None = None, console_dir: str | None = None
) -> FastAPI:
    """API app; pass `console_dir` to also serve the operator console
    (the repository's frontend/ directory, built) from the same origin."""
    emulator = emulator or Emulator()
    app = FastAPI(title="pulsebench control API")
    broker = EventBroker()
    app.state.emulator = emulator
    app.state.broker = broker

    @app.get("/state")
    def get_state() -> dict:
        return emulator.describe()

    @app.get("/limits")
    def get_limits() -> dict:
        limits = emulator.limits
        chain = emulator.chain
        return {
            "volts_per_step": limits.volts_per_step,
            "max_volts": limits.max_volts,
            "delay_step_s": limits.delay_step_s,
            "delay_span_s": limits.delay_span_s,
            "nominal_rise_time_s": limits.nominal_rise_time_s,
            "rail_peak_volts": limits.rail_peak_volts,
            "load_ohms": limits.load_ohms,
            "max_vpp_into_load": limits.max_vpp_into_load,
            "tau_s": chain.tau,
        }

    @app.post("/command")
    def post_command(body: CommandBody) -> dict:
        opcode = _resolve_opcode(body.opcode)
        channel = _resolve_channel(body.channel)
        reply = emulator.submit(Command(opcode, channel, body.payload))
        result = {
            "status": "ack" if reply.ok else "nak",
            "reason": reply.status.name,
            "opcode_echo": reply.opcode_echo,
            "value": reply.value,
        }
        broker.publish(
            {
                "type": "state",
                "cause": {
                    "opcode": opcode.name,
                    "channel": channel,
                    "payload": body.payload,
                    "status": result["status"],
                },
                "state": emulator.describe(),
            }
        )
        return result

    @app.post("/capture")
    def post_capture(body: CaptureBody) -> dict:
        wire = _resolve_channel(body.channel)
        if wire == 0xFF:
            raise HTTPException(422, "capture requires a specific channel")
        timing = PulseTiming(
            start=body.start if body.start is not None else DEFAULT_TIMING.start,
            width=body.width if body.width is not None else DEFAULT_TIMING.width,
        )
        defaults = CaptureConfig()
        capture = CaptureConfig(
            sample_rate=body.sample_rate or defaults.sample_rate,
            window=body.window or defaults.window,
        )
        try:
            waveform = emulator.capture(wire, timing, capture)
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from exc
        report = build_report(waveform, emulator.limits)
        payload = {
            "channel": wire,
            "label": emulator.describe()["channels"][wire]["label"],
            "waveform": {
                "sample_rate": waveform.sample_rate,
                "t0": waveform.t0,
                "count": len(waveform),
                "samples": waveform.samples.tolist() if body.include_samples else None,
            },
            "report": report.to_dict(),
        }
        broker.publish({"type": "capture", **payload})
        return payload

    @app.post("/plan")
    def post_plan(body: PlanBody) -> dict:
        try:
            symbols = parse_symbols(body.symbols)
            plan, commands = plan_sequence(symbols, ModulatorCalibration())
        except PlanError as exc:
            raise HTTPException(422, str(exc)) from exc
        return {
            "slot_period": plan.slot_period,
            "slots": [
                {
                    "index": slot.index,
                    "symbol": slot.symbol.short(),
                    "firings": [
                        {
                            "label": f.channel.label,
                            "wire_index": f.channel.wire_index,
                            "amplitude": f.amplitude,
                            "delay": f.delay,
                            "start": f.start,
                            "width": f.width,
                        }
                        for f in slot.firings
                    ],
                }
                for slot in plan.slots
            ],
            "commands": [
                {
                    "opcode": Opcode(c.opcode).name,
                    "channel": None if c.channel == 0xFF else c.channel,
                    "payload": c.payload,
                }
                for c in commands
            ],
        }

    @app.websocket("/events")
    async def events(ws: WebSocket) -> None:
        await ws.accept()
        queue = broker.subscribe()
        try:
            await ws.send_json({"seq": 0, "type": "hello", "state": emulator.describe()})
            while True:
                event = await queue.get()
                await ws.send_json(event)
        except WebSocketDisconnect:
            pass
        finally:
            broker.unsubscribe(queue)

    if console_dir is not None:
        from fastapi.staticfiles import StaticFiles

        # Mounted last so the API routes above keep precedence.
        app.mount("/", StaticFiles(directory=console_dir, html=True),
                  name="console")

    return app


def serve_control_api(
    emulator: Emulator | None = None,
    host: str = "127.0.0.1",
    port: int = 8780,
    console_dir: str | None = None,
) -> None:
    """Blocking server entry point (used by the CLI `serve` subcommand)."""
    import uvicorn

    uvicorn.run(
        create_app(emulator, console_dir=console_dir),
        host=host,
        port=port,
        log_level="info",
    )
