"""Acceptance bench: scripted verification of an emulator over a transport.

Commands travel through whichever transport the session was built on
(loopback, TCP, stream); captures render on the emulator itself, exactly as
the hardware bench probes the real output with a scope while commands come
in over the serial link.

Every case is deterministic; the protocol fuzz uses a fixed seed.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass

import numpy as np

from .device import (
    AMPLITUDE_CODE_MAX,
    DELAY_CODE_SPAN,
    NUM_CHANNELS,
    amplitude_code_to_volts,
    delay_code_to_seconds,
    volts_to_amplitude_code,
)
from .emulator import Emulator
from .link_budget import (
    FiberChannel,
    FreeSpaceChannel,
    crossover_distance,
    fiber_loss_db,
    freespace_loss_db,
)
from .measure import CaptureConfig, MeasurementReport, build_report, measure_delay, measure_rise_time, measure_vpp
from .planner import (
    Intensity,
    ModulatorCalibration,
    intensity_transmission,
    plan_sequence,
    parse_symbols,
)
from .protocol import (
    BROADCAST,
    CHANNEL_SCOPED,
    FRAME_LEN,
    Command,
    FrameError,
    Opcode,
    PAYLOAD_RANGE,
    decode_frame,
    encode_frame,
)
from .signal_chain import ChainModel, PulseTiming, apply_output_stage, synthesize
from .transport import HostDriver, TransportError
from .waveform import Waveform

# Independently computed root of alpha*d = L0 + 20*log10(d/d_ref) for the
# reference parameters (alpha=0.2 dB/km, d_ref=1 km, L0=0).
REFERENCE_CROSSOVER_KM = 237.5812088
FUZZ_FRAMES = 100_000
FUZZ_SEED = 0x51C

SUITE_TIMING = PulseTiming(start=20e-9, width=40e-9)
DELAY_TIMING = PulseTiming(start=20e-9, width=10e-9)


@dataclass(frozen=True)
class SuiteCase:
    name: str
    passed: bool
    measured: str
    expected: str

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "measured": self.measured,
            "expected": self.expected,
        }


@dataclass(frozen=True)
class SuiteReport:
    cases: tuple[SuiteCase, ...]
    aborted: bool = False
    error: str | None = None

    @property
    def passed(self) -> bool:
        return not self.aborted and all(c.passed for c in self.cases)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "aborted": self.aborted,
            "error": self.error,
            "cases": [c.to_dict() for c in self.cases],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def format_table(self) -> str:
        lines = []
        width = max((len(c.name) for c in self.cases), default=10)
        for c in self.cases:
            mark = "PASS" if c.passed else "FAIL"
            lines.append(
                f"{mark}  {c.name:<{width}}  measured {c.measured}  "
                f"(expect {c.expected})"
            )
        if self.aborted:
            lines.append(f"ABORTED: {self.error}")
        verdict = "all criteria passed" if self.passed else "FAILURES PRESENT"
        lines.append(verdict)
        return "\n".join(lines)


class BenchSession:
    """Pairs an emulator (probe side) with a command transport (host side)."""

    def __init__(self, emulator: Emulator, driver: HostDriver):
        self.emulator = emulator
        self.driver = driver

    def capture_channel(
        self,
        wire_index: int,
        timing: PulseTiming | None = None,
        capture: CaptureConfig | None = None,
        reference: Waveform | None = None,
    ) -> tuple[Waveform, MeasurementReport]:
        w = self.emulator.capture(wire_index, timing, capture)
        return w, build_report(w, self.emulator.limits, reference)


def _case(name: str, passed: bool, measured: str, expected: str) -> SuiteCase:
    return SuiteCase(name, bool(passed), measured, expected)


def _amplitude_grid_case() -> SuiteCase:
    exact = all(
        amplitude_code_to_volts(c) == c * 0.05 for c in range(AMPLITUDE_CODE_MAX + 1)
    )
    roundtrip = all(
        volts_to_amplitude_code(amplitude_code_to_volts(c)) == c
        for c in range(AMPLITUDE_CODE_MAX + 1)
    )
    count = AMPLITUDE_CODE_MAX + 1
    return _case(
        "amplitude-grid",
        exact and roundtrip and count == 121,
        f"{count} codes, exact={exact}, roundtrip={roundtrip}",
        "121 exact codes, identity round-trip",
    )


def _delay_grid_case(session: BenchSession, capture: CaptureConfig) -> SuiteCase:
    wire = 0
    session.driver.set_channel(wire, AMPLITUDE_CODE_MAX, 0)
    session.driver.set_enable(wire, True)
    reference = session.emulator.capture(wire, DELAY_TIMING, capture)
    worst = 0.0
    tol = 25e-12
    ok = True
    for code in range(-DELAY_CODE_SPAN, DELAY_CODE_SPAN + 1, 10):
        session.driver.set_channel(wire, AMPLITUDE_CODE_MAX, code)
        trace = session.emulator.capture(wire, DELAY_TIMING, capture)
        err = abs(measure_delay(reference, trace) - delay_code_to_seconds(code))
        worst = max(worst, err)
        ok = ok and err <= tol
    session.driver.set_channel(wire, 0, 0)
    session.driver.set_enable(wire, False)
    return _case(
        "delay-grid",
        ok,
        f"worst crossing error {worst * 1e12:.2f} ps over 31 codes",
        "each 50% crossing within 25 ps of code x 100 ps",
    )


def _rise_time_case(session: BenchSession, capture: CaptureConfig) -> SuiteCase:
    wire = 0
    session.driver.set_channel(wire, AMPLITUDE_CODE_MAX, 0)
    session.driver.set_enable(wire, True)
    trace = session.emulator.capture(wire, SUITE_TIMING, capture)
    rise = measure_rise_time(trace)
    nominal = 1e-9
    ok_default = abs(rise - nominal) <= 0.02 * nominal

    settings = session.emulator.channel_settings(wire)
    control = synthesize(
        settings, SUITE_TIMING, ChainModel(tau=1e-9), capture
    )
    rise_control = measure_rise_time(control)
    analytic = 1e-9 * math.log(9.0)
    ok_control = abs(rise_control - analytic) <= 0.01 * analytic
    session.driver.set_channel(wire, 0, 0)
    session.driver.set_enable(wire, False)
    return _case(
        "rise-time",
        ok_default and ok_control,
        f"default {rise * 1e9:.4f} ns, tau=1ns control {rise_control * 1e9:.4f} ns",
        "1.00 ns +/-2% and 2.197 ns +/-1%",
    )


def _rail_limits_case(session: BenchSession, capture: CaptureConfig) -> SuiteCase:
    wire = 0
    session.driver.set_channel(wire, AMPLITUDE_CODE_MAX, 0)
    session.driver.set_enable(wire, True)
    trace = session.emulator.capture(wire, SUITE_TIMING, capture)
    peak = float(np.max(trace.samples))
    rail = session.emulator.chain.rail_peak
    plateau_ok = peak <= 6.0 and peak >= 5.9 and peak < rail

    synthetic = Waveform(capture.sample_rate, 0.0, np.full(64, 8.0))
    clamped = apply_output_stage(synthetic, session.emulator.chain)
    clamp_ok = float(np.max(clamped.samples)) == rail

    vpp_ok = measure_vpp(trace) <= session.emulator.limits.max_vpp_into_load
    session.driver.set_channel(wire, 0, 0)
    session.driver.set_enable(wire, False)
    return _case(
        "rail-limits",
        plateau_ok and clamp_ok and vpp_ok,
        f"6V plateau peak {peak:.4f} V, synthetic clamp "
        f"{float(np.max(clamped.samples)):.1f} V, vpp {measure_vpp(trace):.3f} V",
        f"plateau in [5.9, 6.0] V under {rail:.1f} V rail; clamp at "
        f"{rail:.1f} V; vpp <= {session.emulator.limits.max_vpp_into_load:.0f} V",
    )


def _protocol_case(fuzz_frames: int = FUZZ_FRAMES) -> SuiteCase:
    roundtrips = 0
    for opcode in Opcode:
        channels = range(NUM_CHANNELS) if opcode in CHANNEL_SCOPED else (BROADCAST,)
        lo, hi = PAYLOAD_RANGE[opcode]
        for channel in channels:
            for payload in sorted({lo, hi}):
                cmd = Command(opcode, channel, payload)
                if decode_frame(encode_frame(cmd)) != cmd:
                    return _case("protocol", False, f"round-trip failed: {cmd}", "")
                roundtrips += 1

    base = encode_frame(Command(Opcode.SET_AMPLITUDE, 3, AMPLITUDE_CODE_MAX))
    rejected = 0
    for bit in range(8 * FRAME_LEN):
        corrupted = bytearray(base)
        corrupted[bit // 8] ^= 1 << (bit % 8)
        try:
            decode_frame(bytes(corrupted))
        except FrameError:
            rejected += 1
    corruption_ok = rejected == 8 * FRAME_LEN

    rng = random.Random(FUZZ_SEED)
    crashes = 0
    for _ in range(fuzz_frames):
        blob = rng.randbytes(rng.randrange(0, 2 * FRAME_LEN + 1))
        try:
            decode_frame(blob)
        except FrameError:
            pass
        except Exception:  # anything else is a codec totality failure
            crashes += 1
    return _case(
        "protocol",
        corruption_ok and crashes == 0,
        f"{roundtrips} round-trips, {rejected}/48 corruptions rejected, "
        f"{crashes} crashes in {fuzz_frames} fuzz frames",
        "all round-trips, 48/48 rejections, 0 crashes",
    )


def _planner_case(session: BenchSession) -> SuiteCase:
    cal = ModulatorCalibration()
    symbols = parse_symbols(
        "signal,Z,0\nsignal,Z,1\nsignal,X,0\nsignal,X,1\n"
        "decoy,Z,0\ndecoy,X,1\nvacuum,Z,0\nvacuum,X,1\n"
    )
    plan, commands = plan_sequence(symbols, cal)

    mu = cal.intensity_targets[Intensity.SIGNAL]
    achieved = {}
    for intensity in Intensity:
        target = cal.intensity_targets[intensity] / mu
        code = None
        for slot in plan.slots:
            if slot.symbol.intensity == intensity:
                snap = slot.snapshot()
                code = snap[2][0]  # AD1 coarse attenuator
                break
        achieved[intensity] = intensity_transmission(
            min(code * 0.05, cal.v_pi), cal.v_pi
        )
    ordering_ok = (
        achieved[Intensity.VACUUM] == 0.0
        and achieved[Intensity.VACUUM] <= achieved[Intensity.DECOY]
        and achieved[Intensity.DECOY] < achieved[Intensity.SIGNAL]
    )
    bound = (math.pi / (2.0 * cal.v_pi)) * 0.05
    quant_ok = all(
        abs(achieved[i] - cal.intensity_targets[i] / mu) <= bound for i in Intensity
    )

    session.driver.replay(commands)
    state = session.emulator.state
    replay_ok = state.pattern == plan.wire_snapshots()
    return _case(
        "planner",
        ordering_ok and quant_ok and replay_ok,
        f"T(vac)={achieved[Intensity.VACUUM]:.4f} "
        f"T(decoy)={achieved[Intensity.DECOY]:.4f} "
        f"T(signal)={achieved[Intensity.SIGNAL]:.4f}, replay={replay_ok}",
        f"0 = T_vac <= T_decoy < T_signal, quant err <= {bound:.4f}, "
        "pattern reconstructed",
    )


def _channel_model_case() -> SuiteCase:
    fiber = FiberChannel(0.2)
    fs = FreeSpaceChannel(1.0, 0.0)
    contrast_ok = True
    for i in range(50):
        d = 1.0 + i * (500.0 - 1.0) / 49.0
        linear = abs(
            fiber_loss_db(2 * d, fiber)
            - fiber_loss_db(d, fiber)
            - fiber_loss_db(d, fiber)
        )
        log_step = freespace_loss_db(2 * d, fs) - freespace_loss_db(d, fs)
        contrast_ok = (
            contrast_ok
            and linear < 1e-9
            and abs(log_step - 20.0 * math.log10(2.0)) < 1e-9
        )
    d_star = crossover_distance(fiber, fs)
    cross_ok = abs(d_star - REFERENCE_CROSSOVER_KM) <= 1e-3
    return _case(
        "channel-model",
        contrast_ok and cross_ok,
        f"crossover {d_star:.4f} km",
        f"{REFERENCE_CROSSOVER_KM:.4f} km +/- 1 m; dB-contrast on 50 points",
    )


def run_acceptance_suite(
    session: BenchSession,
    capture: CaptureConfig | None = None,
    fuzz_frames: int = FUZZ_FRAMES,
) -> SuiteReport:
    """Run every acceptance criterion against the session's emulator."""
    capture = capture or CaptureConfig()
    cases: list[SuiteCase] = []
    plan = [
        lambda: _amplitude_grid_case(),
        lambda: _delay_grid_case(session, capture),
        lambda: _rise_time_case(session, capture),
        lambda: _rail_limits_case(session, capture),
        lambda: _protocol_case(fuzz_frames),
        lambda: _planner_case(session),
        lambda: _channel_model_case(),
    ]
    for step in plan:
        try:
            cases.append(step())
        except TransportError as exc:
            return SuiteReport(tuple(cases), aborted=True, error=str(exc))
    return SuiteReport(tuple(cases))
