"""Command-line bench frontend.

Subcommands: capture, measure, accept, plan, linkbudget, serve.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bench import BenchSession, run_acceptance_suite
from .device import CHANNEL_BY_LABEL
from .emulator import Emulator
from .link_budget import (
    FiberChannel,
    FreeSpaceChannel,
    NoCrossover,
    crossover_distance,
    loss_table,
)
from .measure import CaptureConfig, build_report
from .planner import (
    ModulatorCalibration,
    PlanError,
    format_plan,
    parse_symbols,
    plan_sequence,
)
from .signal_chain import PulseTiming
from .transport import FrameServer, HostDriver, LoopbackTransport, TcpTransport
from .waveform import load_waveform, save_waveform


def _channel_arg(value: str) -> int:
    if value.upper() in CHANNEL_BY_LABEL:
        return CHANNEL_BY_LABEL[value.upper()].wire_index
    try:
        wire = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown channel {value!r}") from None
    if not 0 <= wire <= 11:
        raise argparse.ArgumentTypeError("wire index must be 0..11")
    return wire


def _add_capture_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--channel", type=_channel_arg, default=0,
                   help="channel label (AC1) or wire index (default AC1)")
    p.add_argument("--amp", type=int, default=120, help="amplitude code 0..120")
    p.add_argument("--delay", type=int, default=0, help="delay code -150..150")
    p.add_argument("--start", type=float, default=20e-9,
                   help="pulse start in s (default 20 ns)")
    p.add_argument("--width", type=float, default=10e-9,
                   help="pulse width in s (default 10 ns)")
    p.add_argument("--sample-rate", type=float, default=40e9,
                   help="samples per second (default 40 GS/s)")
    p.add_argument("--window", type=float, default=100e-9,
                   help="capture window in s (default 100 ns)")


def cmd_capture(args: argparse.Namespace) -> int:
    emulator = Emulator()
    driver = HostDriver(LoopbackTransport(emulator))
    driver.set_channel(args.channel, args.amp, args.delay)
    driver.set_enable(args.channel, True)
    capture = CaptureConfig(sample_rate=args.sample_rate, window=args.window)
    timing = PulseTiming(args.start, args.width)
    waveform = emulator.capture(args.channel, timing, capture)
    report = build_report(waveform, emulator.limits)
    if args.output:
        save_waveform(waveform, args.output)
        print(f"wrote {len(waveform)} samples to {args.output}")
    print(json.dumps(report.to_dict(), indent=2))
    return 0


def cmd_measure(args: argparse.Namespace) -> int:
    waveform = load_waveform(args.waveform)
    reference = load_waveform(args.reference) if args.reference else None
    report = build_report(waveform, reference=reference)
    print(json.dumps(report.to_dict(), indent=2))
    return 0


def cmd_accept(args: argparse.Namespace) -> int:
    emulator = Emulator()
    if args.transport == "tcp":
        with FrameServer(emulator) as server:
            host, port = server.address
            driver = HostDriver(TcpTransport(host, port))
            report = run_acceptance_suite(
                BenchSession(emulator, driver), fuzz_frames=args.fuzz_frames
            )
            driver.close()
    else:
        driver = HostDriver(LoopbackTransport(emulator))
        report = run_acceptance_suite(
            BenchSession(emulator, driver), fuzz_frames=args.fuzz_frames
        )
    print(report.format_table())
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(report.to_json())
        print(f"wrote JSON report to {args.json}")
    return 0 if report.passed else 1


def cmd_plan(args: argparse.Namespace) -> int:
    with open(args.symbols) as fh:
        text = fh.read()
    try:
        symbols = parse_symbols(text)
        plan, commands = plan_sequence(symbols, ModulatorCalibration())
    except PlanError as exc:
        print(f"plan error: {exc}", file=sys.stderr)
        return 1
    rendered = format_plan(plan)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(rendered)
        print(f"wrote {len(plan.slots)} slots to {args.output}")
    else:
        print(rendered, end="")
    if args.replay:
        emulator = Emulator()
        driver = HostDriver(LoopbackTransport(emulator))
        driver.replay(commands)
        ok = (emulator.state.pattern or ()) == plan.wire_snapshots()
        print(f"replayed {len(commands)} commands; "
              f"pattern reconstructed: {ok}")
        return 0 if ok else 1
    return 0


def cmd_linkbudget(args: argparse.Namespace) -> int:
    fiber = FiberChannel(args.alpha)
    fs = FreeSpaceChannel(args.d_ref, args.loss_at_ref)
    rows = loss_table(fiber, fs, args.d_min, args.d_max, args.points)
    lines = ["distance_km,fiber_db,freespace_db"]
    lines += [f"{d!r},{f!r},{s!r}" for d, f, s in rows]
    try:
        d_star = crossover_distance(fiber, fs)
        crossover_note = f"# crossover_km={d_star!r}"
    except NoCrossover as exc:
        crossover_note = f"# no crossover: {exc}"
    lines.append(crossover_note)
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        print(f"wrote {len(rows)} rows to {args.output}")
        print(crossover_note)
    else:
        print(text, end="")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve_control_api

    serve_control_api(Emulator(), host=args.host, port=args.port,
                      console_dir=args.console)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pulsebench",
        description="Voltage pulse driver twin: emulator, planner, and bench",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capture", help="synthesize one channel and measure it")
    _add_capture_args(p)
    p.add_argument("-o", "--output", help="waveform file (.csv or binary .wfm)")
    p.set_defaults(fn=cmd_capture)

    p = sub.add_parser("measure", help="measure a stored waveform file")
    p.add_argument("waveform", help="input waveform (.csv or .wfm)")
    p.add_argument("--reference", help="reference waveform for delay readout")
    p.set_defaults(fn=cmd_measure)

    p = sub.add_parser("accept", help="run the acceptance suite")
    p.add_argument("--transport", choices=("loopback", "tcp"), default="loopback")
    p.add_argument("--json", help="write the machine-readable report here")
    p.add_argument("--fuzz-frames", type=int, default=100_000,
                   help="protocol fuzz iterations (default 100000)")
    p.set_defaults(fn=cmd_accept)

    p = sub.add_parser("plan", help="plan a QKD symbol file")
    p.add_argument("symbols", help="symbol file: one intensity,basis,bit per line")
    p.add_argument("-o", "--output", help="write the plan here instead of stdout")
    p.add_argument("--replay", action="store_true",
                   help="replay the command stream through an emulator and verify")
    p.set_defaults(fn=cmd_plan)

    p = sub.add_parser("linkbudget", help="fiber vs free-space loss table (CSV)")
    p.add_argument("--alpha", type=float, default=0.2, help="fiber dB/km")
    p.add_argument("--d-ref", type=float, default=1.0, help="free-space reference km")
    p.add_argument("--loss-at-ref", type=float, default=0.0,
                   help="free-space loss at the reference, dB")
    p.add_argument("--d-min", type=float, default=1.0)
    p.add_argument("--d-max", type=float, default=500.0)
    p.add_argument("--points", type=int, default=50)
    p.add_argument("-o", "--output", help="CSV output path")
    p.set_defaults(fn=cmd_linkbudget)

    p = sub.add_parser("serve", help="serve the control API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8780)
    p.add_argument("--console", metavar="DIR", default=None,
                   help="also serve the built operator console from DIR "
                        "(e.g. the repo's frontend/)")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
