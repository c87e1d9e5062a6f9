"""Sampled voltage traces and their on-disk forms.

Two interchangeable file formats carry the same header (format tag,
sample_rate, t0, count) plus the samples:

  * CSV  - human readable, `time_s,volts` rows, values printed with repr()
           so floats survive the round trip bit-exactly;
  * WFM  - compact binary, little-endian float64 samples after a fixed
           little-endian header.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CSV_TAG = "pulsebench-waveform-csv-1"
BIN_MAGIC = b"PBWF\x01"
_BIN_HEADER = struct.Struct("<ddQ")  # sample_rate, t0, count


class WaveformFormatError(ValueError):
    """A waveform file does not match either format."""


@dataclass(frozen=True)
class Waveform:
    """Uniformly sampled voltage trace."""

    sample_rate: float
    t0: float
    samples: np.ndarray
    load_ohms: float | None = field(default=None, compare=False)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("samples must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must all be finite")
        samples = samples.copy()
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    def __eq__(self, other):
        if not isinstance(other, Waveform):
            return NotImplemented
        return (
            self.sample_rate == other.sample_rate
            and self.t0 == other.t0
            and np.array_equal(self.samples, other.samples)
        )

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self.samples)) / self.sample_rate


def dump_csv(w: Waveform) -> str:
    buf = io.StringIO()
    buf.write(f"# {CSV_TAG}\n")
    buf.write(f"# sample_rate={w.sample_rate!r} t0={w.t0!r} count={len(w)}\n")
    buf.write("time_s,volts\n")
    for t, v in zip(w.times().tolist(), w.samples.tolist()):
        buf.write(f"{t!r},{v!r}\n")
    return buf.getvalue()


def parse_csv(text: str) -> Waveform:
    lines = text.splitlines()
    if not lines or lines[0].strip() != f"# {CSV_TAG}":
        raise WaveformFormatError("missing waveform CSV tag line")
    if len(lines) < 3:
        raise WaveformFormatError("truncated waveform CSV header")
    meta = {}
    for token in lines[1].lstrip("# ").split():
        key, _, value = token.partition("=")
        meta[key] = value
    try:
        sample_rate = float(meta["sample_rate"])
        t0 = float(meta["t0"])
        count = int(meta["count"])
    except (KeyError, ValueError) as exc:
        raise WaveformFormatError(f"bad waveform CSV header: {exc}") from exc
    if lines[2].strip() != "time_s,volts":
        raise WaveformFormatError("missing time_s,volts column header")
    rows = [line for line in lines[3:] if line.strip()]
    if len(rows) != count:
        raise WaveformFormatError(
            f"sample count mismatch: header says {count}, found {len(rows)}"
        )
    samples = np.empty(count, dtype=np.float64)
    for i, row in enumerate(rows):
        try:
            _, volts = row.split(",")
            samples[i] = float(volts)
        except ValueError as exc:
            raise WaveformFormatError(f"bad CSV row {i + 4}: {row!r}") from exc
    return Waveform(sample_rate, t0, samples)


def dump_binary(w: Waveform) -> bytes:
    header = BIN_MAGIC + _BIN_HEADER.pack(w.sample_rate, w.t0, len(w))
    return header + w.samples.astype("<f8").tobytes()


def parse_binary(blob: bytes) -> Waveform:
    if not blob.startswith(BIN_MAGIC):
        raise WaveformFormatError("missing waveform binary magic")
    offset = len(BIN_MAGIC)
    if len(blob) < offset + _BIN_HEADER.size:
        raise WaveformFormatError("truncated waveform binary header")
    sample_rate, t0, count = _BIN_HEADER.unpack_from(blob, offset)
    body = blob[offset + _BIN_HEADER.size :]
    if len(body) != count * 8:
        raise WaveformFormatError(
            f"sample payload mismatch: header says {count} samples, "
            f"found {len(body)} bytes"
        )
    samples = np.frombuffer(body, dtype="<f8").astype(np.float64)
    return Waveform(sample_rate, t0, samples)


def save_waveform(w: Waveform, path: str | Path) -> None:
    """Write CSV for .csv paths, binary otherwise."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        path.write_text(dump_csv(w))
    else:
        path.write_bytes(dump_binary(w))


def load_waveform(path: str | Path) -> Waveform:
    """Load either format, sniffing by content."""
    blob = Path(path).read_bytes()
    if blob.startswith(BIN_MAGIC):
        return parse_binary(blob)
    try:
        return parse_csv(blob.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise WaveformFormatError("not a waveform file") from exc
