"""Plain-Python kernel implementations.

Used when the compiled extension is unavailable (or explicitly disabled via
PULSEBENCH_PURE_PYTHON=1). Semantics are bit-identical to the native module;
only throughput differs. See benchmarks/bench_kernels.py for the comparison.
"""

from __future__ import annotations

import numpy as np

_CRC8_POLY = 0x07

def _build_crc8_table(poly: int) -> list[int]:
    table = []
    for byte in range(256):
        crc = byte
        for _ in range(8):
            crc = ((crc << 1) ^ poly) & 0xFF if crc & 0x80 else (crc << 1) & 0xFF
        table.append(crc)
    return table

_CRC8_TABLE = _build_crc8_table(_CRC8_POLY)


def crc8(data: bytes) -> int:
    """CRC-8 (poly 0x07, init 0x00, no reflection, xor-out 0x00)."""
    crc = 0
    for byte in data:
        crc = _CRC8_TABLE[crc ^ byte]
    return crc


def iir_lowpass(x: np.ndarray, alpha: float) -> np.ndarray:
    """Single-pole low-pass: y[n] = alpha*y[n-1] + (1-alpha)*x[n], y[-1] = 0."""
    y = np.empty(len(x), dtype=np.float64)
    acc = 0.0
    gain = 1.0 - alpha
    for i, v in enumerate(x.tolist()):
        acc = alpha * acc + gain * v
        y[i] = acc
    return y


def fractional_shift(x: np.ndarray, n_int: int, frac: float) -> np.ndarray:
    """Shift right by n_int + frac samples; vacated samples are zero.

    y[k] = (1-frac)*x[k - n_int] + frac*x[k - n_int - 1], with out-of-window
    source samples treated as zero (nothing wraps around).
    """
    n = len(x)
    y = np.zeros(n, dtype=np.float64)

    def shifted(shift: int) -> np.ndarray:
        out = np.zeros(n, dtype=np.float64)
        if shift >= n or shift <= -n:
            return out
        if shift >= 0:
            out[shift:] = x[: n - shift]
        else:
            out[: n + shift] = x[-shift:]
        return out

    if frac == 0.0:
        return shifted(n_int)
    y = (1.0 - frac) * shifted(n_int) + frac * shifted(n_int + 1)
    return y
