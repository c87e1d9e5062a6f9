"""Hot numeric kernels with a compiled fast path.

The Cython extension is optional: if it is missing (or the environment sets
PULSEBENCH_PURE_PYTHON=1) the plain-Python implementations take over with
identical semantics.
"""

import os

from . import _pyfallback

if os.environ.get("PULSEBENCH_PURE_PYTHON") == "1":
    _impl = _pyfallback
    BACKEND = "python"
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        _impl = _pyfallback
        BACKEND = "python"

crc8 = _impl.crc8
iir_lowpass = _impl.iir_lowpass
fractional_shift = _impl.fractional_shift

__all__ = ["BACKEND", "crc8", "iir_lowpass", "fractional_shift"]
