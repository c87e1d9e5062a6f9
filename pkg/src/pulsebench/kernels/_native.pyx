# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the per-sample hot loops.

Mirrors _pyfallback exactly: same recurrences, same edge handling, so the
two backends are interchangeable (test_kernels pins the equivalence).
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef unsigned char _CRC8_TABLE[256]

cdef void _fill_crc8_table(unsigned char poly):
    cdef int byte, k
    cdef unsigned char crc
    for byte in range(256):
        crc = <unsigned char> byte
        for k in range(8):
            if crc & 0x80:
                crc = <unsigned char> ((crc << 1) ^ poly)
            else:
                crc = <unsigned char> (crc << 1)
        _CRC8_TABLE[byte] = crc

_fill_crc8_table(0x07)


def crc8(const unsigned char[::1] data) -> int:
    """CRC-8 (poly 0x07, init 0x00, no reflection, xor-out 0x00)."""
    cdef unsigned char crc = 0
    cdef Py_ssize_t i
    for i in range(data.shape[0]):
        crc = _CRC8_TABLE[crc ^ data[i]]
    return crc


def iir_lowpass(const double[::1] x, double alpha):
    """Single-pole low-pass: y[n] = alpha*y[n-1] + (1-alpha)*x[n], y[-1] = 0."""
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.empty(n, dtype=np.float64)
    cdef double acc = 0.0
    cdef double gain = 1.0 - alpha
    cdef Py_ssize_t i
    for i in range(n):
        acc = alpha * acc + gain * x[i]
        y[i] = acc
    return y


def fractional_shift(const double[::1] x, long n_int, double frac):
    """Shift right by n_int + frac samples; vacated samples are zero."""
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.zeros(n, dtype=np.float64)
    cdef Py_ssize_t k
    cdef Py_ssize_t j0, j1
    cdef double a = 1.0 - frac
    if frac == 0.0:
        for k in range(n):
            j0 = k - n_int
            if 0 <= j0 < n:
                y[k] = x[j0]
        return y
    for k in range(n):
        j0 = k - n_int      # weight (1 - frac)
        j1 = k - n_int - 1  # weight frac
        if 0 <= j0 < n:
            y[k] += a * x[j0]
        if 0 <= j1 < n:
            y[k] += frac * x[j1]
    return y
