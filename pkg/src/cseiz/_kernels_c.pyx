# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled signal-path kernels: SOS filtering, voltage-window detection,
and the iterative pulse-rejection passes.

Behaviour must match the numpy fallback in ``_kernels_py.py`` exactly;
tests/test_kernels.py enforces parity on random inputs.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


def sos_filter(double[:, ::1] sos, double[::1] x, zi=None):
    """Causal second-order-section cascade (direct form II transposed).

    Returns (y, zf). Chunked calls carrying zf are bit-identical to one
    whole-signal call.
    """
    cdef Py_ssize_t nsec = sos.shape[0]
    cdef Py_ssize_t n = x.shape[0]
    if zi is None:
        zi = np.zeros((nsec, 2), dtype=np.float64)
    z_arr = np.array(zi, dtype=np.float64, copy=True)
    y_arr = np.empty(n, dtype=np.float64)
    cdef double[:, ::1] z = z_arr
    cdef double[::1] y = y_arr
    cdef Py_ssize_t i, s
    cdef double xn, yn
    for i in range(n):
        xn = x[i]
        for s in range(nsec):
            yn = sos[s, 0] * xn + z[s, 0]
            z[s, 0] = sos[s, 1] * xn - sos[s, 4] * yn + z[s, 1]
            z[s, 1] = sos[s, 2] * xn - sos[s, 5] * yn
            xn = yn
        y[i] = xn
    return y_arr, z_arr


def vld_bits(double[::1] x, double v_min, double v_max):
    """Rectified voltage-window comparator: 1 where v_min < |x| < v_max."""
    cdef Py_ssize_t n = x.shape[0]
    out_arr = np.empty(n, dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    cdef Py_ssize_t i
    cdef double a
    for i in range(n):
        a = fabs(x[i])
        out[i] = <unsigned char> ((a > v_min) & (a < v_max))
    return out_arr


cdef void _pass1(const unsigned char[::1] b, unsigned char[::1] out) noexcept nogil:
    # zero any sample whose two predecessors are not both 1; off-train
    # history counts as 0. On 0/1 trains the rule reduces to the
    # branchless form below (tests check it against the conditional
    # reference).
    cdef Py_ssize_t n = b.shape[0]
    cdef Py_ssize_t i
    if n > 0:
        out[0] = 0
    if n > 1:
        out[1] = 0
    for i in range(2, n):
        out[i] = b[i] & b[i - 1] & b[i - 2]


cdef bint _pass2(const unsigned char[::1] b, unsigned char[::1] out) noexcept nogil:
    # zero any 1 whose predecessor is 0; returns True when unchanged
    cdef Py_ssize_t n = b.shape[0]
    cdef Py_ssize_t i
    cdef unsigned char diff = 0
    if n > 0:
        out[0] = 0
        diff |= b[0]
    for i in range(1, n):
        out[i] = b[i] & b[i - 1]
        diff |= out[i] ^ b[i]
    return diff == 0


def sra_pass1(const unsigned char[::1] bits):
    """First rejection pass (out[0] = out[1] = 0 from zero history)."""
    out_arr = np.empty(bits.shape[0], dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    _pass1(bits, out)
    return out_arr


def sra_pass2(const unsigned char[::1] bits):
    """Follow-up rejection pass (out[0] always 0)."""
    out_arr = np.empty(bits.shape[0], dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    _pass2(bits, out)
    return out_arr


def sra_reduce(const unsigned char[::1] bits, int n_iters, int onset_iter):
    """Full rejection schedule on one train: pass 1 once, then pass 2.

    Iterations past the fixed point are no-ops. Returns (final, snapshot
    at iteration ``onset_iter``).
    """
    cdef Py_ssize_t n = bits.shape[0]
    cur_arr = np.array(bits, dtype=np.uint8, copy=True)
    nxt_arr = np.empty(n, dtype=np.uint8)
    cdef unsigned char[::1] cur = cur_arr
    cdef unsigned char[::1] nxt = nxt_arr
    cdef int it
    cdef bint fixed = False
    onset_arr = cur_arr.copy() if onset_iter == 0 else None
    for it in range(1, n_iters + 1):
        if not fixed:
            if it == 1:
                _pass1(cur, nxt)
            else:
                fixed = _pass2(cur, nxt)
            cur_arr, nxt_arr = nxt_arr, cur_arr
            cur = cur_arr
            nxt = nxt_arr
        if it == onset_iter:
            onset_arr = cur_arr.copy()
    if onset_arr is None:
        onset_arr = cur_arr.copy()
    return cur_arr, onset_arr


def frame_pulse_counts(double[::1] v_mod, int spf, double v_min, double v_max,
                       int n_iters):
    """Surviving pulse count per frame after VLD + full rejection.

    Frames are consecutive non-overlapping slices of ``spf`` samples;
    the trailing partial frame is dropped.
    """
    cdef Py_ssize_t nframes = v_mod.shape[0] // spf
    counts_arr = np.zeros(nframes, dtype=np.int64)
    cdef long long[::1] counts = counts_arr
    if nframes == 0:
        return counts_arr
    cur_arr = np.empty(spf, dtype=np.uint8)
    nxt_arr = np.empty(spf, dtype=np.uint8)
    cdef unsigned char[::1] cur = cur_arr
    cdef unsigned char[::1] nxt = nxt_arr
    cdef unsigned char[::1] tmp
    cdef Py_ssize_t f, j, base
    cdef int it
    cdef double a
    cdef long long total
    cdef bint fixed
    for f in range(nframes):
        base = f * spf
        for j in range(spf):
            a = fabs(v_mod[base + j])
            cur[j] = <unsigned char> ((a > v_min) & (a < v_max))
        _pass1(cur, nxt)
        tmp = cur
        cur = nxt
        nxt = tmp
        fixed = False
        for it in range(n_iters - 1):
            if fixed:
                break
            fixed = _pass2(cur, nxt)
            tmp = cur
            cur = nxt
            nxt = tmp
        total = 0
        for j in range(spf):
            total += cur[j]
        counts[f] = total
    return counts_arr


def frame_mean_square(double[::1] x, int spf):
    """Mean of squared samples per frame (trailing partial frame dropped)."""
    cdef Py_ssize_t nframes = x.shape[0] // spf
    out_arr = np.empty(nframes, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t f, j, base
    cdef double acc
    for f in range(nframes):
        base = f * spf
        acc = 0.0
        for j in range(spf):
            acc += x[base + j] * x[base + j]
        out[f] = acc / spf
    return out_arr
