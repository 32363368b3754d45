"""Numpy fallback for the hot signal-path kernels.

Mirrors the compiled extension in ``_kernels_c.pyx`` function for function.
The selector in :mod:`cseiz.kernels` picks whichever backend is available;
both must stay behaviourally identical (see tests/test_kernels.py).
"""

import numpy as np
from scipy import signal as _signal


def sos_filter(sos, x, zi=None):
    """Causal second-order-section cascade filter.

    Args:
        sos: (n_sections, 6) float64 coefficient array, a0 normalized to 1.
        x: 1-D float64 input samples.
        zi: optional (n_sections, 2) initial filter state; zeros if None.

    Returns:
        (y, zf): filtered samples and final state. Feeding a signal in
        chunks while carrying zf is exactly equivalent to one whole call.
    """
    sos = np.asarray(sos, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if zi is None:
        zi = np.zeros((sos.shape[0], 2), dtype=np.float64)
    y, zf = _signal.sosfilt(sos, x, zi=zi)
    return y, zf


def vld_bits(x, v_min, v_max):
    """Rectified voltage-window comparator: 1 where v_min < |x| < v_max."""
    ax = np.abs(np.asarray(x, dtype=np.float64))
    return ((ax > v_min) & (ax < v_max)).astype(np.uint8)


def sra_pass1(bits):
    """First rejection pass: zero any sample whose two predecessors are
    not both 1. Off-train history counts as 0, so out[0] = out[1] = 0."""
    b = np.asarray(bits, dtype=np.uint8)
    out = np.zeros_like(b)
    if b.shape[0] > 2:
        out[2:] = np.where((b[:-2] == 0) | (b[1:-1] == 0), 0, b[2:])
    return out


def sra_pass2(bits):
    """Follow-up rejection pass: zero any 1 whose predecessor is 0.
    Off-train history counts as 0, so out[0] is always 0."""
    b = np.asarray(bits, dtype=np.uint8)
    out = b.copy()
    if out.shape[0] > 0:
        out[0] = 0
    if out.shape[0] > 1:
        out[1:] = np.where((b[:-1] == 0) & (b[1:] == 1), 0, b[1:])
    return out


def sra_reduce(bits, n_iters, onset_iter):
    """Run the full rejection schedule on one pulse train.

    Iteration 1 is pass 1, iterations 2..n_iters are pass 2. Once the
    train stops changing, further iterations are no-ops. Returns the
    train after ``n_iters`` iterations and the snapshot at iteration
    ``onset_iter``.
    """
    cur = np.asarray(bits, dtype=np.uint8).copy()
    onset = cur.copy() if onset_iter == 0 else None
    fixed = False
    for it in range(1, n_iters + 1):
        if not fixed:
            nxt = sra_pass1(cur) if it == 1 else sra_pass2(cur)
            if it > 1 and np.array_equal(nxt, cur):
                fixed = True
            cur = nxt
        if it == onset_iter:
            onset = cur.copy()
    if onset is None:
        onset = cur.copy()
    return cur, onset


def frame_pulse_counts(v_mod, spf, v_min, v_max, n_iters):
    """Surviving pulse count per frame after VLD + full rejection.

    ``v_mod`` is sliced into consecutive frames of ``spf`` samples
    (trailing partial frame dropped); each frame is an independent train.
    """
    v = np.asarray(v_mod, dtype=np.float64)
    nframes = v.shape[0] // spf
    if nframes == 0:
        return np.zeros(0, dtype=np.int64)
    ax = np.abs(v[: nframes * spf].reshape(nframes, spf))
    b = ((ax > v_min) & (ax < v_max)).astype(np.uint8)
    # pass 1 across all frames at once
    out = np.zeros_like(b)
    if spf > 2:
        out[:, 2:] = np.where((b[:, :-2] == 0) | (b[:, 1:-1] == 0), 0, b[:, 2:])
    b = out
    for _ in range(max(0, n_iters - 1)):
        if not b.any():
            break
        nxt = b.copy()
        nxt[:, 0] = 0
        if spf > 1:
            nxt[:, 1:] = np.where((b[:, :-1] == 0) & (b[:, 1:] == 1), 0, b[:, 1:])
        if np.array_equal(nxt, b):
            break
        b = nxt
    return b.sum(axis=1).astype(np.int64)


def frame_mean_square(x, spf):
    """Mean of squared samples per frame (trailing partial frame dropped)."""
    v = np.asarray(x, dtype=np.float64)
    nframes = v.shape[0] // spf
    if nframes == 0:
        return np.zeros(0, dtype=np.float64)
    return (v[: nframes * spf].reshape(nframes, spf) ** 2).mean(axis=1)
