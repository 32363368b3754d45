"""Kernel backend selection.

The hot inner loops (SOS filtering, voltage-window detection, pulse
rejection, per-frame energy) exist twice: a compiled Cython extension
and a numpy fallback. The extension is preferred when importable;
setting the environment variable ``CSEIZ_PURE_PYTHON=1`` forces the
fallback. ``benchmarks/bench_kernels.py`` compares the two.
"""

import os

from cseiz import _kernels_py

if os.environ.get("CSEIZ_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from cseiz import _kernels_c as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

sos_filter = _impl.sos_filter
vld_bits = _impl.vld_bits
sra_pass1 = _impl.sra_pass1
sra_pass2 = _impl.sra_pass2
sra_reduce = _impl.sra_reduce
frame_pulse_counts = _impl.frame_pulse_counts
frame_mean_square = _impl.frame_mean_square


def backend_name():
    """Name of the active kernel backend: 'compiled' or 'python'."""
    return BACKEND
