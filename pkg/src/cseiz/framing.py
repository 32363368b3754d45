"""Fixed-length analysis frames over a sampled signal.

Frames tile the signal without overlap; a trailing partial frame is
dropped rather than padded, so no fabricated samples can reach the
detector.
"""

from dataclasses import dataclass

import numpy as np

from cseiz.errors import ConfigurationError


@dataclass
class Frame:
    """One analysis window. ``samples`` are in post-preprocessing
    millivolts when produced by the detection pipeline."""

    index: int
    start_s: float
    samples: np.ndarray


def samples_per_frame(t_f_ms, sample_rate_hz):
    """Samples per frame, rounded; must be at least 1."""
    spf = int(round(t_f_ms / 1000.0 * sample_rate_hz))
    if spf < 1:
        raise ConfigurationError(
            f"time frame {t_f_ms} ms yields no samples at {sample_rate_hz} Hz"
        )
    return spf


def frames(samples, sample_rate_hz, t_f_ms, start_offset_s=0.0):
    """Slice a sample sequence into consecutive non-overlapping frames.

    Returns a list of :class:`Frame`; shorter-than-one-frame input gives
    an empty list.
    """
    x = np.asarray(samples, dtype=np.float64)
    spf = samples_per_frame(t_f_ms, sample_rate_hz)
    n = x.shape[0] // spf
    # sample-accurate starts: i*spf/fs, not i*t_f (differs when t_f*fs
    # is not an integer)
    return [
        Frame(index=i, start_s=start_offset_s + (i * spf) / sample_rate_hz,
              samples=x[i * spf : (i + 1) * spf])
        for i in range(n)
    ]
