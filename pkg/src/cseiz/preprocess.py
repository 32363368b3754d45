"""Detection front end: band-pass filter and adjustable-gain amplifier.

The filter is a causal 4th-order recursive band-pass (two second-order
sections, Butterworth design) with unity passband gain. The amplifier
scales corpus microvolts by a configurable gain; the result is treated
as detector millivolts (V_mod).
"""

from dataclasses import dataclass

import numpy as np
from scipy import signal as _signal

from cseiz import kernels
from cseiz.errors import ConfigurationError

DEFAULT_BAND_LO_HZ = 3.0
DEFAULT_BAND_HI_HZ = 29.0


@dataclass
class FilteredSignal:
    """Band-passed, amplified signal in millivolts (V_mod)."""

    samples: np.ndarray
    sample_rate_hz: float
    band_lo_hz: float
    band_hi_hz: float
    gain: float

    def __post_init__(self):
        if not 0 < self.band_lo_hz < self.band_hi_hz < self.sample_rate_hz / 2:
            raise ConfigurationError(
                f"band [{self.band_lo_hz}, {self.band_hi_hz}] Hz invalid for "
                f"sample rate {self.sample_rate_hz} Hz"
            )


def design_bandpass(lo_hz, hi_hz, sample_rate_hz):
    """Second-order-section coefficients for the causal band-pass."""
    if not 0 < lo_hz < hi_hz < sample_rate_hz / 2:
        raise ConfigurationError(
            f"band edges must satisfy 0 < {lo_hz} < {hi_hz} < "
            f"{sample_rate_hz / 2} (Nyquist)"
        )
    return _signal.butter(2, [lo_hz, hi_hz], btype="bandpass",
                          fs=sample_rate_hz, output="sos")


def bandpass_response(lo_hz, hi_hz, sample_rate_hz, at_hz):
    """Magnitude of the designed filter at one frequency (analysis aid)."""
    sos = design_bandpass(lo_hz, hi_hz, sample_rate_hz)
    _, h = _signal.sosfreqz(sos, worN=[2 * np.pi * at_hz / sample_rate_hz])
    return float(np.abs(h[0]))


class BandpassFilter:
    """Streaming causal band-pass filter with carried state.

    Feeding a signal chunk by chunk yields bit-identical output to a
    single whole-signal call; state resets only at recording boundaries.
    """

    def __init__(self, sample_rate_hz, lo_hz=DEFAULT_BAND_LO_HZ,
                 hi_hz=DEFAULT_BAND_HI_HZ):
        self.sos = design_bandpass(lo_hz, hi_hz, sample_rate_hz)
        self.sample_rate_hz = sample_rate_hz
        self.lo_hz = lo_hz
        self.hi_hz = hi_hz
        self._state = np.zeros((self.sos.shape[0], 2))

    def reset(self):
        self._state = np.zeros((self.sos.shape[0], 2))

    def process(self, chunk):
        chunk = np.ascontiguousarray(chunk, dtype=np.float64)
        y, self._state = kernels.sos_filter(self.sos, chunk, self._state)
        return y


def bandpass(samples, sample_rate_hz, lo_hz=DEFAULT_BAND_LO_HZ,
             hi_hz=DEFAULT_BAND_HI_HZ):
    """One-shot causal band-pass, starting from rest."""
    return BandpassFilter(sample_rate_hz, lo_hz, hi_hz).process(samples)


def amplify(samples_uv, gain, sample_rate_hz, band_lo_hz=DEFAULT_BAND_LO_HZ,
            band_hi_hz=DEFAULT_BAND_HI_HZ):
    """Scale band-passed microvolt samples by ``gain``; the result is the
    detector's millivolt signal V_mod."""
    if gain <= 0:
        raise ConfigurationError(f"gain must be positive, got {gain}")
    return FilteredSignal(
        samples=np.asarray(samples_uv, dtype=np.float64) * gain,
        sample_rate_hz=sample_rate_hz,
        band_lo_hz=band_lo_hz,
        band_hi_hz=band_hi_hz,
        gain=gain,
    )


def preprocess_channel(samples_uv, sample_rate_hz, gain,
                       lo_hz=DEFAULT_BAND_LO_HZ, hi_hz=DEFAULT_BAND_HI_HZ):
    """Full front end: band-pass then amplify, microvolts in, V_mod out."""
    filtered = bandpass(samples_uv, sample_rate_hz, lo_hz, hi_hz)
    return amplify(filtered, gain, sample_rate_hz, lo_hz, hi_hz)
