import numpy as np
import pytest

from cseiz.errors import ConfigurationError
from cseiz.preprocess import (BandpassFilter, amplify, bandpass,
                              bandpass_response, preprocess_channel)

FS = 256.0


def sine(freq, seconds=30.0, fs=FS, amp=1.0):
    t = np.arange(int(seconds * fs)) / fs
    return amp * np.sin(2 * np.pi * freq * t)


def steady_amp(y, fs=FS):
    return float(np.max(np.abs(y[int(20 * fs):])))


def test_10_hz_passband_amplitude_preserved():
    y = bandpass(sine(10.0), FS)
    assert 0.8 <= steady_amp(y) <= 1.2


def test_dc_input_decays_toward_zero():
    y = bandpass(np.ones(int(30 * FS)), FS)
    assert abs(y[-1]) < 1e-3
    assert steady_amp(y) < 0.02


def test_60_hz_attenuated_to_designed_figure():
    # designed response of the 4th-order 3-29 Hz band-pass at 60 Hz:
    # |H| = 0.1398, comfortably below the 25% bound
    assert bandpass_response(3.0, 29.0, FS, 60.0) == pytest.approx(0.1398,
                                                                   abs=5e-4)
    y = bandpass(sine(60.0), FS)
    assert steady_amp(y) <= 0.25
    assert steady_amp(y) == pytest.approx(0.1398, abs=0.01)


def test_selectivity_1_and_60_hz_below_10_hz():
    a10 = steady_amp(bandpass(sine(10.0), FS))
    assert steady_amp(bandpass(sine(1.0), FS)) < a10
    assert steady_amp(bandpass(sine(60.0), FS)) < a10


def test_linearity_within_1e9_relative():
    rng = np.random.default_rng(3)
    x = rng.normal(size=4096)
    y = rng.normal(size=4096)
    a, b = 2.5, -1.25
    lhs = bandpass(a * x + b * y, FS)
    rhs = a * bandpass(x, FS) + b * bandpass(y, FS)
    scale = np.max(np.abs(lhs))
    assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-12 * scale)


def test_band_edges_validated():
    with pytest.raises(ConfigurationError):
        bandpass(np.zeros(10), FS, lo_hz=29.0, hi_hz=3.0)
    with pytest.raises(ConfigurationError):
        bandpass(np.zeros(10), FS, lo_hz=3.0, hi_hz=200.0)


def test_chunked_filtering_is_bit_identical_to_whole():
    rng = np.random.default_rng(11)
    x = rng.normal(size=1000)
    whole = bandpass(x, FS)
    f = BandpassFilter(FS)
    chunked = np.concatenate([f.process(x[:100]), f.process(x[100:512]),
                              f.process(x[512:])])
    assert np.array_equal(whole, chunked)


def test_amplify_scales_and_converts_units():
    out = amplify(np.array([1.0, -2.0, 3.0]), 2.0, FS)
    assert np.array_equal(out.samples, [2.0, -4.0, 6.0])
    assert out.gain == 2.0


def test_amplify_gain_one_on_zero_signal():
    out = amplify(np.zeros(16), 1.0, FS)
    assert not out.samples.any()


def test_amplify_exact_pointwise_ratio_two():
    rng = np.random.default_rng(5)
    x = rng.normal(size=64)
    g1 = amplify(x, 1.0, FS).samples
    g2 = amplify(x, 2.0, FS).samples
    assert np.array_equal(g2, 2.0 * g1)


def test_amplify_preserves_argmax_of_abs():
    rng = np.random.default_rng(9)
    x = rng.normal(size=128)
    assert (np.argmax(np.abs(amplify(x, 3.7, FS).samples))
            == np.argmax(np.abs(x)))


def test_amplify_rejects_non_positive_gain():
    with pytest.raises(ConfigurationError):
        amplify(np.zeros(4), 0.0, FS)
    with pytest.raises(ConfigurationError):
        amplify(np.zeros(4), -1.0, FS)


def test_preprocess_channel_composes_filter_and_gain():
    x = sine(10.0, seconds=4.0, amp=100.0)
    out = preprocess_channel(x, FS, gain=0.5)
    ref = 0.5 * bandpass(x, FS)
    assert np.array_equal(out.samples, ref)
    assert out.band_lo_hz == 3.0 and out.band_hi_hz == 29.0
