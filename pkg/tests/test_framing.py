import numpy as np
import pytest

from cseiz.errors import ConfigurationError
from cseiz.framing import frames, samples_per_frame


def test_one_hour_at_256_hz_gives_7200_frames_of_128():
    x = np.zeros(3600 * 256)
    fr = frames(x, 256.0, 500.0)
    assert len(fr) == 7200
    assert all(len(f.samples) == 128 for f in fr[:10])
    assert fr[1].start_s == pytest.approx(0.5)
    assert fr[-1].start_s == pytest.approx(3599.5)


def test_recording_shorter_than_one_frame_is_empty():
    assert frames(np.zeros(100), 256.0, 500.0) == []


def test_trailing_partial_frame_dropped():
    # 10.25 s at 256 Hz -> 2624 samples, 20 full frames, 64 dropped
    x = np.arange(int(10.25 * 256), dtype=float)
    fr = frames(x, 256.0, 500.0)
    assert len(fr) == 20
    assert fr[-1].samples[-1] == 20 * 128 - 1


def test_tiling_reproduces_prefix_exactly():
    rng = np.random.default_rng(7)
    x = rng.normal(size=1000)
    fr = frames(x, 256.0, 500.0)
    joined = np.concatenate([f.samples for f in fr])
    assert np.array_equal(joined, x[: len(joined)])


def test_frame_below_one_sample_rejected():
    with pytest.raises(ConfigurationError):
        samples_per_frame(1.0, 256.0)


def test_start_offset_applied():
    fr = frames(np.zeros(256), 256.0, 500.0, start_offset_s=10.0)
    assert fr[0].start_s == 10.0
    assert fr[1].start_s == 10.5
