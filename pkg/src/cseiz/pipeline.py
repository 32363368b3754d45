"""End-to-end detection over recordings: front end + detector + scoring."""

from dataclasses import dataclass, field

import numpy as np

from cseiz import preprocess
from cseiz.detector import events_from_flags, frame_flags
from cseiz.framing import samples_per_frame
from cseiz.metrics import DEFAULT_GRACE_S, Metrics, evaluate


@dataclass
class LabeledRecording:
    """One channel of one recording plus its seizure annotations."""

    record_id: str
    samples_uv: np.ndarray
    sample_rate_hz: float
    annotations: list = field(default_factory=list)


def frame_seconds(cfg, sample_rate_hz):
    """Exact frame duration in seconds (samples per frame / rate)."""
    return samples_per_frame(cfg.t_f_ms, sample_rate_hz) / sample_rate_hz


def run_detection(samples_uv, sample_rate_hz, cfg,
                  lo_hz=preprocess.DEFAULT_BAND_LO_HZ,
                  hi_hz=preprocess.DEFAULT_BAND_HI_HZ):
    """Microvolt channel in, (events, per-frame verdicts) out."""
    v_mod = preprocess.preprocess_channel(
        samples_uv, sample_rate_hz, cfg.gain, lo_hz, hi_hz)
    flags = frame_flags(v_mod.samples, sample_rate_hz, cfg)
    events = events_from_flags(flags, frame_seconds(cfg, sample_rate_hz), cfg)
    return events, flags


def evaluate_recordings(recordings, cfg, grace_s=DEFAULT_GRACE_S,
                        lo_hz=preprocess.DEFAULT_BAND_LO_HZ,
                        hi_hz=preprocess.DEFAULT_BAND_HI_HZ):
    """Detect over several recordings and pool the metrics."""
    total = Metrics()
    for rec in recordings:
        events, flags = run_detection(
            rec.samples_uv, rec.sample_rate_hz, cfg, lo_hz, hi_hz)
        total.merge(evaluate(events, rec.annotations, flags,
                             frame_seconds(cfg, rec.sample_rate_hz),
                             grace_s=grace_s))
    return total
