"""Seizure detector: voltage-level detection, iterative signal rejection,
per-frame energy gate, and event extraction.

Per frame, the detector marks samples whose rectified amplitude lies
strictly inside the (v_min, v_max) window, then repeatedly strips pulses
that lack sustained predecessors (one first-stage pass, then follow-up
passes up to the configured iteration count). A frame fires when the
surviving pulse count and the frame's mean-square energy both reach
their thresholds; an event is declared at the first frame of every run
of at least ``consecutive_frames_n`` firing frames, with later events
suppressed for a refractory period.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from cseiz import kernels
from cseiz.errors import ConfigurationError, SequencingError
from cseiz.framing import Frame, samples_per_frame

DEFAULT_CHANNEL = "T7-P7"


@dataclass(frozen=True)
class DetectorConfig:
    """All detection parameters. Voltages in mV after amplification,
    energy in mV^2 (mean square per frame)."""

    v_min_mv: float = 210.0
    v_max_mv: float = 380.0
    t_f_ms: float = 500.0
    gain: float = 0.5
    sra_total_iters_n: int = 4
    sra_onset_stage_k: int = 2
    pulse_threshold: int = 12
    energy_threshold: float = 0.0
    consecutive_frames_n: int = 3
    refractory_s: float = 60.0

    def __post_init__(self):
        if not self.v_min_mv < self.v_max_mv:
            raise ConfigurationError(
                f"v_min {self.v_min_mv} must be < v_max {self.v_max_mv}")
        if self.t_f_ms <= 0:
            raise ConfigurationError("t_f_ms must be positive")
        if self.gain <= 0:
            raise ConfigurationError("gain must be positive")
        if self.sra_total_iters_n < 1:
            raise ConfigurationError("sra_total_iters_n must be >= 1")
        if not 0 <= self.sra_onset_stage_k < self.sra_total_iters_n:
            raise ConfigurationError(
                f"sra_onset_stage_k {self.sra_onset_stage_k} must be in "
                f"[0, {self.sra_total_iters_n})")
        if self.pulse_threshold < 1:
            raise ConfigurationError("pulse_threshold must be >= 1")
        if self.energy_threshold < 0:
            raise ConfigurationError("energy_threshold must be >= 0")
        if self.consecutive_frames_n < 1:
            raise ConfigurationError("consecutive_frames_n must be >= 1")
        if self.refractory_s < 0:
            raise ConfigurationError("refractory_s must be >= 0")

    def with_updates(self, **kw):
        return replace(self, **kw)


@dataclass(frozen=True)
class DetectionEvent:
    """Declared seizure onset: start of the first frame of the run."""

    time_s: float
    frame_index: int
    latency_s: Optional[float] = None


def _as_bits(bits):
    # pulse trains are strictly 0/1; normalize so the kernels can rely
    # on the binary domain
    arr = np.ascontiguousarray(np.asarray(bits))
    return (arr != 0).astype(np.uint8)


def apply_vld(frame, v_min_mv, v_max_mv):
    """Per-sample hyper-synchrony pulse train: 1 where the rectified
    amplitude lies strictly inside (v_min, v_max)."""
    if v_min_mv >= v_max_mv:
        raise ConfigurationError(
            f"v_min {v_min_mv} must be < v_max {v_max_mv}")
    samples = frame.samples if isinstance(frame, Frame) else frame
    x = np.ascontiguousarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ConfigurationError("frame must be nonempty")
    return kernels.vld_bits(x, v_min_mv, v_max_mv)


def sra_pass1(bits):
    """First rejection pass: a pulse survives only if its two
    predecessors are 1; missing history counts as 0."""
    return kernels.sra_pass1(_as_bits(bits))


def sra_pass2(bits):
    """Follow-up rejection pass: a pulse survives only if its immediate
    predecessor is 1; missing history counts as 0."""
    return kernels.sra_pass2(_as_bits(bits))


def sra_reduce(bits, n, k):
    """Run the full rejection schedule: pass 1 once, then pass 2 for the
    remaining iterations (no-ops past the fixed point).

    Returns ``(final, onset_stage)`` — the trains after iteration ``n``
    and after iteration ``n - k``.
    """
    if not 0 <= k < n:
        raise ConfigurationError(f"need 0 <= k < n, got n={n} k={k}")
    return kernels.sra_reduce(_as_bits(bits), n, n - k)


def frame_energy(frame):
    """Mean of squared samples (mV^2)."""
    samples = frame.samples if isinstance(frame, Frame) else frame
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ConfigurationError("frame must be nonempty")
    return float(np.mean(x * x))


def detect_frame(frame, cfg):
    """Single-frame verdict: 1 iff surviving pulse count and energy both
    reach their thresholds."""
    final, _ = sra_reduce(
        apply_vld(frame, cfg.v_min_mv, cfg.v_max_mv),
        cfg.sra_total_iters_n, cfg.sra_onset_stage_k,
    )
    if int(final.sum()) < cfg.pulse_threshold:
        return 0
    return 1 if frame_energy(frame) >= cfg.energy_threshold else 0


def frame_flags(v_mod, sample_rate_hz, cfg):
    """Vectorized per-frame verdicts over a whole V_mod signal.

    Equals ``detect_frame`` applied to each frame (tested); this is the
    batch path used for stream detection and calibration.
    """
    x = np.ascontiguousarray(v_mod, dtype=np.float64)
    spf = samples_per_frame(cfg.t_f_ms, sample_rate_hz)
    counts = kernels.frame_pulse_counts(
        x, spf, cfg.v_min_mv, cfg.v_max_mv, cfg.sra_total_iters_n)
    energies = kernels.frame_mean_square(x, spf)
    return ((counts >= cfg.pulse_threshold)
            & (energies >= cfg.energy_threshold)).astype(np.uint8)


def events_from_flags(flags, t_f_s, cfg, start_offset_s=0.0, index_offset=0):
    """Event extraction from per-frame verdicts.

    One event at the first frame of each maximal run of at least
    ``consecutive_frames_n`` firing frames; runs starting within the
    refractory window of the previous event are suppressed entirely.
    """
    events = []
    flags = np.asarray(flags)
    n = len(flags)
    i = 0
    last_time = None
    while i < n:
        if not flags[i]:
            i += 1
            continue
        j = i
        while j < n and flags[j]:
            j += 1
        if j - i >= cfg.consecutive_frames_n:
            t = start_offset_s + i * t_f_s
            if last_time is None or t - last_time >= cfg.refractory_s:
                events.append(DetectionEvent(time_s=t, frame_index=index_offset + i))
                last_time = t
        i = j
    return events


def detect_stream(frames_seq, cfg, sample_rate_hz=None):
    """Detect events over an ordered frame sequence.

    ``sample_rate_hz`` is only needed to recover the frame length when
    the sequence is empty.
    """
    frames_seq = list(frames_seq)
    if not frames_seq:
        return []
    prev = -1
    for f in frames_seq:
        if f.index <= prev:
            raise SequencingError(f"frame {f.index} out of order after {prev}")
        prev = f.index
    flags = [detect_frame(f, cfg) for f in frames_seq]
    t_f_s = (len(frames_seq[0].samples) / sample_rate_hz
             if sample_rate_hz else
             frames_seq[1].start_s - frames_seq[0].start_s
             if len(frames_seq) > 1 else cfg.t_f_ms / 1000.0)
    return events_from_flags(flags, t_f_s, cfg,
                             start_offset_s=frames_seq[0].start_s,
                             index_offset=frames_seq[0].index)


class StreamingDetector:
    """Incremental detector: frames in, events out, with carried run and
    refractory state. Equivalent to ``detect_stream`` frame for frame."""

    def __init__(self, cfg):
        self.cfg = cfg
        self._run_length = 0
        self._run_start = None  # (time_s, frame_index)
        self._declared_this_run = False
        self._last_event_time = None
        self._last_index = -1

    def push(self, frame):
        """Process one frame; returns a DetectionEvent or None."""
        if frame.index <= self._last_index:
            raise SequencingError(
                f"frame {frame.index} out of order after {self._last_index}")
        self._last_index = frame.index
        if not detect_frame(frame, self.cfg):
            self._run_length = 0
            self._run_start = None
            self._declared_this_run = False
            return None
        if self._run_length == 0:
            self._run_start = (frame.start_s, frame.index)
        self._run_length += 1
        if self._declared_this_run:
            return None
        if self._run_length < self.cfg.consecutive_frames_n:
            return None
        t, idx = self._run_start
        self._declared_this_run = True
        if (self._last_event_time is not None
                and t - self._last_event_time < self.cfg.refractory_s):
            return None  # run began inside the refractory window
        self._last_event_time = t
        return DetectionEvent(time_s=t, frame_index=idx)
