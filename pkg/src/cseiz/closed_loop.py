"""Closed-loop orchestration: stream EEG through the detection front end
and trigger a pump dose on every declared seizure onset.

Two equivalent execution paths are provided: ``run`` processes a whole
recording in one batch, ``step`` consumes preprocessed frames one at a
time with carried state. Folding ``step`` over ``iter_frames`` must
reproduce ``run`` exactly (byte-identical traces); the simulation clock
is the recording timeline, never the wall clock.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from cseiz import micropump, preprocess
from cseiz.detector import (DEFAULT_CHANNEL, DetectorConfig,
                            StreamingDetector, events_from_flags, frame_flags)
from cseiz.errors import ConfigurationError
from cseiz.framing import Frame, samples_per_frame
from cseiz.micropump import PumpDrive, PumpGeometry


@dataclass(frozen=True)
class LoopConfig:
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    pump_geometry: PumpGeometry = field(default_factory=PumpGeometry)
    pump_drive: PumpDrive = field(default_factory=PumpDrive)
    dose_duration_s: float = 10.0
    initial_reservoir_ml: float = None  # defaults to reservoir capacity
    channel: str = DEFAULT_CHANNEL
    band_lo_hz: float = preprocess.DEFAULT_BAND_LO_HZ
    band_hi_hz: float = preprocess.DEFAULT_BAND_HI_HZ

    def __post_init__(self):
        if self.dose_duration_s <= 0:
            raise ConfigurationError("dose_duration_s must be positive")
        if (self.initial_reservoir_ml is not None
                and self.initial_reservoir_ml <= 0):
            raise ConfigurationError("initial_reservoir_ml must be positive")

    @property
    def reservoir_ml(self):
        return (self.initial_reservoir_ml
                if self.initial_reservoir_ml is not None
                else self.pump_geometry.reservoir_capacity_ml)


@dataclass
class LoopTrace:
    detection_events: list = field(default_factory=list)
    dose_events: list = field(default_factory=list)
    frames_processed: int = 0

    def to_jsonl(self):
        """Canonical line-delimited serialization (stable key order)."""
        lines = []
        for e in self.detection_events:
            lines.append(json.dumps(
                {"kind": "detection", "time_s": e.time_s,
                 "frame_index": e.frame_index, "latency_s": e.latency_s},
                sort_keys=True))
        for d in self.dose_events:
            lines.append(json.dumps(
                {"kind": "dose", "time_s": d.time_s,
                 "duration_s": d.duration_s, "volume_ml": d.volume_ml,
                 "reservoir_remaining_ml": d.reservoir_remaining_ml,
                 "reservoir_empty": d.reservoir_empty},
                sort_keys=True))
        lines.append(json.dumps(
            {"kind": "end", "frames_processed": self.frames_processed},
            sort_keys=True))
        return "\n".join(lines) + "\n"


class ClosedLoop:
    """Stateful device simulation for one recording.

    ``prescription_source``, when given, is polled before each dose and
    may override the configured dose duration (latest prescription wins,
    mirroring the physician feedback path of the telemetry service).
    ``telemetry`` receives detection/dose records when attached.
    """

    def __init__(self, cfg, prescription_source=None, telemetry=None,
                 telemetry_frame_stride=0):
        self.cfg = cfg
        self.detector = StreamingDetector(cfg.detector)
        self.reservoir_ml = cfg.reservoir_ml
        self.trace = LoopTrace()
        self.prescription_source = prescription_source
        self.telemetry = telemetry
        self.telemetry_frame_stride = telemetry_frame_stride
        self._spf = None

    def _dose_duration(self):
        if self.prescription_source is not None:
            p = self.prescription_source()
            if p is not None:
                return p.dose_duration_s
        return self.cfg.dose_duration_s

    def _deliver(self, event):
        d = micropump.dose(
            self.cfg.pump_geometry, self.cfg.pump_drive,
            self._dose_duration(), self.reservoir_ml, time_s=event.time_s)
        self.reservoir_ml = d.reservoir_remaining_ml
        self.trace.dose_events.append(d)
        return d

    def step(self, frame):
        """Feed one preprocessed frame; returns (detection, dose), either
        possibly None. Frames must arrive in order."""
        event = self.detector.push(frame)
        self.trace.frames_processed += 1
        dose_event = None
        if event is not None:
            self.trace.detection_events.append(event)
            dose_event = self._deliver(event)
        self._emit_telemetry(frame, event, dose_event)
        return event, dose_event

    def _emit_telemetry(self, frame, event, dose_event):
        if self.telemetry is None:
            return
        from cseiz.service import ChannelRecord  # avoid import cycle

        if (self.telemetry_frame_stride
                and frame.index % self.telemetry_frame_stride == 0):
            self.telemetry.ingest_record(ChannelRecord(
                timestamp=frame.start_s, kind="frame_summary",
                payload={"frame_index": frame.index,
                         "energy_mv2": float(np.mean(frame.samples ** 2))}))
        if event is not None:
            self.telemetry.ingest_record(ChannelRecord(
                timestamp=event.time_s, kind="detection",
                payload={"time_s": event.time_s,
                         "frame_index": event.frame_index}))
        if dose_event is not None:
            self.telemetry.ingest_record(ChannelRecord(
                timestamp=dose_event.time_s, kind="dose",
                payload={"time_s": dose_event.time_s,
                         "duration_s": dose_event.duration_s,
                         "volume_ml": dose_event.volume_ml,
                         "reservoir_remaining_ml":
                             dose_event.reservoir_remaining_ml,
                         "reservoir_empty": dose_event.reservoir_empty}))

    def iter_frames(self, recording):
        """Preprocess a recording incrementally into detector frames.

        The band-pass state is carried across frames (it resets only at
        recording boundaries), so chunked filtering is bit-identical to
        whole-signal filtering.
        """
        raw = recording.channel(self.cfg.channel)
        fs = recording.sample_rate_hz
        spf = samples_per_frame(self.cfg.detector.t_f_ms, fs)
        self._spf = spf
        bp = preprocess.BandpassFilter(fs, self.cfg.band_lo_hz,
                                       self.cfg.band_hi_hz)
        gain = self.cfg.detector.gain
        n = raw.shape[0] // spf
        for i in range(n):
            chunk = bp.process(raw[i * spf : (i + 1) * spf])
            yield Frame(index=i,
                        start_s=recording.start_offset_s + (i * spf) / fs,
                        samples=chunk * gain)


def run(recording, cfg, prescription_source=None, telemetry=None):
    """Batch path: whole-recording detection, one dose per detection.

    Telemetry, when attached, receives one detection and one dose record
    per event (frame summaries are a streaming-path feature).
    """
    raw = recording.channel(cfg.channel)
    fs = recording.sample_rate_hz
    v_mod = preprocess.preprocess_channel(
        raw, fs, cfg.detector.gain, cfg.band_lo_hz, cfg.band_hi_hz)
    flags = frame_flags(v_mod.samples, fs, cfg.detector)
    spf = samples_per_frame(cfg.detector.t_f_ms, fs)
    events = events_from_flags(flags, spf / fs, cfg.detector,
                               start_offset_s=recording.start_offset_s)

    loop = ClosedLoop(cfg, prescription_source=prescription_source,
                      telemetry=telemetry)
    trace = loop.trace
    trace.frames_processed = int(flags.shape[0])
    for e in events:
        trace.detection_events.append(e)
        dose_event = loop._deliver(e)
        if telemetry is not None:
            placeholder = Frame(index=e.frame_index, start_s=e.time_s,
                                samples=np.zeros(1))
            loop._emit_telemetry(placeholder, e, dose_event)
    return trace


def run_streaming(recording, cfg, prescription_source=None, telemetry=None,
                  telemetry_frame_stride=0):
    """Streaming path: fold ``step`` over ``iter_frames``."""
    loop = ClosedLoop(cfg, prescription_source=prescription_source,
                      telemetry=telemetry,
                      telemetry_frame_stride=telemetry_frame_stride)
    for frame in loop.iter_frames(recording):
        loop.step(frame)
    return loop.trace
