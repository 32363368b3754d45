import numpy as np
import pytest

from cseiz import closed_loop, micropump
from cseiz.closed_loop import ClosedLoop, LoopConfig, run, run_streaming
from cseiz.detector import DetectorConfig
from cseiz.edf import EegRecording, parse_edf

FS = 256.0

LOOP_DETECTOR = DetectorConfig(
    v_min_mv=150.0, v_max_mv=450.0, gain=0.5, pulse_threshold=10,
    energy_threshold=0.0, consecutive_frames_n=3, refractory_s=60.0)


def burst_recording(burst_times, duration_s=600.0, amp_uv=600.0,
                    burst_len_s=20.0, channels=("T7-P7",)):
    """Quiet background with sustained 8 Hz bursts at the given onsets."""
    n = int(duration_s * FS)
    t = np.arange(n) / FS
    x = np.zeros(n)
    for t0 in burst_times:
        i0, i1 = int(t0 * FS), int((t0 + burst_len_s) * FS)
        x[i0:i1] = amp_uv * np.sin(2 * np.pi * 8.0 * t[i0:i1])
    return EegRecording(
        subject_id="synthetic", channel_labels=list(channels),
        sample_rate_hz=FS, samples=np.tile(x, (len(channels), 1)),
        duration_s=duration_s)


def loop_config(**kw):
    return LoopConfig(detector=LOOP_DETECTOR, **kw)


def test_single_burst_one_detection_one_dose():
    rec = burst_recording([100.0])
    cfg = loop_config()
    trace = run(rec, cfg)
    assert len(trace.detection_events) == 1
    assert len(trace.dose_events) == 1
    e, d = trace.detection_events[0], trace.dose_events[0]
    assert d.time_s == e.time_s
    q = micropump.flow_rate_ml_min(cfg.pump_geometry, cfg.pump_drive)
    assert d.volume_ml == pytest.approx(q / 60.0 * cfg.dose_duration_s)
    assert 100.0 <= e.time_s <= 105.0


def test_quiet_recording_no_events_reservoir_untouched():
    rec = burst_recording([])
    trace = run(rec, loop_config())
    assert trace.detection_events == []
    assert trace.dose_events == []
    assert trace.frames_processed == int(600.0 / 0.5)


def test_two_seizures_one_dose_reservoir():
    cfg = loop_config()
    q = micropump.flow_rate_ml_min(cfg.pump_geometry, cfg.pump_drive)
    one_dose = q / 60.0 * cfg.dose_duration_s
    cfg = loop_config(initial_reservoir_ml=one_dose)
    rec = burst_recording([100.0, 300.0])
    trace = run(rec, cfg)
    assert len(trace.detection_events) == 2
    assert len(trace.dose_events) == 2
    first, second = trace.dose_events
    assert first.volume_ml == pytest.approx(one_dose)
    assert first.reservoir_remaining_ml == 0.0
    assert first.reservoir_empty
    assert second.volume_ml == 0.0
    assert second.reservoir_empty


def test_refractory_swallows_close_second_burst():
    rec = burst_recording([100.0, 140.0])
    trace = run(rec, loop_config())
    assert len(trace.detection_events) == 1
    # outside the refractory both fire
    rec = burst_recording([100.0, 300.0])
    trace = run(rec, loop_config())
    assert len(trace.detection_events) == 2


def test_run_equals_streaming_fold_byte_identical():
    for bursts in ([], [100.0], [100.0, 300.0]):
        rec = burst_recording(bursts)
        cfg = loop_config()
        assert run(rec, cfg).to_jsonl() == run_streaming(rec, cfg).to_jsonl()


def test_step_fold_equals_run_on_surrogate(chb01, chb01_calibration):
    rec = parse_edf(chb01.edf_path("chb01_03"), channel="T7-P7")
    cfg = LoopConfig(detector=chb01_calibration.config)
    assert run(rec, cfg).to_jsonl() == run_streaming(rec, cfg).to_jsonl()


def test_step_emits_nothing_on_quiet_frames():
    cfg = loop_config()
    loop = ClosedLoop(cfg)
    rec = burst_recording([])
    for frame in loop.iter_frames(rec):
        event, dosed = loop.step(frame)
        assert event is None and dosed is None


def test_step_respects_refractory_window():
    cfg = loop_config()
    loop = ClosedLoop(cfg)
    rec = burst_recording([100.0, 140.0])
    events = []
    for frame in loop.iter_frames(rec):
        event, _ = loop.step(frame)
        if event:
            events.append(event)
    assert len(events) == 1


def test_trace_times_ordered_and_bounded():
    rec = burst_recording([50.0, 200.0, 400.0])
    trace = run(rec, loop_config())
    times = [e.time_s for e in trace.detection_events]
    assert times == sorted(times)
    assert all(0.0 <= t <= 600.0 for t in times)
    assert len(trace.dose_events) <= len(trace.detection_events)
    for e, d in zip(trace.detection_events, trace.dose_events):
        assert d.time_s == e.time_s


def test_reservoir_conservation_across_trace():
    cfg = loop_config(initial_reservoir_ml=1.0)
    rec = burst_recording([50.0, 200.0, 400.0])
    trace = run(rec, cfg)
    delivered = sum(d.volume_ml for d in trace.dose_events)
    remaining = trace.dose_events[-1].reservoir_remaining_ml
    assert delivered + remaining == pytest.approx(1.0, abs=1e-12)


def test_prescription_source_overrides_dose_duration():
    from cseiz.service import Prescription

    cfg = loop_config()
    rec = burst_recording([100.0])
    trace = run(rec, cfg,
                prescription_source=lambda: Prescription(
                    issued_at=0.0, dose_duration_s=5.0))
    q = micropump.flow_rate_ml_min(cfg.pump_geometry, cfg.pump_drive)
    assert trace.dose_events[0].duration_s == 5.0
    assert trace.dose_events[0].volume_ml == pytest.approx(q / 60.0 * 5.0)


def test_out_of_order_frame_rejected():
    from cseiz.errors import SequencingError

    cfg = loop_config()
    loop = ClosedLoop(cfg)
    rec = burst_recording([])
    frames = list(loop.iter_frames(rec))[:3]
    loop.step(frames[2])
    with pytest.raises(SequencingError):
        loop.step(frames[0])


def test_loop_config_validation():
    from cseiz.errors import ConfigurationError

    with pytest.raises(ConfigurationError):
        LoopConfig(dose_duration_s=0.0)
    with pytest.raises(ConfigurationError):
        LoopConfig(initial_reservoir_ml=-1.0)
