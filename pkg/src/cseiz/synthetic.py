"""Deterministic surrogate EEG corpus in CHB-MIT layout.

When the real corpus is not on disk, tests and demos run against
generated recordings that keep the real chb01 annotation timeline
(7 seizures; e.g. chb01_03 seizing from 2996 s to 3036 s) on top of a
synthetic signal model: band-limited background noise, short high
amplitude artifact bursts that the rejection stages must discard, and
sustained 6-10 Hz high-amplitude oscillations inside seizure windows.

Files are written as real EDF plus a ``-summary.txt``, so the ingestion
path is identical for surrogate and real data.
"""

import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal as _signal

from cseiz.edf import EegRecording, write_edf

SAMPLE_RATE_HZ = 256.0
CHANNELS = ("FP1-F7", "F7-T7", "T7-P7")

# real chb01 seizure layout from the public corpus annotations:
# (record, duration_s, [(onset, offset)])
CHB01_LAYOUT = (
    ("chb01_01", 3600, ()),
    ("chb01_02", 3600, ()),
    ("chb01_03", 3600, ((2996.0, 3036.0),)),
    ("chb01_04", 3600, ((1467.0, 1494.0),)),
    ("chb01_15", 3600, ((1732.0, 1772.0),)),
    ("chb01_16", 3600, ((1015.0, 1066.0),)),
    ("chb01_18", 3600, ((1720.0, 1810.0),)),
    ("chb01_21", 3600, ((327.0, 420.0),)),
    ("chb01_26", 3600, ((1862.0, 1963.0),)),
)

BACKGROUND_SIGMA_UV = 18.0
ICTAL_AMPLITUDE_UV = 600.0
ARTIFACT_AMPLITUDE_UV = 480.0
ARTIFACT_EVERY_S = 240.0


@dataclass(frozen=True)
class RecordSpec:
    record_id: str
    duration_s: float
    seizures: tuple


def _background(rng, n, fs):
    """Band-limited noise resembling interictal scalp EEG."""
    white = rng.standard_normal(n)
    sos = _signal.butter(2, [0.5, 45.0], btype="bandpass", fs=fs, output="sos")
    x = _signal.sosfilt(sos, white)
    scale = BACKGROUND_SIGMA_UV / max(np.std(x), 1e-12)
    return x * scale


def _artifacts(rng, n, fs):
    """Sparse short bursts: amplitude reaches the detection window but
    the duration (< 0.5 s) cannot sustain a multi-frame run."""
    out = np.zeros(n)
    t = rng.uniform(30.0, ARTIFACT_EVERY_S)
    while t * fs < n:
        dur = rng.uniform(0.15, 0.45)
        i0 = int(t * fs)
        i1 = min(n, i0 + int(dur * fs))
        length = i1 - i0
        if length > 4:
            tt = np.arange(length) / fs
            freq = rng.uniform(16.0, 25.0)
            amp = ARTIFACT_AMPLITUDE_UV * rng.uniform(0.5, 1.0)
            out[i0:i1] += (amp * np.hanning(length)
                           * np.sin(2 * np.pi * freq * tt
                                    + rng.uniform(0, 2 * np.pi)))
        t += rng.uniform(0.5, 1.5) * ARTIFACT_EVERY_S
    return out


def _ictal_envelope(rng, length, fs):
    """Onset ramp (~2.5 s), modulated plateau, release (~3 s)."""
    t = np.arange(length) / fs
    ramp = np.clip(t / 2.5, 0.0, 1.0)
    release = np.clip((t[-1] - t) / 3.0, 0.0, 1.0) if length else ramp
    am = 1.0 + 0.15 * np.sin(2 * np.pi * 0.15 * t + rng.uniform(0, 2 * np.pi))
    return ICTAL_AMPLITUDE_UV * np.minimum(ramp, release) * am


def _ictal(rng, n, fs, seizures):
    out = np.zeros(n)
    for onset_s, offset_s in seizures:
        i0, i1 = int(onset_s * fs), min(n, int(offset_s * fs))
        length = i1 - i0
        if length <= 0:
            continue
        t = np.arange(length) / fs
        # slow frequency wander inside the 3-29 Hz epileptic band
        freq = 7.5 + 1.5 * np.sin(2 * np.pi * 0.05 * t
                                  + rng.uniform(0, 2 * np.pi))
        phase = 2 * np.pi * np.cumsum(freq) / fs
        out[i0:i1] += _ictal_envelope(rng, length, fs) * np.sin(phase)
    return out


def synth_record(spec, subject_id, seed=0):
    """Generate one multichannel recording for a :class:`RecordSpec`."""
    fs = SAMPLE_RATE_HZ
    n = int(round(spec.duration_s * fs))
    data = np.empty((len(CHANNELS), n))
    for c in range(len(CHANNELS)):
        # crc32, not hash(): stable across processes
        rng = np.random.default_rng(zlib.crc32(
            f"{subject_id}/{spec.record_id}/{c}/{seed}".encode()))
        scale = rng.uniform(0.85, 1.15)
        data[c] = (_background(rng, n, fs)
                   + _artifacts(rng, n, fs)
                   + scale * _ictal(rng, n, fs, spec.seizures))
    return EegRecording(
        subject_id=spec.record_id,
        channel_labels=list(CHANNELS),
        sample_rate_hz=fs,
        samples=data,
        duration_s=spec.duration_s,
    )


def summary_text(subject_id, specs):
    """Render a CHB-MIT style summary for the generated records."""
    lines = [f"Data Sampling Rate: {int(SAMPLE_RATE_HZ)} Hz", ""]
    for spec in specs:
        lines.append(f"File Name: {spec.record_id}.edf")
        lines.append("File Start Time: 00:00:00")
        lines.append("File End Time: "
                     f"{int(spec.duration_s) // 3600:02d}:"
                     f"{int(spec.duration_s) % 3600 // 60:02d}:00")
        lines.append(f"Number of Seizures in File: {len(spec.seizures)}")
        for onset, offset in spec.seizures:
            lines.append(f"Seizure Start Time: {int(onset)} seconds")
            lines.append(f"Seizure End Time: {int(offset)} seconds")
        lines.append("")
    return "\n".join(lines) + "\n"


def generate_subject(out_root, subject_id="chb01", layout=None, seed=0):
    """Write a full surrogate subject directory (EDFs + summary).

    Returns the subject directory path. Existing files are reused, so
    repeated calls are cheap and reproducible.
    """
    layout = layout if layout is not None else CHB01_LAYOUT
    specs = [RecordSpec(record_id=r, duration_s=float(d), seizures=tuple(s))
             for r, d, s in layout]
    subject_dir = Path(out_root) / subject_id
    subject_dir.mkdir(parents=True, exist_ok=True)
    summary_path = subject_dir / f"{subject_id}-summary.txt"
    if not summary_path.exists():
        summary_path.write_text(summary_text(subject_id, specs))
    for spec in specs:
        edf_path = subject_dir / f"{spec.record_id}.edf"
        if edf_path.exists():
            continue
        write_edf(synth_record(spec, subject_id, seed=seed), edf_path)
    return subject_dir
