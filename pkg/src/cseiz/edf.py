"""EDF 1.0 reader/writer for CHB-MIT style recordings.

Implements the fixed binary layout: a 256-byte main header, 256 header
bytes per signal, then data records of interleaved little-endian 16-bit
samples. Digital values are converted to physical units through the
per-signal linear map defined by the physical/digital min/max fields.
"""

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from cseiz.errors import ChannelNotFoundError, EdfParseError

HEADER_SIZE = 256
PER_SIGNAL_HEADER = 256


@dataclass
class EegRecording:
    """One parsed EEG channel set, samples in microvolts."""

    subject_id: str
    channel_labels: list
    sample_rate_hz: float
    samples: np.ndarray  # shape (n_channels, n_samples), float64 microvolts
    start_offset_s: float = 0.0
    duration_s: float = 0.0

    def __post_init__(self):
        self.samples = np.atleast_2d(np.asarray(self.samples, dtype=np.float64))
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        if len(self.channel_labels) != self.samples.shape[0]:
            raise ValueError("one label per channel required")
        if not self.channel_labels:
            raise ValueError("at least one channel required")
        expected = int(round(self.sample_rate_hz * self.duration_s))
        if self.samples.shape[1] != expected:
            raise ValueError(
                f"sample count {self.samples.shape[1]} != "
                f"rate*duration = {expected}"
            )

    @property
    def n_samples(self):
        return self.samples.shape[1]

    def channel(self, label):
        """Samples of one channel by label (stripped, case-sensitive)."""
        labels = [c.strip() for c in self.channel_labels]
        if label.strip() not in labels:
            raise ChannelNotFoundError(label, labels)
        return self.samples[labels.index(label.strip())]


def _read_field(buf, offset, size, kind, name):
    raw = buf[offset : offset + size]
    if len(raw) < size:
        raise EdfParseError(f"header truncated in field {name!r}", byte_offset=offset)
    try:
        text = raw.decode("ascii").strip()
    except UnicodeDecodeError:
        raise EdfParseError(f"non-ASCII bytes in field {name!r}", byte_offset=offset)
    if kind is str:
        return text
    try:
        return kind(text)
    except ValueError:
        raise EdfParseError(
            f"field {name!r} is not a valid {kind.__name__}: {text!r}",
            byte_offset=offset,
        )


def parse_edf(source, channel=None, subject_id=None):
    """Parse an EDF file into an :class:`EegRecording`.

    Args:
        source: path, bytes, or binary file object.
        channel: if given, return only this channel (label match after
            stripping padding). Otherwise all channels are returned.
        subject_id: overrides the subject id derived from the header.

    Raises:
        EdfParseError: malformed header or truncated data records.
        ChannelNotFoundError: requested channel label absent.
    """
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
        if subject_id is None:
            subject_id = Path(source).stem
    elif isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        data = source.read()

    if len(data) < HEADER_SIZE:
        raise EdfParseError(
            f"file too short for EDF header ({len(data)} < {HEADER_SIZE} bytes)",
            byte_offset=len(data),
        )

    patient = _read_field(data, 8, 80, str, "patient")
    recording_id = _read_field(data, 88, 80, str, "recording")
    header_bytes = _read_field(data, 184, 8, int, "header bytes")
    n_records = _read_field(data, 236, 8, int, "number of data records")
    record_duration = _read_field(data, 244, 8, float, "record duration")
    n_signals = _read_field(data, 252, 4, int, "number of signals")
    if n_signals < 1:
        raise EdfParseError("EDF declares no signals", byte_offset=252)
    expected_header = HEADER_SIZE + n_signals * PER_SIGNAL_HEADER
    if header_bytes != expected_header:
        raise EdfParseError(
            f"header size field {header_bytes} != expected {expected_header}",
            byte_offset=184,
        )
    if len(data) < expected_header:
        raise EdfParseError("signal headers truncated", byte_offset=len(data))

    def signal_fields(base, size, kind, name):
        return [
            _read_field(data, HEADER_SIZE + base * n_signals + i * size, size, kind,
                        f"{name}[{i}]")
            for i in range(n_signals)
        ]

    labels = signal_fields(0, 16, str, "label")
    phys_min = signal_fields(16 + 80 + 8, 8, float, "physical min")
    phys_max = signal_fields(16 + 80 + 8 + 8, 8, float, "physical max")
    dig_min = signal_fields(16 + 80 + 8 + 16, 8, float, "digital min")
    dig_max = signal_fields(16 + 80 + 8 + 24, 8, float, "digital max")
    spr = signal_fields(16 + 80 + 8 + 32 + 80, 8, int, "samples per record")

    if any(s <= 0 for s in spr):
        raise EdfParseError("non-positive samples-per-record", byte_offset=HEADER_SIZE)
    if n_records > 0 and record_duration <= 0:
        raise EdfParseError("non-positive record duration", byte_offset=244)

    samples_per_record_total = sum(spr)
    body = data[expected_header:]
    record_bytes = samples_per_record_total * 2
    if n_records < 0:  # unknown count: infer from file size
        n_records = len(body) // record_bytes if record_bytes else 0
    if len(body) < n_records * record_bytes:
        actual = len(body) // record_bytes if record_bytes else 0
        raise EdfParseError(
            f"truncated data records: header declares {n_records} records, "
            f"file contains {actual}",
            byte_offset=expected_header + len(body),
        )

    if channel is not None:
        stripped = [c.strip() for c in labels]
        if channel.strip() not in stripped:
            raise ChannelNotFoundError(channel, stripped)
        wanted = [stripped.index(channel.strip())]
    else:
        wanted = list(range(n_signals))

    raw = np.frombuffer(body, dtype="<i2", count=n_records * samples_per_record_total)
    raw = raw.reshape(n_records, samples_per_record_total) if n_records else \
        raw.reshape(0, samples_per_record_total)

    offsets = np.cumsum([0] + spr)
    out = []
    out_labels = []
    for i in wanted:
        seg = raw[:, offsets[i] : offsets[i + 1]].reshape(-1).astype(np.float64)
        drange = dig_max[i] - dig_min[i]
        if drange == 0:
            raise EdfParseError(
                f"signal {labels[i]!r} has zero digital range", byte_offset=HEADER_SIZE
            )
        scale = (phys_max[i] - phys_min[i]) / drange
        out.append(seg * scale + (phys_min[i] - dig_min[i] * scale))
        out_labels.append(labels[i].strip())

    rates = {spr[i] / record_duration for i in wanted} if n_records > 0 else set()
    if len(rates) > 1:
        raise EdfParseError(
            "channels with differing sample rates requested together",
            byte_offset=HEADER_SIZE,
        )
    rate = rates.pop() if rates else (spr[wanted[0]] / record_duration
                                      if record_duration > 0 else 256.0)

    return EegRecording(
        subject_id=subject_id or recording_id or patient or "unknown",
        channel_labels=out_labels,
        sample_rate_hz=rate,
        samples=np.vstack(out) if out and out[0].size else
            np.zeros((len(wanted), 0)),
        start_offset_s=0.0,
        duration_s=n_records * record_duration if n_records > 0 else 0.0,
    )


def _fmt(value, size):
    text = f"{value}"
    if len(text) > size:
        text = f"{value:.{max(size - 7, 1)}g}"
    if len(text) > size:
        raise ValueError(f"field value {value!r} does not fit in {size} bytes")
    return text.ljust(size).encode("ascii")


def write_edf(recording, target, record_duration_s=1.0):
    """Serialize an :class:`EegRecording` to EDF.

    Physical min/max are chosen as symmetric integers covering the data,
    so the header round-trips exactly and quantization error is bounded
    by one digital step. The sample count must divide into whole records.
    """
    fs = recording.sample_rate_hz
    spr = int(round(fs * record_duration_s))
    if spr <= 0:
        raise ValueError("record duration too short for sample rate")
    n_samples = recording.n_samples
    if n_samples % spr != 0:
        raise ValueError(
            f"sample count {n_samples} not a whole number of records of {spr}"
        )
    n_records = n_samples // spr
    n_signals = len(recording.channel_labels)

    peak = float(np.max(np.abs(recording.samples))) if n_samples else 0.0
    pmax = max(1, int(np.ceil(peak)))
    dig_min, dig_max = -32768, 32767

    header = io.BytesIO()
    header.write(_fmt(0, 8))
    header.write(_fmt(recording.subject_id[:80], 80))
    header.write(_fmt(recording.subject_id[:80], 80))
    header.write(_fmt("01.01.01", 8))
    header.write(_fmt("00.00.00", 8))
    header.write(_fmt(HEADER_SIZE + n_signals * PER_SIGNAL_HEADER, 8))
    header.write(_fmt("", 44))
    header.write(_fmt(n_records, 8))
    header.write(_fmt(f"{record_duration_s:g}", 8))
    header.write(_fmt(n_signals, 4))
    for label in recording.channel_labels:
        header.write(_fmt(label[:16], 16))
    for _ in range(n_signals):
        header.write(_fmt("", 80))  # transducer
    for _ in range(n_signals):
        header.write(_fmt("uV", 8))
    for _ in range(n_signals):
        header.write(_fmt(-pmax, 8))
    for _ in range(n_signals):
        header.write(_fmt(pmax, 8))
    for _ in range(n_signals):
        header.write(_fmt(dig_min, 8))
    for _ in range(n_signals):
        header.write(_fmt(dig_max, 8))
    for _ in range(n_signals):
        header.write(_fmt("", 80))  # prefiltering
    for _ in range(n_signals):
        header.write(_fmt(spr, 8))
    for _ in range(n_signals):
        header.write(_fmt("", 32))

    scale = (dig_max - dig_min) / (2.0 * pmax)
    digital = np.rint((recording.samples + pmax) * scale + dig_min)
    digital = np.clip(digital, dig_min, dig_max).astype("<i2")

    body = np.empty((n_records, n_signals, spr), dtype="<i2")
    for i in range(n_signals):
        body[:, i, :] = digital[i].reshape(n_records, spr)

    blob = header.getvalue() + body.tobytes()
    if isinstance(target, (str, Path)):
        Path(target).write_bytes(blob)
        return None
    target.write(blob)
    return None
