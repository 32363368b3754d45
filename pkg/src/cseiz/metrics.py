"""Event/frame scoring of detector output against expert annotations.

Sensitivity is event-based: an annotated seizure counts as detected when
at least one event falls inside [onset, offset + grace]. Specificity is
frame-based over non-seizure frames: a firing frame outside every
annotation and outside every grace-extended window counts as a false
positive, every other non-seizure frame as a true negative.
"""

from dataclasses import dataclass, field

import numpy as np

from cseiz.errors import CseizError

DEFAULT_GRACE_S = 10.0


@dataclass
class Metrics:
    """Aggregated detection scores."""

    tp: int = 0
    fn: int = 0
    tn: int = 0
    fp: int = 0
    latencies_s: list = field(default_factory=list)

    @property
    def sensitivity(self):
        d = self.tp + self.fn
        return self.tp / d if d else None

    @property
    def specificity(self):
        d = self.tn + self.fp
        return self.tn / d if d else None

    @property
    def mean_latency_s(self):
        return float(np.mean(self.latencies_s)) if self.latencies_s else None

    def merge(self, other):
        """Pool counts and latencies from another scored slice."""
        self.tp += other.tp
        self.fn += other.fn
        self.tn += other.tn
        self.fp += other.fp
        self.latencies_s.extend(other.latencies_s)
        return self

    def as_dict(self):
        return {
            "tp": self.tp, "fn": self.fn, "tn": self.tn, "fp": self.fp,
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "mean_latency_s": self.mean_latency_s,
        }


def _check_no_overlap(annotations):
    ordered = sorted(annotations, key=lambda a: a.onset_s)
    for a, b in zip(ordered, ordered[1:]):
        if b.onset_s < a.offset_s:
            raise CseizError(
                f"overlapping annotations: [{a.onset_s}, {a.offset_s}] and "
                f"[{b.onset_s}, {b.offset_s}]")
    return ordered


def evaluate(events, annotations, frame_fired, t_f_s,
             grace_s=DEFAULT_GRACE_S, start_offset_s=0.0):
    """Score one recording's events and per-frame verdicts.

    Args:
        events: DetectionEvents on this recording's timeline.
        annotations: SeizureAnnotations for the same recording.
        frame_fired: per-frame 0/1 verdicts across the whole recording.
        t_f_s: frame length in seconds.
        grace_s: events up to this long after the annotated offset still
            count as detections of that seizure.
        start_offset_s: timeline position of frame 0.
    """
    ordered = _check_no_overlap(annotations)
    times = np.array([e.time_s for e in events], dtype=np.float64)

    m = Metrics()
    for a in ordered:
        inside = times[(times >= a.onset_s) & (times <= a.offset_s + grace_s)]
        if inside.size:
            m.tp += 1
            m.latencies_s.append(float(inside.min() - a.onset_s))
        else:
            m.fn += 1

    flags = np.asarray(frame_fired, dtype=bool)
    n = flags.shape[0]
    starts = start_offset_s + np.arange(n) * t_f_s
    ends = starts + t_f_s
    seizure = np.zeros(n, dtype=bool)   # overlaps an annotated interval
    excused = np.zeros(n, dtype=bool)   # overlaps a grace-extended window
    for a in ordered:
        seizure |= (starts < a.offset_s) & (ends > a.onset_s)
        excused |= (starts < a.offset_s + grace_s) & (ends > a.onset_s)
    non_seizure = ~seizure
    m.fp = int(np.sum(non_seizure & flags & ~excused))
    m.tn = int(np.sum(non_seizure) - m.fp)
    return m


def attach_latencies(events, annotations, grace_s=DEFAULT_GRACE_S):
    """Return events with ``latency_s`` filled for those that detect an
    annotated seizure (first event per annotation gets the latency)."""
    from dataclasses import replace

    ordered = _check_no_overlap(annotations)
    out = list(events)
    for a in ordered:
        best = None
        for i, e in enumerate(out):
            if a.onset_s <= e.time_s <= a.offset_s + grace_s:
                if best is None or e.time_s < out[best].time_s:
                    best = i
        if best is not None:
            out[best] = replace(out[best], latency_s=out[best].time_s - a.onset_s)
    return out
