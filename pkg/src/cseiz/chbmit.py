"""CHB-MIT corpus layout: seizure annotation summaries and subject dirs.

A subject directory holds EDF recordings plus a ``chbXX-summary.txt``
listing, per file, the number of seizures and their start/end times in
seconds relative to the file start.
"""

import re
from dataclasses import dataclass
from pathlib import Path

from cseiz.errors import SummaryParseError

_FILE_RE = re.compile(r"^File Name:\s*(\S+)", re.IGNORECASE)
_COUNT_RE = re.compile(r"^Number of Seizures in File:\s*(\S+)", re.IGNORECASE)
# both corpus variants: "Seizure Start Time:" and "Seizure 1 Start Time:"
_START_RE = re.compile(r"^Seizure(?:\s+\d+)?\s+Start Time:\s*(\S+)", re.IGNORECASE)
_END_RE = re.compile(r"^Seizure(?:\s+\d+)?\s+End Time:\s*(\S+)", re.IGNORECASE)


@dataclass(frozen=True)
class SeizureAnnotation:
    """Expert-marked seizure interval, seconds relative to file start."""

    record_id: str
    onset_s: float
    offset_s: float

    def __post_init__(self):
        if not 0 <= self.onset_s < self.offset_s:
            raise SummaryParseError(
                f"{self.record_id}: seizure start {self.onset_s} must precede "
                f"end {self.offset_s}"
            )


def _seconds(token, line_no):
    try:
        return float(token)
    except ValueError:
        raise SummaryParseError(f"non-numeric time {token!r}", line_no=line_no)


def parse_summary(text):
    """Parse summary text into a list of :class:`SeizureAnnotation`.

    Entries appear in file order; files with zero seizures contribute
    nothing. Raises :class:`SummaryParseError` with the offending line
    number for malformed times, and a validation error when a seizure
    start is not before its end.
    """
    annotations = []
    current_file = None
    pending_start = None
    pending_line = None
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        m = _FILE_RE.match(line)
        if m:
            if pending_start is not None:
                raise SummaryParseError(
                    "seizure start without matching end", line_no=pending_line
                )
            current_file = re.sub(r"\.edf$", "", m.group(1), flags=re.IGNORECASE)
            continue
        m = _COUNT_RE.match(line)
        if m:
            _seconds(m.group(1), line_no)  # numeric check, count is advisory
            continue
        m = _START_RE.match(line)
        if m:
            if current_file is None:
                raise SummaryParseError("seizure time before any file entry",
                                        line_no=line_no)
            pending_start = _seconds(m.group(1), line_no)
            pending_line = line_no
            continue
        m = _END_RE.match(line)
        if m:
            if pending_start is None:
                raise SummaryParseError("seizure end without start", line_no=line_no)
            annotations.append(
                SeizureAnnotation(
                    record_id=current_file,
                    onset_s=pending_start,
                    offset_s=_seconds(m.group(1), line_no),
                )
            )
            pending_start = None
    if pending_start is not None:
        raise SummaryParseError("seizure start without matching end",
                                line_no=pending_line)
    return annotations


@dataclass
class SubjectDir:
    """A subject's on-disk corpus slice: EDF files plus annotations."""

    subject_id: str
    root: Path
    record_ids: list
    annotations: list  # all SeizureAnnotation for the subject, summary order

    def edf_path(self, record_id):
        return self.root / f"{record_id}.edf"

    def annotations_for(self, record_id):
        return [a for a in self.annotations if a.record_id == record_id]


def load_subject(corpus_root, subject_id):
    """Open one subject directory (e.g. ``<root>/chb01``) and its summary."""
    root = Path(corpus_root) / subject_id
    summary = root / f"{subject_id}-summary.txt"
    if not summary.exists():
        raise FileNotFoundError(f"no summary file at {summary}")
    annotations = parse_summary(summary.read_text())
    record_ids = sorted(p.stem for p in root.glob("*.edf"))
    return SubjectDir(
        subject_id=subject_id,
        root=root,
        record_ids=record_ids,
        annotations=annotations,
    )
