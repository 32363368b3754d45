import os
from pathlib import Path

import pytest

from cseiz import calibration, chbmit, edf, pipeline, synthetic

DETECTION_CHANNEL = "T7-P7"


def corpus_is_real():
    return bool(os.environ.get("CSEIZ_CORPUS_DIR"))


@pytest.fixture(scope="session")
def corpus_root(tmp_path_factory):
    """Real corpus root when $CSEIZ_CORPUS_DIR is set, else a generated
    surrogate corpus with the real chb01 annotation timeline."""
    env = os.environ.get("CSEIZ_CORPUS_DIR")
    if env:
        return Path(env)
    root = tmp_path_factory.mktemp("corpus")
    synthetic.generate_subject(root, "chb01")
    return root


@pytest.fixture(scope="session")
def chb01(corpus_root):
    return chbmit.load_subject(corpus_root, "chb01")


def load_recordings(subject):
    recs = []
    for rid in subject.record_ids:
        rec = edf.parse_edf(subject.edf_path(rid), channel=DETECTION_CHANNEL)
        recs.append(pipeline.LabeledRecording(
            record_id=rid,
            samples_uv=rec.samples[0],
            sample_rate_hz=rec.sample_rate_hz,
            annotations=subject.annotations_for(rid)))
    return recs


@pytest.fixture(scope="session")
def chb01_recordings(chb01):
    return load_recordings(chb01)


@pytest.fixture(scope="session")
def chb01_calibration(chb01_recordings):
    return calibration.calibrate(chb01_recordings)
