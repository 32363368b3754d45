"""Closed-loop EEG seizure detection and micro-pump dosing simulator.

Pipeline: EDF ingestion -> band-pass + gain -> voltage-level detection
-> iterative pulse rejection -> per-frame energy gate -> event
declaration -> pump dose, with a local telemetry service for storage,
notification and prescription feedback.
"""

__version__ = "0.1.0"

from cseiz.chbmit import SeizureAnnotation, parse_summary
from cseiz.detector import (DetectionEvent, DetectorConfig, apply_vld,
                            detect_frame, detect_stream, frame_energy,
                            sra_pass1, sra_pass2, sra_reduce)
from cseiz.edf import EegRecording, parse_edf, write_edf
from cseiz.framing import Frame, frames
from cseiz.metrics import Metrics, evaluate
from cseiz.micropump import (DoseEvent, PumpDrive, PumpGeometry, dose,
                             flow_rate_ml_min)

__all__ = [
    "DetectionEvent", "DetectorConfig", "DoseEvent", "EegRecording",
    "Frame", "Metrics", "PumpDrive", "PumpGeometry", "SeizureAnnotation",
    "apply_vld", "detect_frame", "detect_stream", "dose",
    "flow_rate_ml_min", "frame_energy", "frames", "parse_edf",
    "parse_summary", "sra_pass1", "sra_pass2", "sra_reduce", "evaluate",
    "write_edf", "__version__",
]
