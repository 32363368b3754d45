"""Flat ``key = value`` config files for detector, pump, and loop settings.

Keys mirror the dataclass field names (units are part of the names where
they matter). Unknown keys are rejected so typos fail loudly.
"""

from pathlib import Path

from cseiz.closed_loop import LoopConfig
from cseiz.detector import DetectorConfig
from cseiz.errors import ConfigurationError
from cseiz.micropump import PumpDrive, PumpGeometry

_DETECTOR_KEYS = {
    "v_min_mv": float, "v_max_mv": float, "t_f_ms": float, "gain": float,
    "sra_total_iters_n": int, "sra_onset_stage_k": int,
    "pulse_threshold": int, "energy_threshold": float,
    "consecutive_frames_n": int, "refractory_s": float,
}
_GEOMETRY_KEYS = {
    "diaphragm_radius_mm": float, "diaphragm_thickness_um": float,
    "young_modulus_mpa": float, "eps_nozzle": float, "eps_diffuser": float,
    "diffuser_angle_deg": float, "reservoir_capacity_ml": float,
}
_DRIVE_KEYS = {
    "supply_voltage_v": float, "driving_voltage_v": float,
    "frequency_hz": float, "force_n": float, "force_coeff_n_per_v": float,
}
_LOOP_KEYS = {
    "dose_duration_s": float, "initial_reservoir_ml": float,
    "channel": str, "band_lo_hz": float, "band_hi_hz": float,
}


def parse_kv(text):
    """Parse ``key = value`` lines; '#' starts a comment."""
    out = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {line_no}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


def load_loop_config(path):
    """Read a config file into a :class:`LoopConfig`. Missing keys keep
    their defaults; a detector-only file is valid."""
    raw = parse_kv(Path(path).read_text())
    known = {**_DETECTOR_KEYS, **_GEOMETRY_KEYS, **_DRIVE_KEYS, **_LOOP_KEYS}
    unknown = set(raw) - set(known)
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")

    def section(keys):
        vals = {}
        for key, conv in keys.items():
            if key in raw:
                try:
                    vals[key] = conv(raw[key])
                except ValueError:
                    raise ConfigurationError(
                        f"key {key}: cannot parse {raw[key]!r} as "
                        f"{conv.__name__}")
        return vals

    return LoopConfig(
        detector=DetectorConfig(**section(_DETECTOR_KEYS)),
        pump_geometry=PumpGeometry(**section(_GEOMETRY_KEYS)),
        pump_drive=PumpDrive(**section(_DRIVE_KEYS)),
        **section(_LOOP_KEYS),
    )


def dump_loop_config(cfg):
    """Serialize a LoopConfig back to the flat text format."""
    lines = ["# detection"]
    for key in _DETECTOR_KEYS:
        lines.append(f"{key} = {getattr(cfg.detector, key)}")
    lines.append("")
    lines.append("# pump geometry")
    for key in _GEOMETRY_KEYS:
        lines.append(f"{key} = {getattr(cfg.pump_geometry, key)}")
    lines.append("")
    lines.append("# pump drive")
    for key in _DRIVE_KEYS:
        value = getattr(cfg.pump_drive, key)
        if value is not None:
            lines.append(f"{key} = {value}")
    lines.append("")
    lines.append("# loop")
    lines.append(f"dose_duration_s = {cfg.dose_duration_s}")
    if cfg.initial_reservoir_ml is not None:
        lines.append(f"initial_reservoir_ml = {cfg.initial_reservoir_ml}")
    lines.append(f"channel = {cfg.channel}")
    lines.append(f"band_lo_hz = {cfg.band_lo_hz}")
    lines.append(f"band_hi_hz = {cfg.band_hi_hz}")
    return "\n".join(lines) + "\n"


def save_loop_config(cfg, path):
    Path(path).write_text(dump_loop_config(cfg))
