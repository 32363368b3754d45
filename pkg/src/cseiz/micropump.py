"""Closed-form model of the valveless piezoelectric micro-pump.

Chain: drive voltage -> actuation force -> diaphragm deflection ->
stroke volume -> diodicity-rectified net flow. Units are mm / N / MPa
(N/mm^2) internally; flow is reported in ml/min.

The piezo stress constant is not a known quantity here, so force is
either given directly or derived as force = coefficient x drive voltage.
The shipped default coefficient is back-solved so that the reference
geometry (5 mm radius, 100 um PDMS membrane, diodicity 2) at 130 Hz and
20 V reproduces the reference flow of 3.08 ml/min.
"""

import math
from dataclasses import dataclass, replace

from cseiz.errors import ConfigurationError

REFERENCE_FLOW_ML_MIN = 3.08
REFERENCE_FREQUENCY_HZ = 130.0
REFERENCE_DRIVE_V = 20.0


@dataclass(frozen=True)
class PumpGeometry:
    """Diaphragm and diffuser/nozzle element parameters."""

    diaphragm_radius_mm: float = 5.0
    diaphragm_thickness_um: float = 100.0
    young_modulus_mpa: float = 0.8
    eps_nozzle: float = 2.0
    eps_diffuser: float = 1.0
    diffuser_angle_deg: float = 10.0
    reservoir_capacity_ml: float = 5.0

    def __post_init__(self):
        for name in ("diaphragm_radius_mm", "diaphragm_thickness_um",
                     "young_modulus_mpa", "eps_nozzle", "eps_diffuser",
                     "diffuser_angle_deg", "reservoir_capacity_ml"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive")

    @property
    def diodicity(self):
        """Nozzle/diffuser pressure-loss ratio; > 1 gives forward flow."""
        return self.eps_nozzle / self.eps_diffuser


@dataclass(frozen=True)
class PumpDrive:
    """Electrical actuation parameters. ``force_n`` overrides the
    voltage-derived force when set."""

    supply_voltage_v: float = 5.0
    driving_voltage_v: float = REFERENCE_DRIVE_V
    frequency_hz: float = REFERENCE_FREQUENCY_HZ
    force_n: float = None
    force_coeff_n_per_v: float = None  # default back-solved lazily

    def __post_init__(self):
        if self.frequency_hz <= 0:
            raise ConfigurationError("frequency_hz must be positive")
        if self.driving_voltage_v < 0:
            raise ConfigurationError("driving voltage must be non-negative")
        if self.force_n is not None and self.force_n < 0:
            raise ConfigurationError("force must be non-negative")


@dataclass(frozen=True)
class DoseEvent:
    """One delivery action of the closed loop."""

    time_s: float
    duration_s: float
    volume_ml: float
    reservoir_remaining_ml: float
    reservoir_empty: bool = False


def deflection_mm(geom, force_n):
    """Static center deflection of the clamped diaphragm:
    0.55 R^2 F / (E t^3), in mm."""
    if force_n < 0:
        raise ConfigurationError("force must be non-negative")
    t_mm = geom.diaphragm_thickness_um / 1000.0
    return (0.55 * geom.diaphragm_radius_mm ** 2 * force_n
            / (geom.young_modulus_mpa * t_mm ** 3))


def force_from_drive(drive, force_coeff_n_per_v=None):
    """Actuation force in N, proportional to the driving voltage."""
    if drive.force_n is not None:
        return drive.force_n
    coeff = (force_coeff_n_per_v
             if force_coeff_n_per_v is not None
             else drive.force_coeff_n_per_v)
    if coeff is None:
        coeff = reference_force_coefficient()
    if coeff <= 0:
        raise ConfigurationError("force coefficient must be positive")
    if drive.driving_voltage_v < 0:
        raise ConfigurationError("driving voltage must be non-negative")
    return coeff * drive.driving_voltage_v


def stroke_volume_mm3(deflection_mm_, radius_mm):
    """Volume displaced per stroke: (2 pi / 3) X R^2."""
    if deflection_mm_ < 0:
        raise ConfigurationError("deflection must be non-negative")
    if radius_mm <= 0:
        raise ConfigurationError("radius must be positive")
    return (2.0 * math.pi / 3.0) * deflection_mm_ * radius_mm ** 2


def net_flow_ml_min(stroke_mm3, frequency_hz, diodicity):
    """Rectified net flow: 2 V_str f (sqrt(eta)-1)/(sqrt(eta)+1),
    converted from mm^3/s to ml/min. Zero at diodicity 1."""
    if diodicity <= 0:
        raise ConfigurationError("diodicity must be positive")
    if stroke_mm3 < 0:
        raise ConfigurationError("stroke volume must be non-negative")
    if frequency_hz <= 0:
        raise ConfigurationError("frequency must be positive")
    root = math.sqrt(diodicity)
    q_mm3_s = 2.0 * stroke_mm3 * frequency_hz * (root - 1.0) / (root + 1.0)
    return q_mm3_s * 60.0 / 1000.0


def flow_rate_ml_min(geom, drive, force_coeff_n_per_v=None):
    """Full chain: drive -> force -> deflection -> stroke -> net flow."""
    force = force_from_drive(drive, force_coeff_n_per_v)
    x = deflection_mm(geom, force)
    v_str = stroke_volume_mm3(x, geom.diaphragm_radius_mm)
    return net_flow_ml_min(v_str, drive.frequency_hz, geom.diodicity)


def reference_force_coefficient(geom=None, frequency_hz=REFERENCE_FREQUENCY_HZ,
                                drive_v=REFERENCE_DRIVE_V,
                                q_target_ml_min=REFERENCE_FLOW_ML_MIN):
    """Back-solve the N/V coefficient that makes the reference geometry
    and operating point reproduce the reference flow."""
    geom = geom or PumpGeometry()
    root = math.sqrt(geom.diodicity)
    delta = (root - 1.0) / (root + 1.0)
    if delta <= 0:
        raise ConfigurationError("reference geometry needs diodicity > 1")
    q_mm3_s = q_target_ml_min * 1000.0 / 60.0
    v_str = q_mm3_s / (2.0 * frequency_hz * delta)
    x = v_str / ((2.0 * math.pi / 3.0) * geom.diaphragm_radius_mm ** 2)
    t_mm = geom.diaphragm_thickness_um / 1000.0
    force = (x * geom.young_modulus_mpa * t_mm ** 3
             / (0.55 * geom.diaphragm_radius_mm ** 2))
    return force / drive_v


def dose(geom, drive, duration_s, reservoir_ml, time_s=0.0,
         force_coeff_n_per_v=None):
    """Deliver for ``duration_s`` seconds, clamped to the reservoir.

    An under-filled delivery (reservoir smaller than the demand) sets
    ``reservoir_empty`` on the event rather than failing silently.
    """
    if duration_s < 0:
        raise ConfigurationError("dose duration must be non-negative")
    if reservoir_ml < 0:
        raise ConfigurationError("reservoir must be non-negative")
    q = flow_rate_ml_min(geom, drive, force_coeff_n_per_v)
    demand = q / 60.0 * duration_s
    delivered = min(demand, reservoir_ml)
    remaining = reservoir_ml - delivered
    return DoseEvent(
        time_s=time_s,
        duration_s=duration_s,
        volume_ml=delivered,
        reservoir_remaining_ml=remaining,
        reservoir_empty=delivered < demand or remaining <= 0.0,
    )


def frequency_sweep(geom, drive, frequencies_hz, force_coeff_n_per_v=None):
    """(frequency, flow) pairs at fixed geometry."""
    return [(f, flow_rate_ml_min(geom, replace(drive, frequency_hz=f),
                                 force_coeff_n_per_v))
            for f in frequencies_hz]


def diameter_sweep(geom, drive, diameters_mm, force_coeff_n_per_v=None):
    """(diameter, flow) pairs at fixed drive; radius = diameter / 2."""
    return [(d, flow_rate_ml_min(replace(geom, diaphragm_radius_mm=d / 2.0),
                                 drive, force_coeff_n_per_v))
            for d in diameters_mm]
