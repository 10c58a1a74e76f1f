"""Shipped scenario presets and JSON plant-configuration loading.

Presets mirror the two phantom materials. Both scenarios share one
drivetrain whose current limit caps the tool-tip force at the stiff
phantom's probing level; the soft scenario never reaches it.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from importlib import resources
from pathlib import Path


from .drivetrain import DriveTrain, MotionProfile
from .errors import ConfigError
from .harness import ExperimentConfig, ScheduleConfig
from .materials import (
    MATERIALS,
    CalibrationTargets,
    MaterialProps,
    TissueModel,
    calibrate,
)

PRESET_NAMES = ("ecoflex10", "ecoflex30")


def _preset_doc(name: str) -> dict:
    if name not in PRESET_NAMES:
        raise ConfigError(
            f"unknown preset {name!r}; shipped presets: {', '.join(PRESET_NAMES)}"
        )
    data = resources.files(__package__).joinpath(f"presets/{name}.json").read_text()
    return json.loads(data)


def _material_from_doc(doc: dict) -> MaterialProps:
    m = doc["material"]
    return MaterialProps(
        name=m["name"],
        viscosity_cps=m["viscosity_cps"],
        tensile_strength_psi=m["tensile_strength_psi"],
        elongation_pct=m["elongation_pct"],
        modulus_psi=m["modulus_psi"],
    )


def _targets_from_doc(doc: dict) -> CalibrationTargets:
    t = doc["targets"]
    return CalibrationTargets(
        plateau_force_n=t.get("plateau_force_n"),
        force_delta_n=t.get("force_delta_n"),
        probe_duration_s=t.get("probe_duration_s"),
        contact_depth_mm=t.get("contact_depth_mm", 12.0),
        puncture_peak_n=t.get("puncture_peak_n", 0.0),
    )


def _drivetrain_from_doc(doc: dict) -> DriveTrain:
    d = doc.get("drivetrain", {})
    kwargs = {}
    for key in ("gear_ratio", "pinion_radius_m", "torque_constant_nm_per_a",
                "encoder_counts_per_rev", "linear_resolution_m", "stroke_mm",
                "stroke_counts", "rotor_inertia_kgm2", "viscous_friction_nms",
                "current_limit_a"):
        if key in d:
            kwargs[key] = d[key]
    drivetrain = DriveTrain(**kwargs)
    force_limit = doc.get("force_limit_n")
    if force_limit is not None and "current_limit_a" not in d:
        drivetrain = drivetrain.with_force_limit(force_limit)
    return drivetrain


def _profile_from_doc(doc: dict) -> MotionProfile:
    p = doc.get("profile", {})
    return MotionProfile(
        max_speed_rpm=p.get("max_speed_rpm", 200.0),
        accel_rpm_s=p.get("accel_rpm_s", 20000.0),
        decel_rpm_s=p.get("decel_rpm_s", 20000.0),
    )


def _schedule_from_doc(doc: dict) -> ScheduleConfig:
    s = doc.get("schedule", {})
    return ScheduleConfig(
        probe_time_s=s.get("probe_time_s", 3.42),
        retract_time_s=s.get("retract_time_s", 6.33),
        end_time_s=s.get("end_time_s", 8.0),
        target_mm=s.get("target_mm", 35.0),
    )


def load_experiment_doc(doc: dict, seed: int = 0) -> ExperimentConfig:
    """Assemble an experiment from a parsed configuration document.

    A ``tissue`` section gives the Kelvin-Voigt constants directly; otherwise
    ``material`` + ``targets`` are calibrated on the fly.
    """
    drivetrain = _drivetrain_from_doc(doc)
    profile = _profile_from_doc(doc)
    if "tissue" in doc:
        t = doc["tissue"]
        tissue = TissueModel(
            contact_depth_mm=t.get("contact_depth_mm", 12.0),
            stiffness_n_per_mm=t["stiffness_n_per_mm"],
            damping_ns_per_mm=t.get("damping_ns_per_mm", 0.0),
            puncture_peak_n=t.get("puncture_peak_n", 0.0),
        )
    elif "material" in doc and "targets" in doc:
        tissue = calibrate(
            _material_from_doc(doc), _targets_from_doc(doc), drivetrain, profile
        )
    else:
        raise ConfigError("config needs either a 'tissue' or 'material'+'targets' section")
    return ExperimentConfig(
        tissue=tissue,
        drivetrain=drivetrain,
        profile=profile,
        schedule=_schedule_from_doc(doc),
        seed=doc.get("seed", seed),
    )


def load_experiment_config(source: str | Path, seed: int = 0) -> ExperimentConfig:
    """Load a scenario from a shipped preset name or a JSON file path."""
    name = str(source)
    if name in PRESET_NAMES:
        return load_experiment_doc(_preset_doc(name), seed=seed)
    path = Path(source)
    if not path.exists():
        raise ConfigError(f"{source!r} is neither a shipped preset nor a file")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {source}: {exc}") from exc
    return load_experiment_doc(doc, seed=seed)


def tissue_preset(name: str) -> TissueModel:
    """Calibrated Kelvin-Voigt model for a shipped preset."""
    return load_experiment_config(name).tissue


def material_preset(name: str) -> MaterialProps:
    if name not in MATERIALS:
        raise ConfigError(f"unknown material {name!r}")
    return MATERIALS[name]


def dump_config(cfg: ExperimentConfig) -> dict:
    """Round-trippable document for an assembled experiment."""
    return {
        "tissue": {
            "contact_depth_mm": cfg.tissue.contact_depth_mm,
            "stiffness_n_per_mm": cfg.tissue.stiffness_n_per_mm,
            "damping_ns_per_mm": cfg.tissue.damping_ns_per_mm,
            "puncture_peak_n": cfg.tissue.puncture_peak_n,
        },
        "drivetrain": {
            "gear_ratio": cfg.drivetrain.gear_ratio,
            "pinion_radius_m": cfg.drivetrain.pinion_radius_m,
            "torque_constant_nm_per_a": cfg.drivetrain.torque_constant_nm_per_a,
            "current_limit_a": cfg.drivetrain.current_limit_a,
        },
        "profile": asdict(cfg.profile),
        "schedule": asdict(cfg.schedule),
        "seed": cfg.seed,
    }
