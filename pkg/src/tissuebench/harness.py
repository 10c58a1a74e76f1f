"""Scenario orchestration: timed probe/dwell/retract runs through the plant,
the estimation chain, and (optionally) the vision pipeline, plus the summary
statistics reported for each run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .drivetrain import DriveTrain, MotionProfile, Trajectory, plan_trapezoid
from .errors import ConfigError, SummaryError
from .estimation import (
    EstimationChain,
    ChainSample,
    SensorConfig,
    simulate_ft_sensor,
)
from .materials import TissueModel
from .plant import ToolPlant
from .telemetry import TelemetrySample
from .vision import (
    FeatureExtractor,
    RenderConfig,
    SoftmaxAreaClassifier,
    optimized_deformation,
    render_frame,
)
from .vision.features import measure_silhouette_area


@dataclass(frozen=True)
class ScheduleConfig:
    """Command schedule for one probe/dwell/retract experiment."""

    probe_time_s: float = 3.42
    retract_time_s: float = 6.33
    end_time_s: float = 8.0
    target_mm: float = 35.0

    def __post_init__(self) -> None:
        if not 0.0 < self.probe_time_s < self.retract_time_s < self.end_time_s:
            raise ConfigError("schedule times must be strictly increasing")


@dataclass(frozen=True)
class ExperimentConfig:
    tissue: TissueModel
    drivetrain: DriveTrain = field(default_factory=DriveTrain)
    profile: MotionProfile = field(default_factory=MotionProfile)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    sensor: SensorConfig = field(default_factory=SensorConfig)
    current_noise_a: float = 0.01
    process_noise: float = 0.0025
    lowpass_cutoff_hz: float = 0.1
    dt: float = 1e-3
    seed: int = 0
    vision_enabled: bool = False
    vision_rate_hz: float = 25.0
    render_config: RenderConfig = field(default_factory=RenderConfig)
    contact_settle_s: float = 0.3  # contact-window start offset

    def validate(self) -> None:
        if self.dt <= 0.0:
            raise ConfigError("dt must be > 0")
        if self.schedule.target_mm > self.drivetrain.stroke_mm:
            raise ConfigError(
                f"target {self.schedule.target_mm} mm exceeds the "
                f"{self.drivetrain.stroke_mm} mm stroke"
            )
        if self.tissue.contact_depth_mm >= self.schedule.target_mm:
            raise ConfigError("contact depth at or beyond the probe target")
        if self.vision_enabled and self.vision_rate_hz <= 0.0:
            raise ConfigError("vision rate must be > 0")


@dataclass(frozen=True)
class RunSummary:
    avg_contact_force_n: float
    force_delta_rest_to_probe_n: float
    probe_duration_s: float
    dwell_force_drift_n: float
    max_force_n: float
    first_contact_time_s: float | None = None
    target_reached_time_s: float | None = None


from .materials import PEAK_SMOOTH_SAMPLES as _SMOOTH_WINDOW


def _moving_mean(values: np.ndarray, window: int) -> np.ndarray:
    if len(values) < window:
        return values
    kernel = np.ones(window) / window
    return np.convolve(values, kernel, mode="valid")


def summarize(
    samples: Sequence[TelemetrySample],
    contact_window: tuple[float, float],
    contact_depth_mm: float,
    target_mm: float,
    probe_time_s: float,
    rest_window_s: float = 0.3,
) -> RunSummary:
    """Aggregate a telemetry series over an explicit contact window.

    Probe duration runs from the first sample past the contact depth to the
    first sample at the target. The rest-to-probe delta compares a smoothed
    probe-phase peak against the pre-command baseline.
    """
    if not samples:
        raise SummaryError("no telemetry samples")
    t = np.array([s.time for s in samples])
    pos = np.array([s.actual_pos for s in samples])
    force = np.array([s.f_current for s in samples])
    w0, w1 = contact_window
    if not (t[0] <= w0 < w1 <= t[-1] + 1e-12):
        raise SummaryError(f"contact window [{w0}, {w1}] outside the run")

    in_window = (t >= w0) & (t < w1)
    if not in_window.any():
        raise SummaryError("contact window contains no samples")
    avg_force = float(force[in_window].mean())

    contact_idx = np.flatnonzero(pos > contact_depth_mm)
    first_contact = float(t[contact_idx[0]]) if len(contact_idx) else None
    reached = None
    if first_contact is not None:
        reach_idx = np.flatnonzero((t >= first_contact) & (pos >= target_mm - 1e-9))
        reached = float(t[reach_idx[0]]) if len(reach_idx) else None
    if first_contact is not None and reached is not None:
        duration = reached - first_contact
    else:
        duration = 0.0

    rest_mask = (t >= probe_time_s - rest_window_s) & (t < probe_time_s)
    baseline = float(force[rest_mask].mean()) if rest_mask.any() else 0.0
    probe_end = reached if reached is not None else w1
    probe_mask = (t >= probe_time_s) & (t <= probe_end)
    if probe_mask.any():
        smoothed = _moving_mean(force[probe_mask], _SMOOTH_WINDOW)
        delta = float(smoothed.max()) - baseline
    else:
        delta = 0.0

    drift = 0.0
    if reached is not None and reached < w1:
        head = (t >= reached) & (t < min(reached + 0.2, w1))
        tail = (t >= w1 - 0.2) & (t < w1)
        if head.any() and tail.any():
            drift = float(force[tail].mean() - force[head].mean())

    return RunSummary(
        avg_contact_force_n=avg_force,
        force_delta_rest_to_probe_n=delta,
        probe_duration_s=duration,
        dwell_force_drift_n=drift,
        max_force_n=float(force.max()),
        first_contact_time_s=first_contact,
        target_reached_time_s=reached,
    )


class _VisionTap:
    """Runs the render->trace->classify pipeline at a decimated cadence."""

    def __init__(self, cfg: ExperimentConfig):
        self.render_config = cfg.render_config
        self.extractor = FeatureExtractor(config=cfg.render_config)
        self.classifier = SoftmaxAreaClassifier()
        self.period = max(1, int(round(1.0 / (cfg.vision_rate_hz * cfg.dt))))
        self.last: tuple[str, float, float] | None = None

    def sample(self, step_index: int, position_mm: float) -> tuple[str, float, float]:
        from .vision.deformation_map import class_from_deformation

        if self.last is None or step_index % self.period == 0:
            frame = render_frame(position_mm, self.render_config)
            area = measure_silhouette_area(frame.pixels, self.extractor.edge_threshold)
            fraction = self.extractor.fraction_from_area(area)
            probs = self.classifier.classify(fraction)
            pct = optimized_deformation(probs)
            # The reported class inverts the deformation estimate back into
            # the class intervals, so it tracks the position ranges at every
            # depth; the probability vector stays the classifier's output.
            cls = class_from_deformation(min(fraction * 100.0, 100.0))
            self.last = (cls.name, pct, area)
        return self.last


def run_scenario(cfg: ExperimentConfig) -> tuple[list[TelemetrySample], RunSummary]:
    """Fixed-step simulation over the schedule; bit-reproducible given the seed."""
    cfg.validate()
    dt = cfg.dt
    plant = ToolPlant(tissue=cfg.tissue, drivetrain=cfg.drivetrain, dt=dt)
    chain = EstimationChain(
        drivetrain=cfg.drivetrain,
        sensor_cfg=cfg.sensor,
        current_sigma_a=cfg.current_noise_a,
        process_noise=cfg.process_noise,
        lowpass_cutoff_hz=cfg.lowpass_cutoff_hz,
        sample_dt=dt,
    )
    sensor_rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((cfg.seed, 1))
    ))
    current_rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((cfg.seed, 2))
    ))
    vision = _VisionTap(cfg) if cfg.vision_enabled else None

    schedule = cfg.schedule
    n_steps = int(round(schedule.end_time_s / dt))
    probe_traj: Trajectory | None = None
    retract_traj: Trajectory | None = None
    probe_step = retract_step = 0
    hold_mm = 0.0

    samples: list[TelemetrySample] = []
    for i in range(1, n_steps + 1):
        t = i * dt
        if probe_traj is None and t >= schedule.probe_time_s - 1e-12:
            probe_traj = plan_trapezoid(
                plant.state.position, schedule.target_mm, cfg.profile,
                cfg.drivetrain, dt,
            )
        if retract_traj is None and t >= schedule.retract_time_s - 1e-12:
            retract_traj = plan_trapezoid(
                plant.state.position, 0.0, cfg.profile, cfg.drivetrain, dt,
            )

        if retract_traj is not None and len(retract_traj) > 0:
            setpoint = float(
                retract_traj.positions[min(retract_step, len(retract_traj) - 1)]
            )
            retract_step += 1
        elif probe_traj is not None and len(probe_traj) > 0:
            setpoint = float(
                probe_traj.positions[min(probe_step, len(probe_traj) - 1)]
            )
            probe_step += 1
            hold_mm = setpoint
        else:
            setpoint = hold_mm

        state, contact_force = plant.advance(setpoint)
        measured_current = state.current
        if cfg.current_noise_a > 0.0:
            measured_current += float(current_rng.normal(0.0, cfg.current_noise_a))
        reading = simulate_ft_sensor(contact_force, cfg.sensor, sensor_rng, time=t)
        z1, z2, fused = chain.step(
            ChainSample(time=t, current_a=measured_current, sensor=reading)
        )

        cls_name = pct = area = None
        if vision is not None:
            cls_name, pct, area = vision.sample(i, state.position)

        samples.append(TelemetrySample(
            time=t,
            commanded_pos=setpoint,
            actual_pos=state.position,
            velocity=state.velocity,
            current=measured_current,
            f_current=z1.value,
            fx=reading.fx, fy=reading.fy, fz=reading.fz,
            mx=reading.mx, my=reading.my, mz=reading.mz,
            f_sensor_filtered=z2.value,
            f_fused=fused.value,
            deformation_class=cls_name,
            deformation_pct=pct,
            contour_area=area,
        ))

    contact_idx = next(
        (k for k, s in enumerate(samples)
         if s.actual_pos > cfg.tissue.contact_depth_mm),
        None,
    )
    if contact_idx is not None:
        w0 = samples[contact_idx].time + cfg.contact_settle_s
    else:
        w0 = schedule.probe_time_s + cfg.contact_settle_s
    summary = summarize(
        samples,
        contact_window=(w0, schedule.retract_time_s),
        contact_depth_mm=cfg.tissue.contact_depth_mm,
        target_mm=schedule.target_mm,
        probe_time_s=schedule.probe_time_s,
    )
    return samples, summary


# ---------------------------------------------------------------------------
# Vision evaluation (the per-class protocol and regression metrics)

def midpoint_protocol_records(
    frames_per_class: int = 100,
    seed: int = 0,
    render_config: RenderConfig | None = None,
):
    """The per-class test protocol: ``frames_per_class`` area-preserving
    variants of each class's range-midpoint frame, labeled and measured
    through the pipeline."""
    from .vision.dataset import AugmentationConfig, DatasetRecord, augment_frame
    from .vision.deformation_map import (
        DEFORMATION_CLASSES,
        class_midpoint_mm,
        ground_truth_deformation,
    )

    cfg = render_config or RenderConfig()
    aug = AugmentationConfig(rotation_prob=0.0, random_crop=0.0)
    records = []
    for cls in DEFORMATION_CLASSES:
        midpoint = class_midpoint_mm(cls)
        frame = render_frame(midpoint, cfg)
        for i in range(frames_per_class):
            rng = np.random.Generator(np.random.PCG64(
                np.random.SeedSequence((seed, cls.index, i))
            ))
            pixels, preserving = augment_frame(frame.pixels, aug, rng,
                                               fill=cfg.background_level)
            records.append(DatasetRecord(
                frame_path=f"protocol/{cls.name}_{i:03d}.pgm",
                knife_mm=midpoint,
                class_id=cls.name,
                ground_truth_pct=ground_truth_deformation(midpoint),
                contour_area_px2=measure_silhouette_area(pixels),
                split="test",
                augmented=i > 0,
                area_preserving=preserving,
            ))
    return records


@dataclass(frozen=True)
class VisionReport:
    per_class_accuracy: dict[str, float]
    confusion: np.ndarray            # rows: true class, cols: predicted
    regression_rmse_pct: float
    mean_abs_optimized_error_pct: float
    n_evaluated: int


def evaluate_vision(
    records,
    classifier: SoftmaxAreaClassifier,
    extractor: FeatureExtractor,
    regressor=None,
) -> VisionReport:
    """Per-class accuracy, confusion counts, regression RMSE, and the mean
    |optimized - ground truth| over a labeled record set."""
    from .vision.deformation_map import CLASSES_BY_NAME, DEFORMATION_CLASSES
    from .vision.regress import predict_deformation

    records = list(records)
    if not records:
        raise SummaryError("empty dataset")
    n = len(DEFORMATION_CLASSES)
    confusion = np.zeros((n, n), dtype=int)
    optimized_errors = []
    squared_errors = []
    for rec in records:
        true_cls = CLASSES_BY_NAME[rec.class_id]
        fraction = extractor.fraction_from_area(rec.contour_area_px2)
        predicted = classifier.predict_class(fraction)
        confusion[true_cls.index, predicted.index] += 1
        probs = classifier.classify(fraction)
        optimized_errors.append(
            abs(optimized_deformation(probs) - rec.ground_truth_pct)
        )
        if regressor is not None:
            pred_pct = predict_deformation(
                regressor, rec.contour_area_px2, extractor.reference_area
            )
            squared_errors.append((pred_pct - rec.ground_truth_pct) ** 2)

    per_class = {}
    for cls in DEFORMATION_CLASSES:
        total = int(confusion[cls.index].sum())
        correct = int(confusion[cls.index, cls.index])
        per_class[cls.name] = correct / total if total else math.nan
    return VisionReport(
        per_class_accuracy=per_class,
        confusion=confusion,
        regression_rmse_pct=(
            float(np.sqrt(np.mean(squared_errors))) if squared_errors else math.nan
        ),
        mean_abs_optimized_error_pct=float(np.mean(optimized_errors)),
        n_evaluated=len(records),
    )
