"""tissuebench: deterministic testbed for robotic tool-tissue interaction.

Reproduces a bench-top probing rig in software: a single-axis plant with a
viscoelastic tissue phantom, the two-source force-estimation chain (motor
current + external F/T sensor fused by a scalar Kalman filter), and a
synthetic-vision deformation pipeline (contour areas, four-class
classification, continuous regression), plus a scenario harness and a live
teleoperation service.
"""

from .drivetrain import (
    DriveTrain,
    MotionProfile,
    MotorState,
    Trajectory,
    counts_to_mm,
    encoder_counts,
    plan_trapezoid,
    step,
)
from .materials import (
    ECOFLEX_10,
    ECOFLEX_30,
    CalibrationTargets,
    MaterialProps,
    TissueModel,
    calibrate,
    reaction_force,
)
from .plant import ToolPlant
from .estimation import (
    ChainSample,
    EstimationChain,
    ForceEstimate,
    ForceSource,
    FusionState,
    LowPassFilter,
    SensorConfig,
    SixAxisReading,
    force_from_current,
    kalman_fuse_step,
    lowpass_step,
    run_chain,
    simulate_ft_sensor,
)
from .harness import (
    ExperimentConfig,
    RunSummary,
    ScheduleConfig,
    evaluate_vision,
    run_scenario,
    summarize,
)
from .telemetry import TelemetrySample, read_telemetry_csv, write_telemetry_csv
from .presets import load_experiment_config, tissue_preset

__version__ = "0.1.0"
