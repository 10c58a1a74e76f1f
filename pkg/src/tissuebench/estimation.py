"""Force-sensing chain: current-based estimation, simulated F/T sensor,
low-pass filtering, and scalar Kalman fusion of the two streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable

import numpy as np

from .drivetrain import DriveTrain
from .errors import ConfigError, ContractError, KinematicsError, StreamError


class ForceSource(Enum):
    CURRENT = "current"
    SENSOR = "sensor"
    FUSED = "fused"


@dataclass(frozen=True)
class ForceEstimate:
    value: float            # N
    variance: float         # N^2
    source: ForceSource
    time: float = 0.0       # s

    def __post_init__(self) -> None:
        if self.variance <= 0.0:
            raise ContractError("force estimate variance must be > 0")


DEFAULT_CURRENT_NOISE_A = 0.01


def force_from_current(
    current_a: float,
    drivetrain: DriveTrain,
    radius_m: float | None = None,
    current_sigma_a: float = DEFAULT_CURRENT_NOISE_A,
    time: float = 0.0,
) -> ForceEstimate:
    """Tool-tip force implied by the drawn motor current.

    ``radius_m`` is the instantaneous radial distance of the rack-pinion
    contact; defaults to the drivetrain's nominal pinion radius. The variance
    is the configured current-noise sigma propagated through the same linear
    map.
    """
    r = drivetrain.pinion_radius_m if radius_m is None else radius_m
    if r <= 0.0:
        raise KinematicsError(f"radial distance must be > 0, got {r}")
    gain = drivetrain.torque_constant_nm_per_a * drivetrain.gear_ratio / r
    sigma = max(current_sigma_a, 1e-12)
    return ForceEstimate(
        value=gain * current_a,
        variance=(gain * sigma) ** 2,
        source=ForceSource.CURRENT,
        time=time,
    )


# ---------------------------------------------------------------------------
# Simulated six-axis force/torque sensor

FORCE_RANGE_N = 50.0
TORQUE_RANGE_NM = 1.0
MAX_CROSSTALK = 1e-3  # <0.1% coupling between axes


def default_crosstalk() -> np.ndarray:
    """Fixed sub-0.1% coupling matrix; sign pattern alternates off-diagonal."""
    c = np.eye(6)
    for i in range(6):
        for j in range(6):
            if i != j:
                c[i, j] = 8e-4 * (1.0 if (i + j) % 2 == 0 else -1.0)
    return c


@dataclass(frozen=True)
class SensorConfig:
    noise_sigma_n: float = 0.5
    crosstalk: np.ndarray = field(default_factory=default_crosstalk)
    force_saturation_n: float = FORCE_RANGE_N
    torque_saturation_nm: float = TORQUE_RANGE_NM
    axial_axis: int = 2  # fz carries the probing force
    seed: int = 0

    def __post_init__(self) -> None:
        ct = np.asarray(self.crosstalk, dtype=float)
        if ct.shape != (6, 6):
            raise ConfigError("crosstalk matrix must be 6x6")
        if not np.allclose(np.diag(ct), 1.0, atol=0.0):
            raise ConfigError("crosstalk diagonal must be exactly 1")
        off = ct - np.diag(np.diag(ct))
        if np.max(np.abs(off)) > MAX_CROSSTALK:
            raise ConfigError(f"off-diagonal crosstalk must be <= {MAX_CROSSTALK}")
        if self.noise_sigma_n < 0.0:
            raise ConfigError("noise sigma must be >= 0")
        if not 0 <= self.axial_axis < 3:
            raise ConfigError("axial axis must index a force channel (0..2)")
        object.__setattr__(self, "crosstalk", ct)


@dataclass(frozen=True)
class SixAxisReading:
    fx: float
    fy: float
    fz: float
    mx: float
    my: float
    mz: float
    time: float = 0.0

    def forces(self) -> tuple[float, float, float]:
        return (self.fx, self.fy, self.fz)

    def moments(self) -> tuple[float, float, float]:
        return (self.mx, self.my, self.mz)

    def as_array(self) -> np.ndarray:
        return np.array([self.fx, self.fy, self.fz, self.mx, self.my, self.mz])


def simulate_ft_sensor(
    true_axial_force_n: float,
    cfg: SensorConfig,
    rng: np.random.Generator,
    time: float = 0.0,
) -> SixAxisReading:
    """One sensor sample for a purely axial applied wrench.

    The axial channel reads the true force plus Gaussian noise; the other
    channels pick up crosstalk couplings of the wrench plus noise. All
    channels saturate to the sensor range. Deterministic for a given
    generator state.
    """
    wrench = np.zeros(6)
    wrench[cfg.axial_axis] = true_axial_force_n
    reading = cfg.crosstalk @ wrench
    if cfg.noise_sigma_n > 0.0:
        reading = reading + rng.normal(0.0, cfg.noise_sigma_n, size=6)
    reading[:3] = np.clip(reading[:3], -cfg.force_saturation_n, cfg.force_saturation_n)
    reading[3:] = np.clip(reading[3:], -cfg.torque_saturation_nm, cfg.torque_saturation_nm)
    return SixAxisReading(*reading.tolist(), time=time)


# ---------------------------------------------------------------------------
# First-order low-pass filter

@dataclass
class LowPassFilter:
    """First-order IIR low-pass: y += alpha * (x - y).

    The first sample after a reset passes through unchanged (the state seeds
    from it), avoiding a multi-second startup transient at 0.1 Hz. Call
    ``reset(value)`` to start from a known settled output instead.
    """

    cutoff_hz: float = 0.1
    sample_dt: float = 1e-3
    state: float | None = None

    def __post_init__(self) -> None:
        if self.cutoff_hz <= 0.0:
            raise ConfigError("cutoff must be > 0")
        if self.sample_dt <= 0.0:
            raise ConfigError("sample_dt must be > 0")

    @property
    def alpha(self) -> float:
        rc = 1.0 / (2.0 * math.pi * self.cutoff_hz)
        return self.sample_dt / (self.sample_dt + rc)

    def reset(self, value: float | None = None) -> None:
        self.state = value

    def __call__(self, sample: float) -> float:
        return lowpass_step(self, sample)


def lowpass_step(filt: LowPassFilter, sample: float) -> float:
    """Advance the filter by one sample and return the new output."""
    if filt.state is None:
        filt.state = float(sample)
    else:
        filt.state += filt.alpha * (sample - filt.state)
    return filt.state


# ---------------------------------------------------------------------------
# Scalar Kalman fusion

@dataclass(frozen=True)
class FusionState:
    """Random-walk scalar Kalman state over the probing-axis force."""

    x: float = 0.0           # N, fused force
    p: float = 1.0           # N^2, posterior variance
    q: float = 0.0025        # N^2 added per predict step
    r1: float = 1.0          # N^2, configured current-estimate variance
    r2: float = 1.0          # N^2, configured sensor variance

    def __post_init__(self) -> None:
        if not self.p > 0.0:  # rejects zero, negatives, and nan; allows +inf
            raise ContractError("posterior variance must be > 0")
        if self.q < 0.0:
            raise ContractError("process noise must be >= 0")


def _scalar_update(x: float, p: float, z: float, r: float) -> tuple[float, float]:
    if r <= 0.0:
        raise ContractError("measurement variance must be > 0")
    if math.isinf(p):
        return z, r
    gain = p / (p + r)
    # p*r/(p+r) rather than (1-gain)*p: identical algebra, but never rounds
    # to zero when one variance dwarfs the other.
    return x + gain * (z - x), p * r / (p + r)


def kalman_fuse_step(
    state: FusionState,
    z1: ForceEstimate | None,
    z2: ForceEstimate | None,
) -> FusionState:
    """Predict (random walk) then apply sequential scalar updates.

    With both sources present the posterior variance is strictly below each
    measurement variance; with one source missing a single update is applied.
    """
    if z1 is None and z2 is None:
        raise ContractError("at least one measurement is required")
    x, p = state.x, state.p
    if not math.isinf(p):
        p = p + state.q
    for z in (z1, z2):
        if z is not None:
            x, p = _scalar_update(x, p, z.value, z.variance)
    return FusionState(x=x, p=p, q=state.q, r1=state.r1, r2=state.r2)


# ---------------------------------------------------------------------------
# The full chain: current estimate -> z1, sensor -> low-pass -> z2 -> fuse

@dataclass(frozen=True)
class ChainSample:
    """One raw measurement step entering the chain."""

    time: float
    current_a: float
    sensor: SixAxisReading


@dataclass
class EstimationChain:
    """Stateful per-step runner of the two-source fusion chain."""

    drivetrain: DriveTrain
    sensor_cfg: SensorConfig
    current_sigma_a: float = DEFAULT_CURRENT_NOISE_A
    process_noise: float = 0.0025
    lowpass_cutoff_hz: float = 0.1
    sample_dt: float = 1e-3
    filter: LowPassFilter = field(init=False)
    fusion: FusionState = field(init=False)

    def __post_init__(self) -> None:
        self.filter = LowPassFilter(cutoff_hz=self.lowpass_cutoff_hz,
                                    sample_dt=self.sample_dt)
        r1 = max(
            force_from_current(0.0, self.drivetrain,
                               current_sigma_a=self.current_sigma_a).variance,
            1e-12,
        )
        r2 = max(self.sensor_cfg.noise_sigma_n, 1e-6) ** 2
        self.fusion = FusionState(x=0.0, p=max(r1, r2), q=self.process_noise,
                                  r1=r1, r2=r2)

    def step(self, sample: ChainSample) -> tuple[ForceEstimate, ForceEstimate, ForceEstimate]:
        """Returns (current estimate, filtered sensor estimate, fused estimate)."""
        z1 = force_from_current(
            sample.current_a, self.drivetrain,
            current_sigma_a=self.current_sigma_a, time=sample.time,
        )
        axial = sample.sensor.as_array()[self.sensor_cfg.axial_axis]
        filtered = lowpass_step(self.filter, float(axial))
        z2 = ForceEstimate(value=filtered, variance=self.fusion.r2,
                           source=ForceSource.SENSOR, time=sample.time)
        z1 = replace(z1, variance=self.fusion.r1)
        self.fusion = kalman_fuse_step(self.fusion, z1, z2)
        fused = ForceEstimate(value=self.fusion.x, variance=self.fusion.p,
                              source=ForceSource.FUSED, time=sample.time)
        return z1, z2, fused


def run_chain(
    samples: Iterable[ChainSample],
    drivetrain: DriveTrain | None = None,
    sensor_cfg: SensorConfig | None = None,
    **chain_kwargs,
) -> list[ForceEstimate]:
    """Run the fusion chain over a finished stream; one fused estimate per input."""
    chain = EstimationChain(
        drivetrain=drivetrain or DriveTrain(),
        sensor_cfg=sensor_cfg or SensorConfig(),
        **chain_kwargs,
    )
    fused: list[ForceEstimate] = []
    last_time = -math.inf
    for sample in samples:
        if sample.time <= last_time:
            raise StreamError(
                f"timestamp regression: {sample.time} after {last_time}"
            )
        last_time = sample.time
        fused.append(chain.step(sample)[2])
    return fused
