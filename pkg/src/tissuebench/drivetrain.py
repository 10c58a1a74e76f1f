"""Actuation model: gearmotor, rack-and-pinion, encoder, and motion planning.

Units follow the hardware conventions of the rig: tool-tip positions in mm,
motor speeds in rpm, torques in N*m, currents in A. The linear encoder map
(20000 counts over a 35 mm stroke, 1.75 um per count) is treated as exact;
rotary bookkeeping (motor shaft angle) stays internal to the conversions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, RangeError

TWO_PI = 2.0 * math.pi

# Guard for floor() on exact count boundaries; 1e-6 counts = 1.75 pm of travel.
_COUNT_EPS = 1e-6


@dataclass(frozen=True)
class DriveTrain:
    """Gearmotor + rack-and-pinion constants for one linear axis.

    ``torque_constant_nm_per_a`` and ``pinion_radius_m`` are rig configuration,
    not datasheet values; the defaults are chosen so the stock motion profile
    covers the stroke at the speeds the scenario presets expect.
    ``pinion_radius_m`` is the instantaneous radial distance used for the
    torque/force conversion and may be overridden per call where it varies.
    """

    gear_ratio: float = 10.0
    pinion_radius_m: float = 0.030
    torque_constant_nm_per_a: float = 0.0234
    encoder_counts_per_rev: int = 4096  # 1024 cpt, quadrature decoded
    linear_resolution_m: float = 1.75e-6
    stroke_mm: float = 35.0
    stroke_counts: int = 20000
    rotor_inertia_kgm2: float = 9.49e-7
    viscous_friction_nms: float = 1.0e-5  # motor-side, torque per rad/s
    current_limit_a: float | None = None

    def __post_init__(self) -> None:
        if self.gear_ratio < 1.0:
            raise ConfigError(f"gear_ratio must be >= 1, got {self.gear_ratio}")
        for name in ("pinion_radius_m", "torque_constant_nm_per_a",
                     "linear_resolution_m", "stroke_mm", "rotor_inertia_kgm2"):
            if getattr(self, name) <= 0.0:
                raise ConfigError(f"{name} must be > 0")
        if self.viscous_friction_nms < 0.0:
            raise ConfigError("viscous_friction_nms must be >= 0")
        if self.current_limit_a is not None and self.current_limit_a <= 0.0:
            raise ConfigError("current_limit_a must be > 0 when set")
        span = self.stroke_counts * self.linear_resolution_m * 1000.0
        if abs(span - self.stroke_mm) > 1e-9:
            raise ConfigError(
                f"stroke_counts x linear_resolution = {span} mm "
                f"must equal stroke = {self.stroke_mm} mm"
            )

    # -- rotary <-> linear conversions -------------------------------------

    @property
    def mm_per_motor_rev(self) -> float:
        return TWO_PI * self.pinion_radius_m * 1000.0 / self.gear_ratio

    def rpm_to_mm_per_s(self, rpm: float) -> float:
        return rpm / 60.0 * self.mm_per_motor_rev

    def motor_speed_rad_s(self, velocity_mm_s: float) -> float:
        """Motor shaft speed for a given tool-tip linear velocity."""
        return velocity_mm_s * 1e-3 * self.gear_ratio / self.pinion_radius_m

    def force_per_amp(self, radius_m: float | None = None) -> float:
        """Tool-tip force produced per ampere of motor current (N/A)."""
        r = self.pinion_radius_m if radius_m is None else radius_m
        return self.torque_constant_nm_per_a * self.gear_ratio / r

    def force_limit_n(self) -> float | None:
        """Static tool-tip force ceiling implied by the current limit."""
        if self.current_limit_a is None:
            return None
        return self.current_limit_a * self.force_per_amp()

    def with_force_limit(self, force_n: float | None) -> "DriveTrain":
        """Copy with the current limit set to cap tool-tip force at ``force_n``."""
        if force_n is None:
            return replace(self, current_limit_a=None)
        return replace(self, current_limit_a=force_n / self.force_per_amp())


def encoder_counts(position_mm: float, drivetrain: DriveTrain) -> int:
    """Quantize a tool-tip position to encoder counts (floor semantics)."""
    if not 0.0 <= position_mm <= drivetrain.stroke_mm:
        raise RangeError(
            f"position {position_mm} mm outside stroke [0, {drivetrain.stroke_mm}]"
        )
    quotient = position_mm * 1e-3 / drivetrain.linear_resolution_m
    return int(math.floor(quotient + _COUNT_EPS))


def counts_to_mm(counts: int, drivetrain: DriveTrain) -> float:
    """Inverse encoder map: counts back to mm."""
    if not 0 <= counts <= drivetrain.stroke_counts:
        raise RangeError(
            f"counts {counts} outside [0, {drivetrain.stroke_counts}]"
        )
    return counts * drivetrain.linear_resolution_m * 1000.0


@dataclass(frozen=True)
class MotionProfile:
    """Commanded motor-side speed/acceleration bounds."""

    max_speed_rpm: float = 200.0
    accel_rpm_s: float = 20000.0
    decel_rpm_s: float = 20000.0

    def __post_init__(self) -> None:
        if min(self.max_speed_rpm, self.accel_rpm_s, self.decel_rpm_s) <= 0.0:
            raise ConfigError("motion profile values must all be > 0")


@dataclass(frozen=True)
class Trajectory:
    """Time-indexed position/velocity setpoints for one move."""

    times: np.ndarray      # s, relative to move start; empty when start==target
    positions: np.ndarray  # mm
    velocities: np.ndarray # mm/s, signed
    duration: float        # s

    def __len__(self) -> int:
        return len(self.times)

    def setpoint_at(self, t: float, default: float) -> float:
        """Position setpoint at elapsed time ``t`` since the move was commanded;
        ``default`` when the trajectory is empty. Snaps to the nearest sample so
        float jitter in ``t`` cannot skip or repeat setpoints."""
        if len(self.times) == 0:
            return default
        if t >= self.duration:
            return float(self.positions[-1])
        sample_dt = float(self.times[0])
        idx = int(round(t / sample_dt)) if sample_dt > 0 else 0
        idx = min(max(idx, 0), len(self.positions) - 1)
        return float(self.positions[idx])


def plan_trapezoid(
    start_mm: float,
    target_mm: float,
    profile: MotionProfile,
    drivetrain: DriveTrain,
    dt: float = 1e-3,
) -> Trajectory:
    """Plan an accel/cruise/decel move between two tool-tip positions.

    Degenerates to a triangular profile when the distance is too short to
    reach cruise speed. The final sample is exactly the target.
    """
    stroke = drivetrain.stroke_mm
    for name, value in (("start", start_mm), ("target", target_mm)):
        if not 0.0 <= value <= stroke:
            raise RangeError(f"{name} {value} mm outside stroke [0, {stroke}]")
    if dt <= 0.0:
        raise ConfigError("dt must be > 0")

    distance = abs(target_mm - start_mm)
    if distance == 0.0:
        empty = np.array([], dtype=float)
        return Trajectory(empty, empty, empty, 0.0)
    direction = 1.0 if target_mm > start_mm else -1.0

    v_max = drivetrain.rpm_to_mm_per_s(profile.max_speed_rpm)
    accel = drivetrain.rpm_to_mm_per_s(profile.accel_rpm_s)  # per second
    decel = drivetrain.rpm_to_mm_per_s(profile.decel_rpm_s)

    d_accel = v_max * v_max / (2.0 * accel)
    d_decel = v_max * v_max / (2.0 * decel)
    if d_accel + d_decel <= distance:
        v_peak = v_max
        t_accel = v_max / accel
        t_decel = v_max / decel
        t_cruise = (distance - d_accel - d_decel) / v_max
    else:
        v_peak = math.sqrt(2.0 * distance * accel * decel / (accel + decel))
        t_accel = v_peak / accel
        t_decel = v_peak / decel
        t_cruise = 0.0
        d_accel = v_peak * v_peak / (2.0 * accel)
    duration = t_accel + t_cruise + t_decel

    n = max(1, int(math.ceil(duration / dt - 1e-12)))
    times = np.arange(1, n + 1, dtype=float) * dt
    times[-1] = duration

    positions = np.empty(n, dtype=float)
    velocities = np.empty(n, dtype=float)
    t_cruise_end = t_accel + t_cruise
    for i, t in enumerate(times):
        if t <= t_accel:
            s = 0.5 * accel * t * t
            v = accel * t
        elif t <= t_cruise_end:
            s = d_accel + v_peak * (t - t_accel)
            v = v_peak
        else:
            tau = duration - t
            s = distance - 0.5 * decel * tau * tau
            v = decel * tau
        positions[i] = start_mm + direction * s
        velocities[i] = direction * v
    positions[-1] = target_mm
    velocities[-1] = 0.0
    return Trajectory(times, positions, velocities, duration)


@dataclass(frozen=True)
class MotorState:
    """Instantaneous state of the linear axis."""

    position: float = 0.0          # mm, tool-tip
    velocity: float = 0.0          # mm/s
    current: float = 0.0           # A
    commanded_target: float = 0.0  # mm
    time: float = 0.0              # s

    def __post_init__(self) -> None:
        if not math.isfinite(self.current):
            raise ConfigError("motor current must be finite")


def step(
    state: MotorState,
    setpoint_mm: float,
    dt: float,
    load_force_n: float,
    drivetrain: DriveTrain,
    radius_m: float | None = None,
) -> MotorState:
    """Advance the axis one step under an ideal stiff position loop.

    The position snaps to the (stroke-clamped) setpoint; the drawn current is
    the torque balance of load, rotor inertia, and viscous friction. Callers
    that model torque saturation pre-limit the setpoint (see plant.ToolPlant).
    """
    if dt <= 0.0:
        raise ConfigError("dt must be > 0")
    r = drivetrain.pinion_radius_m if radius_m is None else radius_m
    new_pos = min(max(setpoint_mm, 0.0), drivetrain.stroke_mm)
    new_vel = (new_pos - state.position) / dt

    omega_prev = drivetrain.motor_speed_rad_s(state.velocity)
    omega_new = drivetrain.motor_speed_rad_s(new_vel)
    alpha = (omega_new - omega_prev) / dt

    torque = (
        load_force_n * r / drivetrain.gear_ratio
        + drivetrain.rotor_inertia_kgm2 * alpha
        + drivetrain.viscous_friction_nms * omega_new
    )
    current = torque / drivetrain.torque_constant_nm_per_a
    return MotorState(
        position=new_pos,
        velocity=new_vel,
        current=current,
        commanded_target=setpoint_mm,
        time=state.time + dt,
    )
