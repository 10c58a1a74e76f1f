"""Closed-loop single-axis plant: position loop against the tissue contact law.

The loop is ideally stiff until the motor current limit binds. When the force
needed to track the setpoint through the tissue exceeds what the limited
current can deliver, the step solves the Kelvin-Voigt force balance for the
furthest position the budget allows, producing the slow creep (and the
interrupted position profile) seen when probing stiff phantoms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .drivetrain import DriveTrain, MotorState, step
from .errors import ConfigError
from .materials import TissueModel, reaction_force


@dataclass
class ToolPlant:
    """Owns the mutable state of one probing axis. Not thread-safe; single owner."""

    tissue: TissueModel
    drivetrain: DriveTrain = field(default_factory=DriveTrain)
    dt: float = 1e-3
    state: MotorState = field(default_factory=MotorState)
    _contacted: bool = field(default=False, repr=False)

    def __post_init__(self) -> None:
        if self.dt <= 0.0:
            raise ConfigError("dt must be > 0")
        if self.tissue.contact_depth_mm > self.drivetrain.stroke_mm:
            raise ConfigError("contact depth beyond the stroke")

    def reset(self, position_mm: float = 0.0, time_s: float = 0.0) -> None:
        self.state = MotorState(position=position_mm, time=time_s,
                                commanded_target=position_mm)
        self._contacted = position_mm > self.tissue.contact_depth_mm

    def _limited_setpoint(self, setpoint_mm: float) -> float:
        """Clamp the inbound setpoint to what the force budget can reach."""
        cap = self.drivetrain.force_limit_n()
        if cap is None:
            return setpoint_mm
        x = self.state.position
        target = min(max(setpoint_mm, 0.0), self.drivetrain.stroke_mm)
        if target <= x:
            return setpoint_mm  # retracting or holding: tissue force assists
        depth_gain = target - self.tissue.contact_depth_mm
        if depth_gain <= 0.0:
            return setpoint_mm  # still in free space
        k = self.tissue.stiffness_n_per_mm
        c = self.tissue.damping_ns_per_mm
        demanded = k * depth_gain + c * (target - x) / self.dt
        if demanded <= cap:
            return setpoint_mm
        # Solve k*(x_new - contact) + c*(x_new - x)/dt = cap for x_new.
        x_new = (cap + k * self.tissue.contact_depth_mm + c * x / self.dt) / (k + c / self.dt)
        return min(target, max(x_new, x))

    def advance(self, setpoint_mm: float) -> tuple[MotorState, float]:
        """Advance one step toward ``setpoint_mm``; returns (state, contact force N)."""
        reachable = self._limited_setpoint(setpoint_mm)
        new_pos = min(max(reachable, 0.0), self.drivetrain.stroke_mm)
        velocity = (new_pos - self.state.position) / self.dt

        first_contact = (
            not self._contacted and new_pos > self.tissue.contact_depth_mm
        )
        force = reaction_force(
            self.tissue, new_pos, velocity,
            first_contact=first_contact,
            stroke_mm=self.drivetrain.stroke_mm,
        )
        if first_contact:
            self._contacted = True
        elif new_pos <= self.tissue.contact_depth_mm:
            self._contacted = False

        # Current reflects the signed load: the tissue pushes back while
        # advancing, assists while retracting.
        load = force if velocity >= 0.0 else -force
        stepped = step(self.state, reachable, self.dt, load, self.drivetrain)
        current = stepped.current
        limit = self.drivetrain.current_limit_a
        if limit is not None and abs(current) > limit:
            current = limit if current > 0.0 else -limit
        # Keep the reported command at the caller's setpoint, not the limited one.
        self.state = MotorState(
            position=stepped.position,
            velocity=stepped.velocity,
            current=current,
            commanded_target=setpoint_mm,
            time=stepped.time,
        )
        return self.state, force
