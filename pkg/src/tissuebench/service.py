"""Live teleoperation service: one simulated session behind HTTP + WebSocket.

A single asyncio task owns the simulation state and advances it against the
wall clock (scaled by ``time_scale``); command handlers only enqueue, and the
loop applies commands between steps and resolves their acknowledgements.
Telemetry fans out through per-subscriber bounded queues, so a stalled
client is disconnected instead of stalling the simulation.

HTTP surface:
    GET  /state    -> JSON session state
    GET  /presets  -> JSON list of shipped tissue presets
    GET  /frame    -> current rendered top-view (PNG; ?format=pgm for P5)
    POST /command  -> JSON command, answered with a JSON ack
    WS   /telemetry -> ordered JSON telemetry messages at the wire rate
"""

from __future__ import annotations

import asyncio
import json
import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from aiohttp import WSMsgType, web

from .drivetrain import MotionProfile, Trajectory, plan_trapezoid
from .errors import ConfigError
from .estimation import ChainSample, EstimationChain, SensorConfig, simulate_ft_sensor
from .plant import ToolPlant
from .presets import PRESET_NAMES, load_experiment_config
from .vision import (
    FeatureExtractor,
    RenderConfig,
    SoftmaxAreaClassifier,
    optimized_deformation,
    render_frame,
)
from .vision.render import encode_png

COMMAND_KINDS = ("jog", "probe", "retract", "select_tissue", "set_profile",
                 "pause", "resume")


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8790
    tissue_preset: str = "ecoflex10"
    time_scale: float = 1.0        # >1 slows the simulation down (teaching mode)
    tick_s: float = 0.02           # wall interval between sim batches
    telemetry_hz: float = 50.0     # wire rate; sim runs at 1 kHz internally
    vision_hz: float = 5.0
    backlog: int = 256             # per-subscriber queue bound
    send_timeout_s: float = 5.0    # per-frame send budget before dropping
    seed: int = 0

    def __post_init__(self) -> None:
        if self.time_scale <= 0.0:
            raise ConfigError("time_scale must be > 0")
        if self.telemetry_hz <= 0.0 or self.vision_hz <= 0.0:
            raise ConfigError("rates must be > 0")
        if self.backlog < 1:
            raise ConfigError("backlog must be >= 1")


class TeleopSession:
    """Simulation state plus command semantics. Owned by the sim loop task."""

    def __init__(self, cfg: ServiceConfig):
        self.cfg = cfg
        self.dt = 1e-3
        self.time = 0.0
        self.step_index = 0
        self.paused = False
        self.preset = cfg.tissue_preset
        self.profile = MotionProfile()
        self._load_preset(cfg.tissue_preset)
        self.render_config = RenderConfig()
        self.extractor = FeatureExtractor(config=self.render_config)
        self.classifier = SoftmaxAreaClassifier()
        self.trajectory: Trajectory | None = None
        self.traj_step = 0
        self.hold_mm = 0.0
        self.sensor_rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence((cfg.seed, 1))
        ))
        self.current_rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence((cfg.seed, 2))
        ))
        self.vision_period = max(1, int(round(1.0 / (cfg.vision_hz * self.dt))))
        self.last_vision: dict[str, Any] = {}
        self.latest: dict[str, Any] | None = None
        self.client_count = 0
        self._seen_sequences: dict[str, int] = {}
        self._run_vision()

    def _load_preset(self, name: str) -> None:
        exp = load_experiment_config(name, seed=self.cfg.seed)
        position = 0.0 if not hasattr(self, "plant") else self.plant.state.position
        self.plant = ToolPlant(tissue=exp.tissue, drivetrain=exp.drivetrain, dt=self.dt)
        self.plant.reset(position_mm=position, time_s=self.time)
        self.chain = EstimationChain(
            drivetrain=exp.drivetrain,
            sensor_cfg=SensorConfig(),
            sample_dt=self.dt,
        )
        self.preset = name
        self.hold_mm = position

    @property
    def moving(self) -> bool:
        return self.trajectory is not None and self.traj_step < len(self.trajectory)

    # -- commands -----------------------------------------------------------

    def apply_command(self, cmd: dict[str, Any]) -> dict[str, Any]:
        """Validate and apply one command; returns its acknowledgement."""
        kind = cmd.get("kind")
        client_id = str(cmd.get("client_id", ""))
        seq = cmd.get("sequence_number")
        ack: dict[str, Any] = {
            "client_id": client_id,
            "sequence_number": seq,
            "kind": kind,
            "accepted": False,
            "reason": None,
        }
        if kind not in COMMAND_KINDS:
            ack["reason"] = f"unknown command kind {kind!r}"
            return ack
        if seq is not None and client_id:
            last = self._seen_sequences.get(client_id)
            if last is not None and seq <= last:
                ack["reason"] = (
                    f"sequence_number {seq} not after {last} for this client"
                )
                return ack

        def _number(key: str, default: float | None = None) -> float | None:
            value = cmd.get(key, default)
            if value is None:
                return None
            number = float(value)  # ValueError -> rejected below
            if not math.isfinite(number):
                raise ValueError(f"{key} must be finite")
            return number

        stroke = self.plant.drivetrain.stroke_mm
        reason: str | None = None
        try:
            if kind == "probe":
                target = _number("target_mm")
                if target is None:
                    reason = "probe requires target_mm"
                elif self.moving:
                    reason = "busy: a motion is already in progress"
                elif not 0.0 <= target <= stroke:
                    reason = f"target exceeds {stroke:g} mm stroke"
                else:
                    self._start_move(target)
            elif kind == "jog":
                delta = _number("delta_mm", 0.0) or 0.0
                if self.moving:
                    reason = "busy: a motion is already in progress"
                else:
                    target = min(max(self.plant.state.position + delta, 0.0), stroke)
                    self._start_move(target)
            elif kind == "retract":
                if self.moving:
                    reason = "busy: a motion is already in progress"
                else:
                    self._start_move(0.0)
            elif kind == "select_tissue":
                preset = str(cmd.get("preset", ""))
                if preset not in PRESET_NAMES:
                    reason = f"unknown preset {preset!r}"
                elif self.moving:
                    reason = "busy: cannot swap tissue while moving"
                else:
                    self._load_preset(preset)
            elif kind == "set_profile":
                self.profile = MotionProfile(
                    max_speed_rpm=_number("max_speed_rpm", 200.0) or 200.0,
                    accel_rpm_s=_number("accel_rpm_s", 20000.0) or 20000.0,
                    decel_rpm_s=_number("decel_rpm_s", 20000.0) or 20000.0,
                )
            elif kind == "pause":
                self.paused = True
            elif kind == "resume":
                self.paused = False
        except (TypeError, ValueError, ConfigError) as exc:
            reason = f"invalid command argument: {exc}"

        if reason is not None:
            ack["reason"] = reason
            return ack
        if seq is not None and client_id:
            self._seen_sequences[client_id] = seq
        ack["accepted"] = True
        return ack

    def _start_move(self, target_mm: float) -> None:
        self.trajectory = plan_trapezoid(
            self.plant.state.position, target_mm, self.profile,
            self.plant.drivetrain, self.dt,
        )
        self.traj_step = 0
        self.hold_mm = target_mm

    # -- stepping -----------------------------------------------------------

    def step_once(self) -> dict[str, Any]:
        """Advance the simulation one step; returns the telemetry message."""
        self.step_index += 1
        self.time += self.dt
        if self.trajectory is not None and len(self.trajectory) > 0:
            idx = min(self.traj_step, len(self.trajectory) - 1)
            setpoint = float(self.trajectory.positions[idx])
            self.traj_step += 1
            if self.traj_step >= len(self.trajectory):
                self.trajectory = None
        else:
            self.trajectory = None
            setpoint = self.hold_mm

        state, contact_force = self.plant.advance(setpoint)
        current = state.current + float(
            self.current_rng.normal(0.0, self.chain.current_sigma_a)
        )
        reading = simulate_ft_sensor(
            contact_force, self.chain.sensor_cfg, self.sensor_rng, time=self.time
        )
        z1, z2, fused = self.chain.step(
            ChainSample(time=self.time, current_a=current, sensor=reading)
        )
        if self.step_index % self.vision_period == 0:
            self._run_vision()

        message = {
            "t": round(self.time, 6),
            "cmd_pos": setpoint,
            "pos": state.position,
            "current": current,
            "f_current": z1.value,
            "f_sensor": z2.value,
            "f_fused": fused.value,
            "class": self.last_vision["class"],
            "class_probs": self.last_vision["probs"],
            "deformation_pct": self.last_vision["pct"],
            "contour_area": self.last_vision["area"],
        }
        self.latest = message
        return message

    def _run_vision(self) -> None:
        from .vision.deformation_map import class_from_deformation
        from .vision.features import measure_silhouette_area

        frame = render_frame(self.plant.state.position, self.render_config)
        area = measure_silhouette_area(frame.pixels, self.extractor.edge_threshold)
        fraction = self.extractor.fraction_from_area(area)
        probs = self.classifier.classify(fraction)
        # Displayed class follows the deformation intervals (position-range
        # semantics); the probability bars carry the classifier's output.
        cls = class_from_deformation(min(fraction * 100.0, 100.0))
        self.last_vision = {
            "class": cls.name,
            "probs": [float(p) for p in probs.p],
            "pct": optimized_deformation(probs),
            "area": float(area),
        }

    def current_frame_png(self) -> bytes:
        return encode_png(render_frame(self.plant.state.position, self.render_config).pixels)

    def current_frame_pgm(self) -> bytes:
        frame = render_frame(self.plant.state.position, self.render_config)
        arr = frame.pixels
        header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
        return header + arr.tobytes()

    def state_doc(self) -> dict[str, Any]:
        return {
            "tissue_preset": self.preset,
            "motion_in_progress": self.moving,
            "paused": self.paused,
            "time_s": self.time,
            "time_scale": self.cfg.time_scale,
            "connected_clients": self.client_count,
            "latest": self.latest,
        }


# ---------------------------------------------------------------------------
# aiohttp wiring

_SESSION_KEY = web.AppKey("session", TeleopSession)
_SUBSCRIBERS_KEY = web.AppKey("subscribers", list)
_COMMANDS_KEY = web.AppKey("commands", asyncio.Queue)
_CONFIG_KEY = web.AppKey("config", ServiceConfig)


@dataclass
class _Subscriber:
    queue: asyncio.Queue
    task: asyncio.Task | None = None
    dropped: bool = False


async def _sim_loop(app: web.Application) -> None:
    cfg: ServiceConfig = app[_CONFIG_KEY]
    session: TeleopSession = app[_SESSION_KEY]
    commands: asyncio.Queue = app[_COMMANDS_KEY]
    subscribers: list[_Subscriber] = app[_SUBSCRIBERS_KEY]
    wire_period = max(1, int(round(1.0 / (cfg.telemetry_hz * session.dt))))
    carry = 0.0
    try:
        while True:
            await asyncio.sleep(cfg.tick_s)
            while not commands.empty():
                cmd, future = commands.get_nowait()
                try:
                    ack = session.apply_command(cmd)
                except Exception as exc:  # noqa: BLE001 - loop must survive bad input
                    ack = {
                        "client_id": str(cmd.get("client_id", ""))
                        if isinstance(cmd, dict) else "",
                        "sequence_number": cmd.get("sequence_number")
                        if isinstance(cmd, dict) else None,
                        "kind": cmd.get("kind") if isinstance(cmd, dict) else None,
                        "accepted": False,
                        "reason": f"malformed command: {exc}",
                    }
                if not future.done():
                    future.set_result(ack)
            if session.paused:
                continue
            carry += cfg.tick_s / (session.dt * cfg.time_scale)
            n_steps = int(carry)
            carry -= n_steps
            for _ in range(n_steps):
                message = session.step_once()
                if session.step_index % wire_period == 0:
                    _broadcast(subscribers, message)
                    # Yield so subscriber handlers can drain between wire
                    # samples; queues only overflow for genuinely slow peers.
                    await asyncio.sleep(0)
    except asyncio.CancelledError:
        pass


def _broadcast(subscribers: list[_Subscriber], message: dict[str, Any]) -> None:
    for sub in list(subscribers):
        try:
            sub.queue.put_nowait(message)
        except asyncio.QueueFull:
            # Bounded backlog exceeded: stop feeding this subscriber rather
            # than stalling the simulation. A full queue means its handler is
            # parked inside a backpressured send; it checks the flag as soon
            # as that send resolves and then closes the socket itself.
            subscribers.remove(sub)
            sub.dropped = True


async def _handle_state(request: web.Request) -> web.Response:
    session: TeleopSession = request.app[_SESSION_KEY]
    return web.json_response(session.state_doc())


async def _handle_presets(request: web.Request) -> web.Response:
    return web.json_response({"presets": list(PRESET_NAMES)})


async def _handle_frame(request: web.Request) -> web.Response:
    session: TeleopSession = request.app[_SESSION_KEY]
    fmt = request.query.get("format", "png").lower()
    if fmt == "pgm":
        return web.Response(body=session.current_frame_pgm(),
                            content_type="image/x-portable-graymap")
    return web.Response(body=session.current_frame_png(), content_type="image/png")


async def _handle_command(request: web.Request) -> web.Response:
    try:
        cmd = await request.json()
    except json.JSONDecodeError:
        return web.json_response(
            {"accepted": False, "reason": "body must be JSON"}, status=400
        )
    future: asyncio.Future = asyncio.get_running_loop().create_future()
    await request.app[_COMMANDS_KEY].put((cmd, future))
    ack = await future
    return web.json_response(ack)


async def _handle_telemetry(request: web.Request) -> web.WebSocketResponse:
    cfg: ServiceConfig = request.app[_CONFIG_KEY]
    session: TeleopSession = request.app[_SESSION_KEY]
    subscribers: list[_Subscriber] = request.app[_SUBSCRIBERS_KEY]
    ws = web.WebSocketResponse()
    await ws.prepare(request)
    sub = _Subscriber(queue=asyncio.Queue(maxsize=cfg.backlog))
    sub.task = asyncio.current_task()
    subscribers.append(sub)
    session.client_count += 1

    async def _reader() -> None:
        # Drain (and ignore) client frames so pings/closes are processed.
        async for _msg in ws:
            if _msg.type in (WSMsgType.CLOSE, WSMsgType.ERROR):
                break

    reader_task = asyncio.ensure_future(_reader())
    loop = asyncio.get_running_loop()
    task = asyncio.current_task()

    def _expire() -> None:
        # The send has been parked in a backpressured drain for the whole
        # budget: mark the peer slow and unpark the handler.
        sub.dropped = True
        if sub in subscribers:
            subscribers.remove(sub)
        if task is not None:
            task.cancel()

    try:
        while not ws.closed:
            if sub.dropped:
                await ws.close(code=1013, message=b"telemetry backlog exceeded")
                break
            message = await sub.queue.get()
            watchdog = loop.call_later(cfg.send_timeout_s, _expire)
            try:
                # Plain send: when the transport is not backpressured this
                # completes without yielding, so one handler turn drains an
                # arbitrarily large burst of queued samples.
                await ws.send_str(json.dumps(message))
            finally:
                watchdog.cancel()
    except ConnectionResetError:
        pass
    except asyncio.CancelledError:
        if not sub.dropped:
            raise  # server shutdown, not a backlog drop
        try:
            await ws.close(code=1013, message=b"telemetry backlog exceeded")
        except Exception:  # noqa: BLE001 - peer already unreachable
            pass
    finally:
        reader_task.cancel()
        if sub in subscribers:
            subscribers.remove(sub)
        session.client_count -= 1
    return ws


async def _lifecycle(app: web.Application):
    task = asyncio.ensure_future(_sim_loop(app))
    yield
    task.cancel()
    try:
        await task
    except asyncio.CancelledError:
        pass


@web.middleware
async def _cors_middleware(request: web.Request, handler):
    # The operator console is served from its own origin during development.
    if request.method == "OPTIONS":
        response = web.Response(status=204)
    else:
        response = await handler(request)
    response.headers["Access-Control-Allow-Origin"] = "*"
    response.headers["Access-Control-Allow-Methods"] = "GET, POST, OPTIONS"
    response.headers["Access-Control-Allow-Headers"] = "Content-Type"
    return response


def create_app(cfg: ServiceConfig | None = None) -> web.Application:
    cfg = cfg or ServiceConfig()
    app = web.Application(middlewares=[_cors_middleware])
    app[_CONFIG_KEY] = cfg
    app[_SESSION_KEY] = TeleopSession(cfg)
    app[_SUBSCRIBERS_KEY] = []
    app[_COMMANDS_KEY] = asyncio.Queue()
    app.cleanup_ctx.append(_lifecycle)
    app.router.add_get("/state", _handle_state)
    app.router.add_get("/presets", _handle_presets)
    app.router.add_get("/frame", _handle_frame)
    app.router.add_post("/command", _handle_command)
    app.router.add_get("/telemetry", _handle_telemetry)
    return app


def serve(cfg: ServiceConfig | None = None) -> None:
    """Run the service until interrupted (binds before accepting commands)."""
    cfg = cfg or ServiceConfig()
    web.run_app(create_app(cfg), host=cfg.host, port=cfg.port)
