"""Teleoperation service: command semantics, HTTP surface, telemetry
ordering, fan-out, and slow-subscriber disconnection."""

from __future__ import annotations

import asyncio
import json

import pytest
from aiohttp.test_utils import TestClient, TestServer

from tissuebench.service import (
    ServiceConfig,
    TeleopSession,
    create_app,
)

# Fast pacing for tests: 100x faster than wall clock, frequent ticks.
FAST = dict(time_scale=0.01, tick_s=0.005)


def run_async(coro):
    return asyncio.new_event_loop().run_until_complete(coro)


# ---------------------------------------------------------------------------
# session-level command semantics (no network)

def _session(**kwargs) -> TeleopSession:
    return TeleopSession(ServiceConfig(**{**FAST, **kwargs}))


def test_probe_accepted_and_moves():
    session = _session()
    ack = session.apply_command({"kind": "probe", "target_mm": 20.0,
                                 "client_id": "c1", "sequence_number": 1})
    assert ack["accepted"] is True
    assert ack["sequence_number"] == 1
    for _ in range(2000):
        session.step_once()
    assert session.plant.state.position == pytest.approx(20.0)


def test_probe_beyond_stroke_rejected_with_reason():
    session = _session()
    ack = session.apply_command({"kind": "probe", "target_mm": 40.0})
    assert ack["accepted"] is False
    assert ack["reason"] == "target exceeds 35 mm stroke"


def test_probe_while_moving_rejected_busy():
    session = _session()
    assert session.apply_command({"kind": "probe", "target_mm": 20.0})["accepted"]
    session.step_once()
    ack = session.apply_command({"kind": "probe", "target_mm": 10.0})
    assert ack["accepted"] is False
    assert "busy" in ack["reason"]


def test_jog_clamps_to_stroke():
    session = _session()
    session.apply_command({"kind": "probe", "target_mm": 34.8})
    for _ in range(2000):
        session.step_once()
    ack = session.apply_command({"kind": "jog", "delta_mm": 1.0})
    assert ack["accepted"] is True
    for _ in range(500):
        session.step_once()
    assert session.plant.state.position == pytest.approx(35.0)


def test_select_tissue_unknown_preset_rejected():
    session = _session()
    ack = session.apply_command({"kind": "select_tissue", "preset": "granite"})
    assert ack["accepted"] is False
    assert "unknown preset" in ack["reason"]


def test_select_tissue_switches_model():
    session = _session()
    before = session.plant.tissue
    ack = session.apply_command({"kind": "select_tissue", "preset": "ecoflex30"})
    assert ack["accepted"] is True
    assert session.preset == "ecoflex30"
    assert session.plant.tissue.stiffness_n_per_mm > before.stiffness_n_per_mm


def test_sequence_numbers_must_increase_per_client():
    session = _session()
    first = session.apply_command({"kind": "pause", "client_id": "c1",
                                   "sequence_number": 5})
    assert first["accepted"]
    replay = session.apply_command({"kind": "resume", "client_id": "c1",
                                    "sequence_number": 5})
    assert replay["accepted"] is False
    other_client = session.apply_command({"kind": "resume", "client_id": "c2",
                                          "sequence_number": 5})
    assert other_client["accepted"]


def test_unknown_command_kind_rejected():
    session = _session()
    ack = session.apply_command({"kind": "launch"})
    assert ack["accepted"] is False


def test_malformed_arguments_rejected_not_raised():
    session = _session()
    ack = session.apply_command({"kind": "probe", "target_mm": "twenty"})
    assert ack["accepted"] is False
    assert "invalid command argument" in ack["reason"]
    ack = session.apply_command({"kind": "jog", "delta_mm": float("nan")})
    assert ack["accepted"] is False
    ack = session.apply_command({"kind": "set_profile", "max_speed_rpm": -5})
    assert ack["accepted"] is False
    # The session is still healthy afterwards.
    assert session.apply_command({"kind": "probe", "target_mm": 10.0})["accepted"]


def test_pause_halts_motion_resume_continues():
    session = _session()
    session.apply_command({"kind": "probe", "target_mm": 5.0})
    session.apply_command({"kind": "pause"})
    assert session.paused is True
    session.apply_command({"kind": "resume"})
    assert session.paused is False


def test_telemetry_message_schema():
    session = _session()
    message = session.step_once()
    assert list(message.keys()) == [
        "t", "cmd_pos", "pos", "current", "f_current", "f_sensor", "f_fused",
        "class", "class_probs", "deformation_pct", "contour_area",
    ]
    assert isinstance(message["class_probs"], list)
    assert len(message["class_probs"]) == 4
    assert message["class"] == "Compress00"


# ---------------------------------------------------------------------------
# HTTP + WS surface

async def _with_client(config: ServiceConfig, fn):
    app = create_app(config)
    server = TestServer(app)
    client = TestClient(server)
    await client.start_server()
    try:
        return await fn(client)
    finally:
        await client.close()


def test_http_state_presets_frame():
    async def scenario(client: TestClient):
        resp = await client.get("/state")
        assert resp.status == 200
        state = await resp.json()
        assert state["tissue_preset"] == "ecoflex10"
        assert state["motion_in_progress"] is False

        resp = await client.get("/presets")
        assert (await resp.json())["presets"] == ["ecoflex10", "ecoflex30"]

        resp = await client.get("/frame")
        assert resp.status == 200
        body = await resp.read()
        assert body[:8] == b"\x89PNG\r\n\x1a\n"

        resp = await client.get("/frame?format=pgm")
        assert (await resp.read())[:2] == b"P5"

    run_async(_with_client(ServiceConfig(**FAST), scenario))


def test_command_endpoint_acks():
    async def scenario(client: TestClient):
        resp = await client.post("/command", json={
            "kind": "probe", "target_mm": 20.0,
            "client_id": "web", "sequence_number": 1,
        })
        ack = await resp.json()
        assert ack["accepted"] is True
        assert ack["sequence_number"] == 1

        resp = await client.post("/command", json={
            "kind": "probe", "target_mm": 99.0,
            "client_id": "web", "sequence_number": 2,
        })
        ack = await resp.json()
        assert ack["accepted"] is False
        assert ack["reason"] == "target exceeds 35 mm stroke"

        resp = await client.post("/command", data=b"not json")
        assert resp.status == 400

        # Structurally-valid JSON with a garbage argument never kills the
        # simulation loop; it comes back as a rejected ack.
        resp = await client.post("/command", json={
            "kind": "probe", "target_mm": "NaN-ish",
        })
        ack = await resp.json()
        assert ack["accepted"] is False
        state = await (await client.get("/state")).json()
        before = state["time_s"]
        await asyncio.sleep(0.1)
        state = await (await client.get("/state")).json()
        assert state["time_s"] > before  # loop survived

    run_async(_with_client(ServiceConfig(**FAST), scenario))


def test_telemetry_stream_ordered_and_advancing():
    async def scenario(client: TestClient):
        ws = await client.ws_connect("/telemetry")
        await client.post("/command", json={"kind": "probe", "target_mm": 25.0})
        times = []
        positions = []
        for _ in range(60):
            msg = await asyncio.wait_for(ws.receive_json(), timeout=5.0)
            times.append(msg["t"])
            positions.append(msg["pos"])
        await ws.close()
        assert times == sorted(times)
        assert len(set(times)) == len(times)  # no duplicates
        # Wire decimation: 50 Hz in simulation time regardless of time scale.
        deltas = {round(b - a, 6) for a, b in zip(times, times[1:])}
        assert deltas == {0.02}
        assert max(positions) > min(positions)  # the probe visibly moved
        assert positions[-1] > 0.0

    run_async(_with_client(ServiceConfig(**FAST), scenario))


def test_two_subscribers_receive_identical_streams():
    async def scenario(client: TestClient):
        ws1 = await client.ws_connect("/telemetry")
        ws2 = await client.ws_connect("/telemetry")
        # Let both register before sampling.
        first1 = await asyncio.wait_for(ws1.receive_json(), timeout=5.0)
        first2 = await asyncio.wait_for(ws2.receive_json(), timeout=5.0)
        # Align the two streams on the later starting timestamp.
        while first1["t"] < first2["t"]:
            first1 = await asyncio.wait_for(ws1.receive_json(), timeout=5.0)
        while first2["t"] < first1["t"]:
            first2 = await asyncio.wait_for(ws2.receive_json(), timeout=5.0)
        assert first1 == first2
        for _ in range(10):
            a = await asyncio.wait_for(ws1.receive_json(), timeout=5.0)
            b = await asyncio.wait_for(ws2.receive_json(), timeout=5.0)
            assert a == b
        await ws1.close()
        await ws2.close()

    run_async(_with_client(ServiceConfig(**FAST), scenario))


def test_broadcast_overflow_marks_subscriber_dropped():
    from tissuebench.service import _broadcast, _Subscriber

    sub = _Subscriber(queue=asyncio.Queue(maxsize=2))
    subscribers = [sub]
    for i in range(3):
        _broadcast(subscribers, {"t": i})
    assert sub.dropped is True
    assert subscribers == []
    assert sub.queue.qsize() == 2  # bounded backlog was never exceeded


def test_slow_subscriber_disconnected_not_stalling_sim(monkeypatch):
    # Fault injection: park this subscriber's sends the way a saturated TCP
    # drain would, and verify the server cuts it loose with a close reason
    # while the simulation keeps advancing.
    from aiohttp import web as aiohttp_web

    real_send = aiohttp_web.WebSocketResponse.send_str

    async def stalled_send(self, data, *args, **kwargs):
        await asyncio.sleep(3600.0)
        return await real_send(self, data, *args, **kwargs)

    monkeypatch.setattr(aiohttp_web.WebSocketResponse, "send_str", stalled_send)

    async def scenario(client: TestClient):
        ws = await client.ws_connect("/telemetry")
        state0 = await (await client.get("/state")).json()
        closed = False
        deadline = asyncio.get_event_loop().time() + 15.0
        while asyncio.get_event_loop().time() < deadline:
            msg = await ws.receive(timeout=15.0)
            if msg.type.name in ("CLOSE", "CLOSING", "CLOSED"):
                closed = True
                break
        assert closed, "stalled subscriber was never disconnected"
        assert ws.close_code == 1013
        state1 = await (await client.get("/state")).json()
        assert state1["time_s"] > state0["time_s"]  # sim kept running

    run_async(_with_client(
        ServiceConfig(**{**FAST, "backlog": 8, "send_timeout_s": 0.5}), scenario))

def test_state_latest_reflects_simulation():
    async def scenario(client: TestClient):
        await asyncio.sleep(0.2)
        state = await (await client.get("/state")).json()
        assert state["latest"] is not None
        assert state["latest"]["class"] == "Compress00"
        assert state["time_s"] > 0.0

    run_async(_with_client(ServiceConfig(**FAST), scenario))
