import { describe, expect, it } from "vitest";

import { ConsoleState } from "../src/state";
import type { TelemetryMessage } from "../src/types";

function message(t: number, overrides: Partial<TelemetryMessage> = {}): TelemetryMessage {
  return {
    t,
    cmd_pos: 10,
    pos: 9.5,
    current: 0.2,
    f_current: 1.5,
    f_sensor: 1.4,
    f_fused: 1.45,
    class: "Compress00",
    class_probs: [0.9, 0.07, 0.02, 0.01],
    deformation_pct: 3.2,
    contour_area: 103000,
    ...overrides,
  };
}

describe("ConsoleState ring buffer", () => {
  it("stays time-ordered and rejects regressions", () => {
    const state = new ConsoleState(30);
    state.ingest(message(1.0));
    state.ingest(message(2.0));
    state.ingest(message(1.5)); // regression: dropped
    state.ingest(message(2.0)); // duplicate: dropped
    expect(state.trace().map((m) => m.t)).toEqual([1.0, 2.0]);
  });

  it("evicts samples older than the configured depth", () => {
    const state = new ConsoleState(10);
    for (let t = 1; t <= 25; t++) state.ingest(message(t));
    const times = state.trace().map((m) => m.t);
    expect(Math.min(...times)).toBeGreaterThanOrEqual(25 - 10);
    expect(Math.max(...times)).toBe(25);
  });

  it("keeps the latest message intact", () => {
    const state = new ConsoleState(30);
    state.ingest(message(1.0));
    state.ingest(message(2.0, { pos: 20.25, class: "Compress02" }));
    expect(state.latest()?.pos).toBe(20.25);
    expect(state.latest()?.class).toBe("Compress02");
  });
});

describe("ConsoleState display values", () => {
  it("are taken verbatim from the newest telemetry message", () => {
    const state = new ConsoleState(30);
    const wire = message(4.25, {
      f_current: 2.2599999999,
      f_sensor: 2.1234,
      f_fused: 2.2001,
      class_probs: [0.0213, 0.9783, 0.004, 0],
      deformation_pct: 32.5519,
      contour_area: 91258.0,
    });
    state.ingest(wire);
    const shown = state.display();
    expect(shown).not.toBeNull();
    expect(shown!.f_current).toBe(wire.f_current);
    expect(shown!.f_sensor).toBe(wire.f_sensor);
    expect(shown!.f_fused).toBe(wire.f_fused);
    expect(shown!.class_probs).toEqual(wire.class_probs);
    expect(shown!.deformation_pct).toBe(wire.deformation_pct);
    expect(shown!.contour_area).toBe(wire.contour_area);
    expect(shown!.class).toBe(wire.class);
  });

  it("is null before any telemetry arrives", () => {
    expect(new ConsoleState().display()).toBeNull();
  });
});

describe("ConsoleState command lifecycle", () => {
  it("tracks at most one unacknowledged command", () => {
    const state = new ConsoleState();
    const seq = state.beginCommand();
    expect(state.commandInFlight).toBe(true);
    state.resolveAck(seq, true, null);
    expect(state.commandInFlight).toBe(false);
    expect(state.lastAckReason).toBeNull();
  });

  it("surfaces the rejection reason verbatim", () => {
    const state = new ConsoleState();
    const seq = state.beginCommand();
    state.resolveAck(seq, false, "target exceeds 35 mm stroke");
    expect(state.lastAckReason).toBe("target exceeds 35 mm stroke");
  });

  it("ignores stale acks from older commands", () => {
    const state = new ConsoleState();
    const old = state.beginCommand();
    state.resolveAck(old, true, null);
    const current = state.beginCommand();
    state.resolveAck(old, false, "late rejection");
    expect(state.commandInFlight).toBe(true);
    state.resolveAck(current, true, null);
    expect(state.commandInFlight).toBe(false);
  });

  it("issues strictly increasing sequence numbers", () => {
    const state = new ConsoleState();
    const a = state.beginCommand();
    state.resolveAck(a, true, null);
    const b = state.beginCommand();
    expect(b).toBeGreaterThan(a);
  });
});
