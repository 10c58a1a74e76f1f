// Console state: a time-ordered ring buffer of telemetry plus the pending
// command bookkeeping. Pure logic, no DOM: every displayed value is read
// back out of the stored messages verbatim, which is what makes the
// display-vs-transcript check possible.

import type { TelemetryMessage } from "./types";

export type ConnectionStatus = "connecting" | "live" | "stale" | "closed";

export interface DisplayValues {
  t: number;
  pos: number;
  cmd_pos: number;
  f_current: number;
  f_sensor: number;
  f_fused: number;
  class: string;
  class_probs: number[];
  deformation_pct: number;
  contour_area: number;
}

export class ConsoleState {
  readonly bufferSeconds: number;
  private buffer: TelemetryMessage[] = [];
  status: ConnectionStatus = "connecting";
  pendingSequence: number | null = null;
  lastAckReason: string | null = null;
  selectedPreset = "ecoflex10";
  private nextSequence = 1;

  constructor(bufferSeconds = 30) {
    this.bufferSeconds = bufferSeconds;
  }

  ingest(message: TelemetryMessage): void {
    const last = this.buffer[this.buffer.length - 1];
    if (last && message.t <= last.t) {
      return; // out-of-order or duplicate; the buffer stays time-ordered
    }
    this.buffer.push(message);
    const horizon = message.t - this.bufferSeconds;
    let drop = 0;
    while (drop < this.buffer.length && this.buffer[drop].t < horizon) {
      drop++;
    }
    if (drop > 0) {
      this.buffer.splice(0, drop);
    }
    this.status = "live";
  }

  latest(): TelemetryMessage | null {
    return this.buffer.length ? this.buffer[this.buffer.length - 1] : null;
  }

  trace(): readonly TelemetryMessage[] {
    return this.buffer;
  }

  size(): number {
    return this.buffer.length;
  }

  // Values the panels show, taken verbatim from the newest message.
  display(): DisplayValues | null {
    const m = this.latest();
    if (!m) return null;
    return {
      t: m.t,
      pos: m.pos,
      cmd_pos: m.cmd_pos,
      f_current: m.f_current,
      f_sensor: m.f_sensor,
      f_fused: m.f_fused,
      class: m.class,
      class_probs: m.class_probs,
      deformation_pct: m.deformation_pct,
      contour_area: m.contour_area,
    };
  }

  // Command lifecycle: at most one in flight, highlighted until its ack.
  beginCommand(): number {
    const seq = this.nextSequence++;
    this.pendingSequence = seq;
    this.lastAckReason = null;
    return seq;
  }

  get commandInFlight(): boolean {
    return this.pendingSequence !== null;
  }

  resolveAck(sequence: number | null, accepted: boolean, reason: string | null): void {
    if (sequence !== null && sequence !== this.pendingSequence) {
      return; // stale ack for an older command
    }
    this.pendingSequence = null;
    this.lastAckReason = accepted ? null : reason;
  }

  markStale(): void {
    if (this.status === "live") this.status = "stale";
  }

  markClosed(): void {
    this.status = "closed";
  }
}
