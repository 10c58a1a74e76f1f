// Wire contract with the teleoperation service. Field names and units are
// stable; every displayed number originates from one of these messages.

export interface TelemetryMessage {
  t: number;                // s
  cmd_pos: number;          // mm
  pos: number;              // mm
  current: number;          // A
  f_current: number;        // N
  f_sensor: number;         // N, low-pass filtered
  f_fused: number;          // N
  class: string;            // Compress00..Compress03
  class_probs: number[];    // 4 entries
  deformation_pct: number;  // optimized (probability-weighted) percent
  contour_area: number;     // px^2
}

export interface CommandAck {
  client_id: string;
  sequence_number: number | null;
  kind: string;
  accepted: boolean;
  reason: string | null;
}

export interface SessionState {
  tissue_preset: string;
  motion_in_progress: boolean;
  paused: boolean;
  time_s: number;
  time_scale: number;
  connected_clients: number;
  latest: TelemetryMessage | null;
}

export type Command =
  | { kind: "probe"; target_mm: number }
  | { kind: "jog"; delta_mm: number }
  | { kind: "retract" }
  | { kind: "select_tissue"; preset: string }
  | { kind: "pause" }
  | { kind: "resume" };

export const STROKE_MM = 35;
export const CLASS_NAMES = ["Compress00", "Compress01", "Compress02", "Compress03"];
