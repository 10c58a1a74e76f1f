// Client-side command validation. The server revalidates everything; this
// only blocks obviously-invalid input before it leaves the browser.

import { STROKE_MM } from "./types";

export function validateProbeTarget(target: number): string | null {
  if (!Number.isFinite(target)) {
    return "target must be a number";
  }
  if (target < 0) {
    return "target must be >= 0 mm";
  }
  if (target > STROKE_MM) {
    return `target exceeds ${STROKE_MM} mm stroke`;
  }
  return null;
}

export function validateJogDelta(delta: number): string | null {
  if (!Number.isFinite(delta)) {
    return "jog delta must be a number";
  }
  if (Math.abs(delta) > STROKE_MM) {
    return `jog delta larger than the ${STROKE_MM} mm stroke`;
  }
  return null;
}
