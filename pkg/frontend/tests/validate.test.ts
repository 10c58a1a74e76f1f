import { describe, expect, it } from "vitest";

import { validateJogDelta, validateProbeTarget } from "../src/validate";

describe("client-side probe validation", () => {
  it("accepts targets within the stroke", () => {
    expect(validateProbeTarget(0)).toBeNull();
    expect(validateProbeTarget(20)).toBeNull();
    expect(validateProbeTarget(35)).toBeNull();
  });

  it("blocks out-of-stroke targets before any POST", () => {
    expect(validateProbeTarget(40)).toBe("target exceeds 35 mm stroke");
    expect(validateProbeTarget(35.01)).toBe("target exceeds 35 mm stroke");
    expect(validateProbeTarget(-1)).toBe("target must be >= 0 mm");
  });

  it("rejects non-numeric input", () => {
    expect(validateProbeTarget(Number.NaN)).toBe("target must be a number");
    expect(validateProbeTarget(Number.POSITIVE_INFINITY)).not.toBeNull();
  });
});

describe("client-side jog validation", () => {
  it("accepts sane deltas", () => {
    expect(validateJogDelta(1)).toBeNull();
    expect(validateJogDelta(-1)).toBeNull();
  });

  it("rejects absurd deltas", () => {
    expect(validateJogDelta(100)).not.toBeNull();
    expect(validateJogDelta(Number.NaN)).not.toBeNull();
  });
});
