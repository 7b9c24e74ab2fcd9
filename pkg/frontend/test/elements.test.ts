import { describe, expect, it } from "vitest";

import { osculatingShape } from "../src/elements";

describe("osculatingShape", () => {
  it("recovers a circular orbit", () => {
    const mu = 3.264e-7;
    const a = 4.0;
    const v = Math.sqrt(mu / a);
    const shape = osculatingShape([a, 0, 0], [0, v, 0], mu);
    expect(shape.a).toBeCloseTo(a, 12);
    expect(shape.e).toBeLessThan(1e-7);
  });

  it("recovers an elliptic orbit from perigee", () => {
    const mu = 1.0;
    const a = 2.0;
    const e = 0.3;
    const rp = a * (1 - e);
    const vp = Math.sqrt((mu * (1 + e)) / (a * (1 - e)));
    const shape = osculatingShape([rp, 0, 0], [0, vp, 0], mu);
    expect(shape.a).toBeCloseTo(a, 10);
    expect(shape.e).toBeCloseTo(e, 10);
  });

  it("flags hyperbolic states with a < 0 and e > 1", () => {
    const mu = 1.0;
    const shape = osculatingShape([2, 0, 0], [0, 1.5, 0], mu);
    expect(shape.a).toBeLessThan(0);
    expect(shape.e).toBeGreaterThan(1);
  });
});
