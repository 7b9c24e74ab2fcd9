export interface OrbitShape {
  a: number;
  e: number;
}

/**
 * Osculating semi-major axis and eccentricity from a relative state.
 * Hyperbolic states give a < 0, e > 1.
 */
export function osculatingShape(
  x: [number, number, number],
  v: [number, number, number],
  mu: number
): OrbitShape {
  const r = Math.hypot(x[0], x[1], x[2]);
  if (r === 0) {
    throw new Error("zero radius has no osculating elements");
  }
  const v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
  const h: [number, number, number] = [
    x[1] * v[2] - x[2] * v[1],
    x[2] * v[0] - x[0] * v[2],
    x[0] * v[1] - x[1] * v[0],
  ];
  const energy = 0.5 * v2 - mu / r;
  if (energy === 0) {
    throw new Error("parabolic state has no finite semi-major axis");
  }
  const a = -mu / (2 * energy);
  // e from the vis-viva relations: e^2 = 1 - h^2 / (mu a)
  const h2 = h[0] * h[0] + h[1] * h[1] + h[2] * h[2];
  const e2 = 1 - h2 / (mu * a);
  return { a, e: Math.sqrt(Math.max(e2, 0)) };
}
