import { Table, alignTimes, column, norm3, sub3, vector3 } from "./csv";
import { osculatingShape } from "./elements";
import { ChartOptions, renderChart, renderStacked } from "./svg";

export type PlotKind =
  | "trajectory"
  | "energy_error"
  | "momentum_error"
  | "rotation_error"
  | "state_difference"
  | "elements";

export const PLOT_KINDS: PlotKind[] = [
  "trajectory",
  "energy_error",
  "momentum_error",
  "rotation_error",
  "state_difference",
  "elements",
];

export interface Normalization {
  /** semi-major axis, for position differences (m) */
  length: number;
  /** equivalent circular velocity, for velocity differences (m/s) */
  velocity: number;
  /** equivalent mean motion, for angular-velocity differences (rad/s) */
  rate: number;
}

export const UNIT_NORMS: Normalization = { length: 1, velocity: 1, rate: 1 };

export function trajectoryPlot(states: Table): string {
  const x1 = vector3(states, "x1_x");
  const x2 = vector3(states, "x2_x");
  return renderChart({
    title: "Inertial centroid trajectories",
    xLabel: "x (m)",
    yLabel: "y (m)",
    equalAspect: true,
    series: [
      { label: "body 1", x: x1.map((p) => p[0]), y: x1.map((p) => p[1]) },
      { label: "body 2", x: x2.map((p) => p[0]), y: x2.map((p) => p[1]) },
    ],
  });
}

export function energyErrorPlot(diag: Table): string {
  const t = column(diag, "t");
  const e = column(diag, "E");
  const dE = e.map((v) => v - e[0]);
  return renderChart({
    title: "Total energy deviation",
    xLabel: "t (s)",
    yLabel: "E(t) - E(0) (J)",
    series: [{ label: "dE", x: t, y: dE }],
  });
}

export function momentumErrorPlot(diag: Table): string {
  const t = column(diag, "t");
  const pi = vector3(diag, "piT_x");
  const dPi = pi.map((p) => norm3(sub3(p, pi[0])));
  return renderChart({
    title: "Total angular momentum deviation",
    xLabel: "t (s)",
    yLabel: "|pi(t) - pi(0)|",
    logY: true,
    series: [{ label: "|dpi|", x: t, y: dPi }],
  });
}

export function rotationErrorPlot(diag: Table): string {
  const t = column(diag, "t");
  return renderChart({
    title: "Rotation orthogonality error",
    xLabel: "t (s)",
    yLabel: "|I - R^T R|_F",
    logY: true,
    series: [
      { label: "relative attitude", x: t, y: column(diag, "errR") },
      { label: "body 2 attitude", x: t, y: column(diag, "errR2") },
    ],
  });
}

/**
 * Pointwise differences of two state histories on a shared time grid
 * (nearest-sample alignment), normalized per the run's orbit constants.
 */
export function stateDifferencePlot(
  a: Table,
  b: Table,
  norms: Normalization,
  tolerance?: number
): string {
  const ta = column(a, "t");
  const tb = column(b, "t");
  const spanA = ta.length > 1 ? (ta[ta.length - 1] - ta[0]) / (ta.length - 1) : 1;
  const tol = tolerance ?? spanA / 2;
  const idx = alignTimes(ta, tb, tol);

  const xa = vector3(a, "x2_x");
  const va = vector3(a, "v2_x");
  const oa = vector3(a, "Om2_x");
  const xb = vector3(b, "x2_x");
  const vb = vector3(b, "v2_x");
  const ob = vector3(b, "Om2_x");

  const dPos: number[] = [];
  const dVel: number[] = [];
  const dRate: number[] = [];
  idx.forEach((ia, ib) => {
    dPos.push(norm3(sub3(xa[ia], xb[ib])) / norms.length);
    dVel.push(norm3(sub3(va[ia], vb[ib])) / norms.velocity);
    dRate.push(norm3(sub3(oa[ia], ob[ib])) / norms.rate);
  });
  return renderChart({
    title: "Body-2 state differences between runs",
    xLabel: "t (s)",
    yLabel: "normalized difference",
    logY: true,
    series: [
      { label: "position / a", x: tb, y: dPos },
      { label: "velocity / sqrt(mu/a)", x: tb, y: dVel },
      { label: "angular rate / sqrt(mu/a^3)", x: tb, y: dRate },
    ],
  });
}

export function elementsPlot(states: Table, mu: number): string {
  const t = column(states, "t");
  const x1 = vector3(states, "x1_x");
  const x2 = vector3(states, "x2_x");
  const v1 = vector3(states, "v1_x");
  const v2 = vector3(states, "v2_x");
  const a: number[] = [];
  const e: number[] = [];
  for (let i = 0; i < t.length; i++) {
    const shape = osculatingShape(sub3(x1[i], x2[i]), sub3(v1[i], v2[i]), mu);
    a.push(shape.a);
    e.push(shape.e);
  }
  const top: ChartOptions = {
    title: "Osculating semi-major axis",
    xLabel: "t (s)",
    yLabel: "a (m)",
    series: [{ label: "a", x: t, y: a }],
    height: 300,
  };
  const bottom: ChartOptions = {
    title: "Osculating eccentricity",
    xLabel: "t (s)",
    yLabel: "e",
    series: [{ label: "e", x: t, y: e }],
    height: 300,
  };
  return renderStacked(top, bottom);
}
