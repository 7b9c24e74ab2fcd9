import { writeFileSync } from "fs";

import { loadCsv } from "./csv";
import {
  PLOT_KINDS,
  PlotKind,
  UNIT_NORMS,
  elementsPlot,
  energyErrorPlot,
  momentumErrorPlot,
  rotationErrorPlot,
  stateDifferencePlot,
  trajectoryPlot,
} from "./plots";

interface Args {
  kind: PlotKind;
  states?: string;
  statesB?: string;
  diag?: string;
  out: string;
  mu?: number;
  normLength: number;
  normVelocity: number;
  normRate: number;
}

const USAGE = `usage: plot --kind KIND --out FILE.svg [inputs]

kinds and required inputs:
  trajectory        --states states.csv
  energy_error      --diag diagnostics.csv
  momentum_error    --diag diagnostics.csv
  rotation_error    --diag diagnostics.csv
  state_difference  --states a.csv --states-b b.csv
                    [--norm-length A --norm-velocity V --norm-rate N]
  elements          --states states.csv --mu MU

All inputs are the CSV files written by the simulator.`;

export function parseArgs(argv: string[]): Args {
  const take = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--") || i + 1 >= argv.length) {
      throw new Error(USAGE);
    }
    take.set(key.slice(2), argv[i + 1]);
  }
  const kind = take.get("kind") as PlotKind | undefined;
  if (!kind || !PLOT_KINDS.includes(kind)) {
    throw new Error(`unknown plot kind '${kind}'\n${USAGE}`);
  }
  const out = take.get("out");
  if (!out) {
    throw new Error(`--out is required\n${USAGE}`);
  }
  const num = (key: string, fallback: number) => {
    const raw = take.get(key);
    const value = raw === undefined ? fallback : Number(raw);
    if (!(value > 0)) {
      throw new Error(`--${key} must be a positive number`);
    }
    return value;
  };
  return {
    kind,
    out,
    states: take.get("states"),
    statesB: take.get("states-b"),
    diag: take.get("diag"),
    mu: take.has("mu") ? Number(take.get("mu")) : undefined,
    normLength: num("norm-length", UNIT_NORMS.length),
    normVelocity: num("norm-velocity", UNIT_NORMS.velocity),
    normRate: num("norm-rate", UNIT_NORMS.rate),
  };
}

function need(value: string | undefined, flag: string): string {
  if (!value) {
    throw new Error(`--${flag} is required for this plot kind\n${USAGE}`);
  }
  return value;
}

export function renderFromArgs(args: Args): string {
  switch (args.kind) {
    case "trajectory":
      return trajectoryPlot(loadCsv(need(args.states, "states")));
    case "energy_error":
      return energyErrorPlot(loadCsv(need(args.diag, "diag")));
    case "momentum_error":
      return momentumErrorPlot(loadCsv(need(args.diag, "diag")));
    case "rotation_error":
      return rotationErrorPlot(loadCsv(need(args.diag, "diag")));
    case "state_difference":
      return stateDifferencePlot(
        loadCsv(need(args.states, "states")),
        loadCsv(need(args.statesB, "states-b")),
        {
          length: args.normLength,
          velocity: args.normVelocity,
          rate: args.normRate,
        }
      );
    case "elements": {
      const mu = args.mu;
      if (!mu || !(mu > 0)) {
        throw new Error(`--mu (gravitational parameter) is required\n${USAGE}`);
      }
      return elementsPlot(loadCsv(need(args.states, "states")), mu);
    }
  }
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
    const svg = renderFromArgs(args);
    writeFileSync(args.out, svg);
    console.log(`wrote ${args.kind} plot to ${args.out}`);
    return 0;
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    return 2;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
