import { readFileSync } from "fs";

export interface Table {
  header: string[];
  rows: number[][];
}

/** Parse a simulator CSV: one header row, numeric cells, comma-delimited. */
export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.trim().length > 0);
  if (lines.length < 2) {
    throw new Error("CSV needs a header row and at least one data row");
  }
  const header = lines[0].split(",").map((h) => h.trim());
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== header.length) {
      throw new Error(
        `CSV row ${i + 1} has ${cells.length} cells, expected ${header.length}`
      );
    }
    rows.push(cells.map(Number));
  }
  return { header, rows };
}

export function loadCsv(path: string): Table {
  return parseCsv(readFileSync(path, "utf8"));
}

/** Single column by header name. */
export function column(table: Table, name: string): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new Error(`CSV is missing required column '${name}'`);
  }
  return table.rows.map((row) => row[idx]);
}

/** Consecutive 3-vector columns starting at the named component. */
export function vector3(table: Table, first: string): [number, number, number][] {
  const idx = table.header.indexOf(first);
  if (idx < 0 || idx + 2 >= table.header.length) {
    throw new Error(`CSV is missing vector columns starting at '${first}'`);
  }
  return table.rows.map((row) => [row[idx], row[idx + 1], row[idx + 2]]);
}

export function sub3(
  a: [number, number, number],
  b: [number, number, number]
): [number, number, number] {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

export function norm3(v: [number, number, number]): number {
  return Math.hypot(v[0], v[1], v[2]);
}

/**
 * Index alignment of a probe time grid against a reference grid by nearest
 * sample.  Throws when the nearest sample is farther than `tolerance`.
 */
export function alignTimes(
  reference: number[],
  probe: number[],
  tolerance: number
): number[] {
  const indices: number[] = [];
  let j = 0;
  for (const t of probe) {
    while (j + 1 < reference.length && Math.abs(reference[j + 1] - t) <= Math.abs(reference[j] - t)) {
      j++;
    }
    if (Math.abs(reference[j] - t) > tolerance) {
      throw new Error(
        `time grids misaligned: no sample within ${tolerance} of t=${t}`
      );
    }
    indices.push(j);
  }
  return indices;
}
