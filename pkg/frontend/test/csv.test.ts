import { describe, expect, it } from "vitest";

import { alignTimes, column, norm3, parseCsv, sub3, vector3 } from "../src/csv";

const SAMPLE = `t,a,b_x,b_y,b_z
0,1.5,1,0,0
1,2.5,0,2,0
2,3.5,0,0,3
`;

describe("parseCsv", () => {
  it("parses header and numeric rows", () => {
    const table = parseCsv(SAMPLE);
    expect(table.header).toEqual(["t", "a", "b_x", "b_y", "b_z"]);
    expect(table.rows).toHaveLength(3);
    expect(table.rows[1][1]).toBe(2.5);
  });

  it("round-trips 17-significant-digit values", () => {
    const value = "5.1961524227066329";
    const table = parseCsv(`t,a,b_x,b_y,b_z\n0,${value},0,0,0\n`);
    expect(table.rows[0][1]).toBe(Number(value));
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("a,b\n1,2\n3\n")).toThrow(/row 3/);
  });

  it("rejects empty input", () => {
    expect(() => parseCsv("a,b\n")).toThrow(/header/);
  });
});

describe("columns", () => {
  it("extracts named columns and vectors", () => {
    const table = parseCsv(SAMPLE);
    expect(column(table, "a")).toEqual([1.5, 2.5, 3.5]);
    expect(vector3(table, "b_x")[2]).toEqual([0, 0, 3]);
    expect(norm3(sub3([1, 2, 2], [1, 0, 0]))).toBeCloseTo(Math.sqrt(8), 12);
  });

  it("reports missing columns", () => {
    const table = parseCsv(SAMPLE);
    expect(() => column(table, "missing")).toThrow(/missing/);
  });
});

describe("alignTimes", () => {
  it("finds nearest samples", () => {
    const indices = alignTimes([0, 1, 2, 3], [0.1, 1.9, 3.0], 0.2);
    expect(indices).toEqual([0, 2, 3]);
  });

  it("throws beyond the tolerance", () => {
    expect(() => alignTimes([0, 10], [4.9], 1.0)).toThrow(/misaligned/);
  });
});
