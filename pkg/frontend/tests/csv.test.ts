import { describe, expect, it } from "vitest";

import { parseReport } from "../src/csv.js";
import { SchemaMismatch } from "../src/schemas.js";

const DECAY = `m,bound,corner_norm,pass
8.0,1.39e-07,5.17e-19,true
10.0,2.74e-08,5.17e-19,true
12.0,5.42e-09,5.17e-19,false
`;

const CONVERGENCE = `level,h_x,h_s,error,order_x,order_s
0,0.125,0.125,0.0349,,
1,0.0625,0.03125,0.009565,1.8677284316681628,0.9338642158340814
`;

const AMPLIFICATION = `j,tau,predicted,measured
1,0.05,1.6380,1.6339
2,0.05,7.1988,6.9113
`;

describe("parseReport", () => {
  it("parses decay rows with typed booleans", () => {
    const rows = parseReport("decay", DECAY);
    expect(rows).toHaveLength(3);
    expect(rows[0]).toEqual({ m: 8, bound: 1.39e-7, corner_norm: 5.17e-19, pass: true });
    expect(rows[2].pass).toBe(false);
  });

  it("parses convergence rows with empty order cells as null", () => {
    const rows = parseReport("convergence", CONVERGENCE);
    expect(rows[0].order_x).toBeNull();
    expect(rows[0].order_s).toBeNull();
    expect(rows[1].order_x).toBeCloseTo(1.8677, 4);
  });

  it("parses amplification rows", () => {
    const rows = parseReport("amplification", AMPLIFICATION);
    expect(rows[1].j).toBe(2);
    expect(rows[1].measured).toBeCloseTo(6.9113);
  });

  it("accepts header-only files as empty", () => {
    expect(parseReport("decay", "m,bound,corner_norm,pass\n")).toEqual([]);
  });

  it("rejects a foreign header", () => {
    expect(() => parseReport("decay", AMPLIFICATION)).toThrow(SchemaMismatch);
  });

  it("rejects reordered columns", () => {
    const text = "bound,m,corner_norm,pass\n1.0,8.0,0.0,true\n";
    expect(() => parseReport("decay", text)).toThrow(/header is/);
  });

  it("rejects extra columns", () => {
    const text = "m,bound,corner_norm,pass,extra\n8.0,1.0,0.0,true,1\n";
    expect(() => parseReport("decay", text)).toThrow(SchemaMismatch);
  });

  it("rejects non-numeric cells with the row and column named", () => {
    const text = "m,bound,corner_norm,pass\n8.0,oops,0.0,true\n";
    expect(() => parseReport("decay", text)).toThrow(/row 1, column "bound"/);
  });

  it("rejects a nonpositive bound", () => {
    const text = "m,bound,corner_norm,pass\n8.0,-1.0,0.0,true\n";
    expect(() => parseReport("decay", text)).toThrow(SchemaMismatch);
  });

  it("rejects short rows", () => {
    const text = "m,bound,corner_norm,pass\n8.0,1.0\n";
    expect(() => parseReport("decay", text)).toThrow(SchemaMismatch);
  });

  it("rejects booleans outside true/false", () => {
    const text = "m,bound,corner_norm,pass\n8.0,1.0,0.0,yes\n";
    expect(() => parseReport("decay", text)).toThrow(SchemaMismatch);
  });
});
