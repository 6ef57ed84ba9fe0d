import { readFileSync, writeFileSync } from "fs";

import { parseReport } from "./csv.js";
import { renderAmplification, renderConvergence, renderDecay } from "./plots.js";
import { PlotKind, SchemaMismatch } from "./schemas.js";

const RENDERERS: Record<PlotKind, (rows: any[]) => string> = {
  decay: renderDecay,
  convergence: renderConvergence,
  amplification: renderAmplification,
};

/**
 * Shared script body. Exit codes mirror the producer CLI: 2 for usage,
 * unreadable input, or a schema mismatch. Header-only inputs are not an
 * error; they render an empty chart with a warning banner.
 */
export function run(kind: PlotKind, argv: string[]): number {
  if (argv.length !== 2) {
    console.error(`usage: plot_${kind} <csv> <out.svg>`);
    return 2;
  }
  const [csvPath, outPath] = argv;
  let text: string;
  try {
    text = readFileSync(csvPath, "utf8");
  } catch (err) {
    console.error(`cannot read ${csvPath}: ${(err as Error).message}`);
    return 2;
  }
  let rows;
  try {
    rows = parseReport(kind, text);
  } catch (err) {
    if (err instanceof SchemaMismatch) {
      console.error(`schema mismatch in ${csvPath}: ${err.message}`);
      return 2;
    }
    throw err;
  }
  if (rows.length === 0) {
    console.error(`warning: ${csvPath} has no data rows; writing an empty chart`);
  }
  const svg = RENDERERS[kind](rows);
  try {
    writeFileSync(outPath, svg);
  } catch (err) {
    console.error(`cannot write ${outPath}: ${(err as Error).message}`);
    return 2;
  }
  console.log(`${rows.length} rows -> ${outPath}`);
  return 0;
}
