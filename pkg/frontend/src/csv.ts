import Papa from "papaparse";
import { z } from "zod";

import {
  HEADERS,
  ROW_SCHEMAS,
  PlotKind,
  SchemaMismatch,
  DecayRow,
  ConvergenceRow,
  AmplificationRow,
} from "./schemas.js";

type RowOf<K extends PlotKind> = K extends "decay"
  ? DecayRow
  : K extends "convergence"
    ? ConvergenceRow
    : AmplificationRow;

/**
 * Parse one report CSV. The header must match the kind's declared columns
 * exactly (names and order); every data row must validate. Header-only
 * files are fine and return an empty array.
 */
export function parseReport<K extends PlotKind>(kind: K, text: string): RowOf<K>[] {
  const parsed = Papa.parse<Record<string, string>>(text, {
    header: true,
    skipEmptyLines: true,
  });
  for (const err of parsed.errors) {
    // papaparse flags short rows etc.; surface the first one
    throw new SchemaMismatch(kind, `row ${err.row}: ${err.message}`);
  }
  const fields = parsed.meta.fields ?? [];
  const expected = HEADERS[kind];
  if (fields.length !== expected.length || fields.some((f, i) => f !== expected[i])) {
    throw new SchemaMismatch(
      kind,
      `header is "${fields.join(",")}", expected "${expected.join(",")}"`,
    );
  }
  const schema = ROW_SCHEMAS[kind];
  return parsed.data.map((raw, i) => {
    const res = schema.safeParse(raw);
    if (!res.success) {
      const issue = res.error.issues[0];
      throw new SchemaMismatch(
        kind,
        `row ${i + 1}, column "${issue.path.join(".")}": ${issue.message}`,
      );
    }
    return res.data as RowOf<K>;
  });
}
