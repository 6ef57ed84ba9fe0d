import { z } from "zod";

/** Raised when a CSV does not carry the exact header its kind declares. */
export class SchemaMismatch extends Error {
  constructor(kind: PlotKind, detail: string) {
    super(`${kind}: ${detail}`);
    this.name = "SchemaMismatch";
  }
}

export type PlotKind = "decay" | "convergence" | "amplification";

// column order is part of the contract, not just the column set
export const HEADERS: Record<PlotKind, readonly string[]> = {
  decay: ["m", "bound", "corner_norm", "pass"],
  convergence: ["level", "h_x", "h_s", "error", "order_x", "order_s"],
  amplification: ["j", "tau", "predicted", "measured"],
};

const finite = z
  .string()
  .transform((s) => Number(s))
  .refine((v) => Number.isFinite(v), "expected a finite number");

const integer = finite.refine((v) => Number.isInteger(v), "expected an integer");

const boolWord = z
  .enum(["true", "false"])
  .transform((s) => s === "true");

// the writer leaves the order cells empty on the coarsest level
const finiteOrEmpty = z
  .string()
  .transform((s) => (s === "" ? null : Number(s)))
  .refine((v) => v === null || Number.isFinite(v), "expected a number or empty");

export const decayRow = z.object({
  m: finite,
  bound: finite.refine((v) => v > 0, "bound must be positive"),
  corner_norm: finite.refine((v) => v >= 0, "corner_norm must be nonnegative"),
  pass: boolWord,
});

export const convergenceRow = z.object({
  level: integer,
  h_x: finite.refine((v) => v > 0, "h_x must be positive"),
  h_s: finite.refine((v) => v > 0, "h_s must be positive"),
  error: finite.refine((v) => v >= 0, "error must be nonnegative"),
  order_x: finiteOrEmpty,
  order_s: finiteOrEmpty,
});

export const amplificationRow = z.object({
  j: integer,
  tau: finite,
  predicted: finite.refine((v) => v > 0, "predicted must be positive"),
  measured: finite.refine((v) => v >= 0, "measured must be nonnegative"),
});

export type DecayRow = z.infer<typeof decayRow>;
export type ConvergenceRow = z.infer<typeof convergenceRow>;
export type AmplificationRow = z.infer<typeof amplificationRow>;

export const ROW_SCHEMAS = {
  decay: decayRow,
  convergence: convergenceRow,
  amplification: amplificationRow,
} as const;
