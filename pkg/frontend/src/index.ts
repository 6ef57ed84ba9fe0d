export { parseReport } from "./csv.js";
export { renderAmplification, renderConvergence, renderDecay } from "./plots.js";
export { run } from "./cli.js";
export * from "./schemas.js";
