import { AmplificationRow, ConvergenceRow, DecayRow } from "./schemas.js";
import { renderChart, Series } from "./svg.js";

/** Least-squares slope of y against x. */
function fitSlope(x: number[], y: number[]): number {
  const n = x.length;
  const mx = x.reduce((a, b) => a + b, 0) / n;
  const my = y.reduce((a, b) => a + b, 0) / n;
  let num = 0;
  let den = 0;
  for (let i = 0; i < n; i++) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

export function renderDecay(rows: DecayRow[]): string {
  const series: Series[] = [
    {
      points: rows.map((r) => [r.m, r.bound]),
      color: "#4361ee",
      label: "bound",
      markers: true,
    },
    {
      points: rows.map((r) => [r.m, r.corner_norm]),
      color: "#e63946",
      label: "corner norm",
      markers: true,
      dash: "5,3",
    },
  ];
  const notes: string[] = [];
  if (rows.length >= 2) {
    const slope = fitSlope(
      rows.map((r) => r.m),
      rows.map((r) => Math.log(r.bound)),
    );
    notes.push(`fitted log-slope ${slope.toFixed(4)} per unit m`);
  }
  const violations = rows.filter((r) => !r.pass).length;
  notes.push(`${violations} violations`);
  const zeros = rows.filter((r) => r.corner_norm === 0).length;
  if (zeros > 0) {
    notes.push(`${zeros} exact-zero corner values off the log scale`);
  }
  return renderChart({
    title: "Corner norm against the weighted-energy bound",
    subtitle: `${rows.length} exponent values`,
    xLabel: "weight exponent m",
    yLabel: "norm (log scale)",
    yLog: true,
    series,
    notes,
    warning: rows.length === 0 ? "no data rows; header-only input" : undefined,
  });
}

export function renderConvergence(rows: ConvergenceRow[]): string {
  const series: Series[] = [
    {
      points: rows.map((r) => [r.h_x, r.error]),
      color: "#4361ee",
      label: "error",
      markers: true,
    },
  ];
  if (rows.length >= 1) {
    // reference slopes anchored at the finest level
    const finest = rows.reduce((a, b) => (b.h_x < a.h_x ? b : a));
    const hs = rows.map((r) => r.h_x);
    const hMin = Math.min(...hs);
    const hMax = Math.max(...hs);
    for (const p of [1, 2]) {
      series.push({
        points: [
          [hMin, finest.error * Math.pow(hMin / finest.h_x, p)],
          [hMax, finest.error * Math.pow(hMax / finest.h_x, p)],
        ],
        color: "#999",
        label: `slope ${p}`,
        dash: p === 1 ? "2,3" : "6,3",
        width: 1,
      });
    }
  }
  const notes: string[] = [];
  const last = rows[rows.length - 1];
  if (last && last.order_x !== null && last.order_s !== null) {
    notes.push(`finest orders: x ${last.order_x.toFixed(3)}, s ${last.order_s.toFixed(3)}`);
  }
  return renderChart({
    title: "Manufactured-solution convergence",
    subtitle: `${rows.length} refinement levels`,
    xLabel: "spatial step h_x (log scale)",
    yLabel: "max error (log scale)",
    xLog: true,
    yLog: true,
    series,
    notes,
    warning: rows.length === 0 ? "no data rows; header-only input" : undefined,
  });
}

export function renderAmplification(rows: AmplificationRow[]): string {
  const series: Series[] = [
    {
      points: rows.map((r) => [r.j, r.predicted]),
      color: "#2d6a4f",
      label: "predicted growth",
      markers: true,
      dash: "6,3",
    },
    {
      points: rows.map((r) => [r.j, r.measured]),
      color: "#e63946",
      label: "measured growth",
      markers: true,
    },
  ];
  const notes: string[] = [];
  if (rows.length > 0) {
    const worst = Math.max(...rows.map((r) => r.measured / r.predicted));
    notes.push(`max measured/predicted ${worst.toFixed(3)}`);
    notes.push(`tau = ${rows[0].tau}`);
  }
  return renderChart({
    title: "Backward-march noise amplification by mode",
    subtitle: `${rows.length} frequencies`,
    xLabel: "mode number j",
    yLabel: "amplification factor (log scale)",
    yLog: true,
    series,
    notes,
    warning: rows.length === 0 ? "no data rows; header-only input" : undefined,
  });
}
