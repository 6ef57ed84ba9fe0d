// Minimal deterministic SVG charting: fixed canvas, no randomness, no DOM.

export interface Series {
  points: Array<[number, number]>;
  color: string;
  label: string;
  width?: number;
  dash?: string;
  markers?: boolean;
  line?: boolean;
}

export interface ChartOpts {
  title: string;
  subtitle?: string;
  xLabel: string;
  yLabel: string;
  xLog?: boolean;
  yLog?: boolean;
  series: Series[];
  /** annotation lines rendered under the legend (fitted slopes, counts) */
  notes?: string[];
  /** banner for structurally valid but empty inputs */
  warning?: string;
}

const W = 700;
const H = 420;
const ML = 72;
const MR = 24;
const MT = 48;
const MB = 56;
const PW = W - ML - MR;
const PH = H - MT - MB;

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function fmtNum(v: number): string {
  if (v === 0) return "0";
  const mag = Math.abs(v);
  if (mag >= 0.01 && mag < 10000) {
    return String(Number(v.toPrecision(4)));
  }
  return v.toExponential(1).replace("e+", "e");
}

function niceTicks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((n) => n >= rough) ?? rough;
  const start = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= max + step * 1e-9; v += step) ticks.push(v);
  return ticks;
}

/** Decade ticks when the span allows, otherwise nice ticks in log space. */
function logTicks(minL: number, maxL: number): number[] {
  const lo = Math.ceil(minL);
  const hi = Math.floor(maxL);
  if (hi - lo >= 1) {
    const ticks: number[] = [];
    const step = Math.max(1, Math.ceil((hi - lo) / 6));
    for (let e = lo; e <= hi; e += step) ticks.push(e);
    return ticks;
  }
  return niceTicks(minL, maxL, 4);
}

interface Scale {
  (v: number): number;
  ticks: number[];
  label(tick: number): string;
}

function makeScale(values: number[], log: boolean, pixelOf: (f: number) => number): Scale {
  let vals = values;
  if (log) vals = values.filter((v) => v > 0).map(Math.log10);
  let min = vals.length ? Math.min(...vals) : log ? 0 : 0;
  let max = vals.length ? Math.max(...vals) : log ? 1 : 1;
  if (min === max) {
    min -= 0.5;
    max += 0.5;
  }
  const pad = (max - min) * 0.06;
  min -= pad;
  max += pad;
  const scale = ((v: number) => {
    const t = log ? Math.log10(v) : v;
    return pixelOf((t - min) / (max - min));
  }) as Scale;
  scale.ticks = log ? logTicks(min, max) : niceTicks(min, max, 5);
  scale.label = (tick: number) => fmtNum(log ? Math.pow(10, tick) : tick);
  // ticks live in transformed space; expose a transformed-space mapper too
  (scale as any).ofTransformed = (t: number) => pixelOf((t - min) / (max - min));
  return scale;
}

export function renderChart(opts: ChartOpts): string {
  const xs = opts.series.flatMap((s) => s.points.map((p) => p[0]));
  const ys = opts.series.flatMap((s) => s.points.map((p) => p[1]));
  const sx = makeScale(xs, opts.xLog ?? false, (f) => ML + f * PW);
  const sy = makeScale(ys, opts.yLog ?? false, (f) => MT + PH - f * PH);
  const xOfT = (sx as any).ofTransformed as (t: number) => number;
  const yOfT = (sy as any).ofTransformed as (t: number) => number;

  let s = `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}" font-family="Helvetica, Arial, sans-serif">\n`;
  s += `<rect width="${W}" height="${H}" fill="#fff"/>\n`;
  s += `<text x="${ML}" y="20" font-size="14" font-weight="600" fill="#222">${esc(opts.title)}</text>\n`;
  if (opts.subtitle) {
    s += `<text x="${ML}" y="36" font-size="10" fill="#888">${esc(opts.subtitle)}</text>\n`;
  }

  // grid + tick labels
  for (const t of sy.ticks) {
    const y = yOfT(t).toFixed(1);
    s += `<line x1="${ML}" y1="${y}" x2="${ML + PW}" y2="${y}" stroke="#eee"/>\n`;
    s += `<text x="${ML - 6}" y="${y}" font-size="9" fill="#666" text-anchor="end" dominant-baseline="middle">${esc(sy.label(t))}</text>\n`;
  }
  for (const t of sx.ticks) {
    const x = xOfT(t).toFixed(1);
    s += `<line x1="${x}" y1="${MT}" x2="${x}" y2="${MT + PH}" stroke="#f3f3f3"/>\n`;
    s += `<text x="${x}" y="${MT + PH + 14}" font-size="9" fill="#666" text-anchor="middle">${esc(sx.label(t))}</text>\n`;
  }
  s += `<rect x="${ML}" y="${MT}" width="${PW}" height="${PH}" fill="none" stroke="#bbb"/>\n`;
  s += `<text x="${ML + PW / 2}" y="${H - 14}" font-size="11" fill="#444" text-anchor="middle">${esc(opts.xLabel)}</text>\n`;
  s += `<text x="18" y="${MT + PH / 2}" font-size="11" fill="#444" text-anchor="middle" transform="rotate(-90 18 ${MT + PH / 2})">${esc(opts.yLabel)}</text>\n`;

  for (const sr of opts.series) {
    const pts = sr.points
      .filter(([x, y]) => (!opts.xLog || x > 0) && (!opts.yLog || y > 0))
      .map(([x, y]) => [sx(x), sy(y)] as const);
    if (pts.length === 0) continue;
    if (sr.line !== false && pts.length > 1) {
      const path = pts.map(([x, y]) => `${x.toFixed(1)},${y.toFixed(1)}`).join(" ");
      s += `<polyline fill="none" stroke="${sr.color}" stroke-width="${sr.width ?? 1.5}"${sr.dash ? ` stroke-dasharray="${sr.dash}"` : ""} points="${path}"/>\n`;
    }
    if (sr.markers) {
      for (const [x, y] of pts) {
        s += `<circle cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="3" fill="${sr.color}"/>\n`;
      }
    }
  }

  // legend + notes, top right inside the frame
  let ly = MT + 14;
  for (const sr of opts.series) {
    const lx = ML + PW - 184;
    s += `<line x1="${lx}" y1="${ly - 3}" x2="${lx + 18}" y2="${ly - 3}" stroke="${sr.color}" stroke-width="2"${sr.dash ? ` stroke-dasharray="${sr.dash}"` : ""}/>\n`;
    s += `<text x="${lx + 24}" y="${ly}" font-size="10" fill="#333">${esc(sr.label)}</text>\n`;
    ly += 14;
  }
  for (const note of opts.notes ?? []) {
    s += `<text x="${ML + PW - 184}" y="${ly}" font-size="10" fill="#333">${esc(note)}</text>\n`;
    ly += 14;
  }

  if (opts.warning) {
    s += `<text x="${ML + PW / 2}" y="${MT + PH / 2}" font-size="13" fill="#b45309" text-anchor="middle">${esc(opts.warning)}</text>\n`;
  }
  s += `</svg>\n`;
  return s;
}
