/** Chart model: figure kinds, series grouping, scales, and the scene
 * (backend-independent draw list) that the raster and SVG writers consume.
 */

import type { ResultRow } from "./csv.js";

export const FIGURE_KINDS = [
  "sweep_snr",
  "sweep_velocity",
  "sweep_mtilde_power",
  "sweep_mtilde_mse",
  "sweep_snr_multitarget",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface FigureSpec {
  csvPaths: string[];
  figureKind: FigureKind;
  outputPath: string;
  logY?: boolean;
  width?: number;
  height?: number;
}

export const LOG_FLOOR = 1e-12;

interface AxisLabels {
  x: string;
  y: string;
  logY: boolean;
}

const AXIS_LABELS: Record<FigureKind, AxisLabels> = {
  sweep_snr: { x: "SNR [dB]", y: "MSE", logY: true },
  sweep_velocity: { x: "velocity [km/h]", y: "MSE", logY: true },
  sweep_mtilde_power: { x: "sub-block length", y: "power [dB]", logY: false },
  sweep_mtilde_mse: { x: "sub-block length", y: "MSE", logY: true },
  sweep_snr_multitarget: { x: "SNR [dB]", y: "MSE", logY: true },
};

export interface Series {
  metric: string;
  points: Array<{ x: number; y: number }>;
  /** theoretical curves carry markers; simulated ones do not */
  theory: boolean;
  color: readonly [number, number, number];
}

const PALETTE: Array<readonly [number, number, number]> = [
  [31, 119, 180],
  [255, 127, 14],
  [44, 160, 44],
  [214, 39, 40],
  [148, 103, 189],
  [140, 86, 75],
  [227, 119, 194],
  [127, 127, 127],
  [188, 189, 34],
  [23, 190, 207],
];

export function isTheoryMetric(metric: string): boolean {
  return /theory|crlb/i.test(metric);
}

/** Group rows into per-metric series, sorted by sweep value. */
export function groupSeries(rows: ResultRow[]): Series[] {
  if (rows.length === 0) {
    throw new Error("no rows to plot (empty sweep)");
  }
  const order: string[] = [];
  const byMetric = new Map<string, ResultRow[]>();
  for (const row of rows) {
    if (!byMetric.has(row.metric)) {
      byMetric.set(row.metric, []);
      order.push(row.metric);
    }
    byMetric.get(row.metric)!.push(row);
  }
  return order.map((metric, i) => {
    const pts = byMetric
      .get(metric)!
      .slice()
      .sort((a, b) => a.sweep - b.sweep)
      .map((r) => ({ x: r.sweep, y: r.value }));
    return {
      metric,
      points: pts,
      theory: isTheoryMetric(metric),
      color: PALETTE[i % PALETTE.length],
    };
  });
}

export interface Scale {
  min: number;
  max: number;
  ticks: number[];
  log: boolean;
  toUnit(v: number): number; // [0, 1]
}

function niceTicks(min: number, max: number, target = 6): number[] {
  if (min === max) {
    return [min];
  }
  const span = max - min;
  const step0 = span / target;
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  let step = mag;
  for (const m of [1, 2, 5, 10]) {
    if (m * mag >= step0) {
      step = m * mag;
      break;
    }
  }
  const ticks: number[] = [];
  for (let t = Math.ceil(min / step) * step; t <= max + 1e-9 * step; t += step) {
    ticks.push(Math.abs(t) < 1e-12 ? 0 : t);
  }
  return ticks;
}

export function linearScale(values: number[]): Scale {
  let min = Math.min(...values);
  let max = Math.max(...values);
  if (min === max) {
    min -= 1;
    max += 1;
  }
  const pad = 0.04 * (max - min);
  min -= pad;
  max += pad;
  return {
    min,
    max,
    ticks: niceTicks(min, max),
    log: false,
    toUnit: (v) => (v - min) / (max - min),
  };
}

export function logScale(values: number[]): Scale {
  const logs = values.map((v) => Math.log10(Math.max(v, LOG_FLOOR)));
  let min = Math.floor(Math.min(...logs));
  let max = Math.ceil(Math.max(...logs));
  if (min === max) {
    min -= 1;
    max += 1;
  }
  const decades: number[] = [];
  const stride = Math.max(1, Math.round((max - min) / 8));
  for (let d = min; d <= max; d += stride) {
    decades.push(d);
  }
  return {
    min,
    max,
    ticks: decades,
    log: true,
    toUnit: (v) => (Math.log10(Math.max(v, LOG_FLOOR)) - min) / (max - min),
  };
}

export function formatTick(v: number, log: boolean): string {
  if (log) {
    return `1e${v}`;
  }
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e5 || a < 1e-3) {
    return v.toExponential(0).replace("e+", "e");
  }
  return Number(v.toFixed(4)).toString();
}

/** Backend-independent drawing operations. */
export type Op =
  | { kind: "line"; x0: number; y0: number; x1: number; y1: number; color: readonly [number, number, number]; thickness: number }
  | { kind: "polyline"; points: Array<[number, number]>; color: readonly [number, number, number]; thickness: number; metric?: string }
  | { kind: "marker"; x: number; y: number; radius: number; color: readonly [number, number, number]; metric?: string }
  | { kind: "text"; x: number; y: number; text: string; color: readonly [number, number, number]; scale: number };

export interface Scene {
  width: number;
  height: number;
  ops: Op[];
  annotations: string[];
}

const BLACK: readonly [number, number, number] = [0, 0, 0];
const GREY: readonly [number, number, number] = [210, 210, 210];

/** Lay the figure out as a draw list; pure in (rows, spec). */
export function buildScene(rows: ResultRow[], spec: FigureSpec): Scene {
  const width = spec.width ?? 1200;
  const height = spec.height ?? 800;
  const labels = AXIS_LABELS[spec.figureKind];
  const logY = spec.logY ?? labels.logY;
  const series = groupSeries(rows);

  const margin = { left: 90, right: 30, top: 50, bottom: 70 };
  const plotW = width - margin.left - margin.right;
  const plotH = height - margin.top - margin.bottom;

  const xs = series.flatMap((s) => s.points.map((p) => p.x));
  const ys = series.flatMap((s) => s.points.map((p) => p.y));
  const xScale = linearScale(xs);
  const yScale = logY ? logScale(ys) : linearScale(ys);

  const px = (v: number) => margin.left + xScale.toUnit(v) * plotW;
  const py = (v: number) => margin.top + (1 - yScale.toUnit(v)) * plotH;

  const ops: Op[] = [];
  const annotations: string[] = [];

  // gridlines and ticks
  for (const t of xScale.ticks) {
    const x = px(t);
    ops.push({ kind: "line", x0: x, y0: margin.top, x1: x, y1: margin.top + plotH, color: GREY, thickness: 1 });
    const label = formatTick(t, false);
    ops.push({ kind: "text", x: x - label.length * 6, y: margin.top + plotH + 12, text: label, color: BLACK, scale: 2 });
  }
  for (const t of yScale.ticks) {
    const v = yScale.log ? Math.pow(10, t) : t;
    const y = py(v);
    ops.push({ kind: "line", x0: margin.left, y0: y, x1: margin.left + plotW, y1: y, color: GREY, thickness: 1 });
    const label = formatTick(t, yScale.log);
    ops.push({ kind: "text", x: margin.left - label.length * 12 - 10, y: y - 7, text: label, color: BLACK, scale: 2 });
  }

  // frame
  ops.push({ kind: "line", x0: margin.left, y0: margin.top, x1: margin.left, y1: margin.top + plotH, color: BLACK, thickness: 2 });
  ops.push({ kind: "line", x0: margin.left, y0: margin.top + plotH, x1: margin.left + plotW, y1: margin.top + plotH, color: BLACK, thickness: 2 });

  // series: simulated curves are plain lines, theoretical ones add markers
  let floored = false;
  for (const s of series) {
    const pts: Array<[number, number]> = s.points.map((p) => {
      if (logY && p.y < LOG_FLOOR) {
        floored = true;
      }
      return [px(p.x), py(p.y)];
    });
    ops.push({ kind: "polyline", points: pts, color: s.color, thickness: 2, metric: s.metric });
    if (s.theory) {
      for (const [x, y] of pts) {
        ops.push({ kind: "marker", x, y, radius: 5, color: s.color, metric: s.metric });
      }
    }
  }

  // axis labels and title
  ops.push({ kind: "text", x: margin.left + plotW / 2 - labels.x.length * 6, y: height - 28, text: labels.x, color: BLACK, scale: 2 });
  ops.push({ kind: "text", x: 12, y: 12, text: `${spec.figureKind}  (y: ${labels.y}${logY ? ", log" : ""})`, color: BLACK, scale: 2 });

  if (floored) {
    const note = `values floored at 1e-12`;
    annotations.push(note);
    ops.push({ kind: "text", x: margin.left + 10, y: margin.top + 8, text: note, color: [150, 30, 30], scale: 2 });
  }

  // legend, top-right inside the plot
  let ly = margin.top + 26 + (floored ? 18 : 0);
  for (const s of series) {
    const lx = margin.left + plotW - 360;
    ops.push({ kind: "line", x0: lx, y0: ly, x1: lx + 36, y1: ly, color: s.color, thickness: 2 });
    if (s.theory) {
      ops.push({ kind: "marker", x: lx + 18, y: ly, radius: 5, color: s.color, metric: s.metric });
    }
    ops.push({ kind: "text", x: lx + 44, y: ly - 7, text: s.metric, color: BLACK, scale: 2 });
    ly += 22;
  }

  return { width, height, ops, annotations };
}
