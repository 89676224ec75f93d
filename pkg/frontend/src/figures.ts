/** The four diagnostic figure kinds built on the experiment-CSV contract. */

import fs from "node:fs";
import path from "node:path";

import { ReportRow, readReportCsvs } from "./csv.js";
import { PALETTE, PlotSpec, renderPlot } from "./svg.js";

export const FIGURE_KINDS = [
  "margin_vs_t",
  "convergence",
  "residual_vs_dt",
  "mixing_decay",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface FigureSpec {
  kind: FigureKind;
  inputs: string[];
  out: string;
}

function asNumber(v: unknown): number | undefined {
  return typeof v === "number" && Number.isFinite(v) ? v : undefined;
}

function groupBy<T>(rows: T[], key: (r: T) => string): Map<string, T[]> {
  const out = new Map<string, T[]>();
  for (const r of rows) {
    const k = key(r);
    const bucket = out.get(k);
    if (bucket) bucket.push(r);
    else out.set(k, [r]);
  }
  return out;
}

function requireRows(rows: ReportRow[], kind: string, what: string): void {
  if (rows.length === 0) {
    throw new Error(`${kind}: no usable rows (${what})`);
  }
}

export interface MarginGroup {
  label: string;
  alpha: number;
  ts: number[];
  left: number[];
  right: number[];
  margin: number[];
  band: number[]; // 3 * combined SE around right
}

/** Inequality left/right vs t per (test function, displacement), with SE band. */
export function marginVsT(rows: ReportRow[]): { spec: PlotSpec; groups: MarginGroup[] } {
  const usable = rows.filter(
    (r) => asNumber(r.params["t"]) !== undefined &&
           asNumber(r.params["alpha"]) !== undefined);
  requireRows(usable, "margin_vs_t", "need rows with numeric 't' and 'alpha' params");
  const groups: MarginGroup[] = [];
  const byKey = groupBy(usable, (r) => `${r.params["f"]} α=${r.params["alpha"]}`);
  for (const [label, members] of byKey) {
    const sorted = [...members].sort(
      (a, b) => (a.params["t"] as number) - (b.params["t"] as number));
    groups.push({
      label,
      alpha: sorted[0].params["alpha"] as number,
      ts: sorted.map((r) => r.params["t"] as number),
      left: sorted.map((r) => r.left),
      right: sorted.map((r) => r.right),
      margin: sorted.map((r) => r.margin),
      band: sorted.map((r) => 3 * Math.hypot(r.leftSe, r.rightSe)),
    });
  }
  const spec: PlotSpec = {
    title: "Inequality sides vs t (solid: left, dashed: right + 3SE band)",
    xLabel: "t",
    yLabel: "value",
    xScale: "linear",
    yScale: "linear",
    series: groups.flatMap((g, i) => [
      { label: `${g.label} left`, points: g.ts.map((t, j): [number, number] => [t, g.left[j]]),
        color: PALETTE[i % PALETTE.length] },
      { label: `${g.label} right`, points: g.ts.map((t, j): [number, number] => [t, g.right[j]]),
        color: PALETTE[i % PALETTE.length], dashed: true, markers: false },
    ]),
    bands: groups.map((g, i) => ({
      x: g.ts,
      lower: g.right.map((v, j) => v - g.band[j]),
      upper: g.right.map((v, j) => v + g.band[j]),
      color: PALETTE[i % PALETTE.length],
    })),
  };
  return { spec, groups };
}

/** Median terminal gap (and semigroup gap) vs m on log-log axes. */
export function convergence(rows: ReportRow[]): { spec: PlotSpec } {
  const metrics = ["median_gap", "ptf_gap"];
  const series = metrics.map((metric, i) => {
    const members = rows
      .filter((r) => r.params["metric"] === metric &&
                     asNumber(r.params["m"]) !== undefined)
      .sort((a, b) => (a.params["m"] as number) - (b.params["m"] as number));
    return {
      label: metric,
      points: members.map((r): [number, number] => [r.params["m"] as number, r.left]),
      color: PALETTE[i],
    };
  }).filter((s) => s.points.length > 0);
  if (series.length === 0) {
    throw new Error("convergence: no usable rows (need 'metric' and numeric 'm' params)");
  }
  const spec: PlotSpec = {
    title: "Galerkin convergence vs truncation level",
    xLabel: "m",
    yLabel: "gap",
    xScale: "log",
    yScale: "log",
    series,
  };
  return { spec };
}

/** Energy-identity |residual| vs dt on log-log axes, with the 3*SE level. */
export function residualVsDt(rows: ReportRow[]): { spec: PlotSpec } {
  const usable = rows
    .filter((r) => asNumber(r.params["dt"]) !== undefined)
    .sort((a, b) => (a.params["dt"] as number) - (b.params["dt"] as number));
  requireRows(usable, "residual_vs_dt", "need rows with a numeric 'dt' param");
  const dts = usable.map((r) => r.params["dt"] as number);
  const spec: PlotSpec = {
    title: "Energy-identity residual vs dt",
    xLabel: "dt",
    yLabel: "|residual|",
    xScale: "log",
    yScale: "log",
    series: [
      { label: "|left - right|",
        points: dts.map((dt, i): [number, number] =>
          [dt, Math.max(Math.abs(usable[i].margin), Number.MIN_VALUE)]),
        color: PALETTE[0] },
      { label: "3·SE",
        points: dts.map((dt, i): [number, number] =>
          [dt, 3 * Math.hypot(usable[i].leftSe, usable[i].rightSe)]),
        color: PALETTE[1], dashed: true },
    ],
  };
  return { spec };
}

/** Two-point semigroup difference vs t per test function (log y). */
export function mixingDecay(rows: ReportRow[]): { spec: PlotSpec } {
  const usable = rows.filter(
    (r) => (r.params["kind"] === "trend" || r.params["kind"] === "final") &&
           asNumber(r.params["t"]) !== undefined);
  requireRows(usable, "mixing_decay", "need trend/final rows with a numeric 't' param");
  const floor = Math.max(Number.MIN_VALUE,
    Math.min(...usable.map((r) => r.left).filter((v) => v > 0)) / 10);
  const byF = groupBy(usable, (r) => String(r.params["f"]));
  const series = [...byF.entries()].map(([label, members], i) => ({
    label,
    points: members
      .sort((a, b) => (a.params["t"] as number) - (b.params["t"] as number))
      .map((r): [number, number] => [r.params["t"] as number, Math.max(r.left, floor)]),
    color: PALETTE[i % PALETTE.length],
  }));
  const spec: PlotSpec = {
    title: "Mixing: |P_t f(x) - P_t f(y)| vs t",
    xLabel: "t",
    yLabel: "difference",
    xScale: "linear",
    yScale: "log",
    series,
  };
  return { spec };
}

/** Build the SVG for a figure spec without touching the filesystem output. */
export function buildFigure(kind: FigureKind, rows: ReportRow[]): string {
  switch (kind) {
    case "margin_vs_t":
      return renderPlot(marginVsT(rows).spec);
    case "convergence":
      return renderPlot(convergence(rows).spec);
    case "residual_vs_dt":
      return renderPlot(residualVsDt(rows).spec);
    case "mixing_decay":
      return renderPlot(mixingDecay(rows).spec);
    default:
      throw new Error(`unknown figure kind '${kind as string}'`);
  }
}

/** Read the input CSVs, render the figure and write the SVG file. */
export function render(spec: FigureSpec): void {
  if (!FIGURE_KINDS.includes(spec.kind)) {
    throw new Error(
      `unknown figure kind '${spec.kind}'; choose from ${FIGURE_KINDS.join(", ")}`);
  }
  if (spec.inputs.length === 0) {
    throw new Error("at least one input CSV is required");
  }
  const rows = readReportCsvs(spec.inputs);
  const svg = buildFigure(spec.kind, rows);
  fs.mkdirSync(path.dirname(path.resolve(spec.out)), { recursive: true });
  fs.writeFileSync(spec.out, svg, "utf8");
}
