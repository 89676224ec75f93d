/** Minimal deterministic SVG line-plot renderer (no timestamps, no randomness). */

export type Scale = "linear" | "log";

export interface Series {
  label: string;
  points: Array<[number, number]>;
  color: string;
  dashed?: boolean;
  markers?: boolean;
}

export interface Band {
  /** Points along increasing x; the band fills between lower and upper. */
  x: number[];
  lower: number[];
  upper: number[];
  color: string;
}

export interface PlotSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  xScale: Scale;
  yScale: Scale;
  series: Series[];
  bands?: Band[];
}

export const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

const WIDTH = 760;
const HEIGHT = 480;
const MARGIN = { top: 44, right: 180, bottom: 56, left: 72 };

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1);
  return Number(v.toPrecision(4)).toString();
}

class Axis {
  readonly lo: number;
  readonly hi: number;

  constructor(values: number[], readonly scale: Scale, readonly pixLo: number,
              readonly pixHi: number) {
    const usable = scale === "log" ? values.filter((v) => v > 0) : values;
    if (usable.length === 0) {
      throw new Error(`no plottable values for a ${scale} axis`);
    }
    let lo = Math.min(...usable);
    let hi = Math.max(...usable);
    if (scale === "log") {
      this.lo = Math.log10(lo);
      this.hi = Math.log10(hi);
    } else {
      this.lo = lo;
      this.hi = hi;
    }
    if (this.hi === this.lo) {
      // degenerate range: widen symmetrically so the point sits mid-axis
      const pad = this.scale === "log" ? 0.5 : Math.max(1e-12, Math.abs(this.lo) * 0.5 + 0.5);
      (this as { lo: number }).lo -= pad;
      (this as { hi: number }).hi += pad;
    }
  }

  pos(v: number): number {
    const t = this.scale === "log" ? Math.log10(Math.max(v, Number.MIN_VALUE)) : v;
    const frac = (t - this.lo) / (this.hi - this.lo);
    return this.pixLo + frac * (this.pixHi - this.pixLo);
  }

  ticks(count = 5): Array<{ value: number; label: string }> {
    const out: Array<{ value: number; label: string }> = [];
    if (this.scale === "log") {
      const first = Math.ceil(this.lo);
      const last = Math.floor(this.hi);
      if (last - first >= 1) {
        for (let e = first; e <= last; e += 1) {
          out.push({ value: 10 ** e, label: `1e${e}` });
        }
        return out;
      }
      // less than a decade: fall through to evenly spaced ticks in log space
      for (let i = 0; i <= count; i += 1) {
        const v = 10 ** (this.lo + ((this.hi - this.lo) * i) / count);
        out.push({ value: v, label: fmt(v) });
      }
      return out;
    }
    for (let i = 0; i <= count; i += 1) {
      const v = this.lo + ((this.hi - this.lo) * i) / count;
      out.push({ value: v, label: fmt(v) });
    }
    return out;
  }
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Render a plot spec to a standalone SVG document string. */
export function renderPlot(spec: PlotSpec): string {
  const allPoints = spec.series.flatMap((s) => s.points);
  const bandXs = (spec.bands ?? []).flatMap((b) => b.x);
  const bandYs = (spec.bands ?? []).flatMap((b) => [...b.lower, ...b.upper]);
  if (allPoints.length === 0) {
    throw new Error(`nothing to plot for '${spec.title}'`);
  }
  const xAxis = new Axis(
    [...allPoints.map((p) => p[0]), ...bandXs], spec.xScale,
    MARGIN.left, WIDTH - MARGIN.right);
  const yAxis = new Axis(
    [...allPoints.map((p) => p[1]), ...bandYs], spec.yScale,
    HEIGHT - MARGIN.bottom, MARGIN.top);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
    `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`);
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="16">` +
    `${esc(spec.title)}</text>`);

  // frame and grid
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  for (const t of xAxis.ticks()) {
    const px = xAxis.pos(t.value).toFixed(1);
    parts.push(`<line x1="${px}" y1="${y0}" x2="${px}" y2="${y1}" stroke="#e0e0e0"/>`);
    parts.push(
      `<text x="${px}" y="${y0 + 18}" text-anchor="middle" font-size="11">` +
      `${esc(t.label)}</text>`);
  }
  for (const t of yAxis.ticks()) {
    const py = yAxis.pos(t.value).toFixed(1);
    parts.push(`<line x1="${x0}" y1="${py}" x2="${x1}" y2="${py}" stroke="#e0e0e0"/>`);
    parts.push(
      `<text x="${x0 - 8}" y="${py}" text-anchor="end" dominant-baseline="middle" ` +
      `font-size="11">${esc(t.label)}</text>`);
  }
  parts.push(
    `<rect x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}" ` +
    `fill="none" stroke="#333"/>`);
  parts.push(
    `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 14}" text-anchor="middle" ` +
    `font-size="13">${esc(spec.xLabel)}</text>`);
  parts.push(
    `<text x="20" y="${(y0 + y1) / 2}" text-anchor="middle" font-size="13" ` +
    `transform="rotate(-90 20 ${(y0 + y1) / 2})">${esc(spec.yLabel)}</text>`);

  // bands first so the curves draw on top
  for (const band of spec.bands ?? []) {
    const fwd = band.x.map((x, i) =>
      `${xAxis.pos(x).toFixed(1)},${yAxis.pos(band.upper[i]).toFixed(1)}`);
    const back = [...band.x.keys()].reverse().map((i) =>
      `${xAxis.pos(band.x[i]).toFixed(1)},${yAxis.pos(band.lower[i]).toFixed(1)}`);
    parts.push(
      `<polygon points="${[...fwd, ...back].join(" ")}" fill="${band.color}" ` +
      `fill-opacity="0.18" stroke="none"/>`);
  }

  for (const s of spec.series) {
    const pts = s.points
      .map(([x, y]) => `${xAxis.pos(x).toFixed(1)},${yAxis.pos(y).toFixed(1)}`)
      .join(" ");
    const dash = s.dashed ? ` stroke-dasharray="6 4"` : "";
    parts.push(
      `<polyline points="${pts}" fill="none" stroke="${s.color}" ` +
      `stroke-width="1.8"${dash}/>`);
    if (s.markers ?? true) {
      for (const [x, y] of s.points) {
        parts.push(
          `<circle cx="${xAxis.pos(x).toFixed(1)}" cy="${yAxis.pos(y).toFixed(1)}" ` +
          `r="3" fill="${s.color}"/>`);
      }
    }
  }

  // legend
  spec.series.forEach((s, i) => {
    const ly = MARGIN.top + 8 + i * 18;
    const lx = WIDTH - MARGIN.right + 12;
    const dash = s.dashed ? ` stroke-dasharray="6 4"` : "";
    parts.push(
      `<line x1="${lx}" y1="${ly}" x2="${lx + 22}" y2="${ly}" ` +
      `stroke="${s.color}" stroke-width="1.8"${dash}/>`);
    parts.push(
      `<text x="${lx + 28}" y="${ly + 4}" font-size="11">${esc(s.label)}</text>`);
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
