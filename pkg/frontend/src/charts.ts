/** Small SVG chart builders shared by the panels.

Every number shown to the user goes through `numberSpan`/`setNumber`, which
also stores the raw payload value in `data-value`; nothing here computes a
statistic, it only draws what the service returned. Each chart carries its
axis labels.
*/

import type { HistogramJson, ReportJson, SweepJson } from "./types.js";

export const SVG_NS = "http://www.w3.org/2000/svg";

/** Categorical palette shared by box segments and sequence strips. */
export const PALETTE = [
  "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

export const COLOR_BASE = "#4878b0";
export const COLOR_COND = "#2ca02c";
export const COLOR_INSIGNIFICANT = "#b5b5b5";
export const COLOR_INCREASE = "#2ca02c";
export const COLOR_DECREASE = "#d62728";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

export function svg(tag: string, attrs: Record<string, string | number> = {}): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, String(v));
  return node;
}

export function fmt(value: number | null): string {
  if (value === null) return "n/a";
  if (Number.isInteger(value)) return String(value);
  const abs = Math.abs(value);
  if (abs !== 0 && (abs < 0.001 || abs >= 100000)) return value.toExponential(3);
  return String(Math.round(value * 10000) / 10000);
}

/** A span whose text is a formatted payload number and whose data-value is
the raw one, so tests can trace every rendered figure to its field. */
export function numberSpan(value: number | null, cls = "num"): HTMLSpanElement {
  const span = el("span", { class: cls });
  setNumber(span, value);
  return span;
}

export function setNumber(node: HTMLElement, value: number | null): void {
  node.textContent = fmt(value);
  node.dataset.value = value === null ? "null" : String(value);
}

function scale(domainLo: number, domainHi: number, rangeLo: number, rangeHi: number) {
  const span = domainHi - domainLo || 1;
  return (v: number) => rangeLo + ((v - domainLo) / span) * (rangeHi - rangeLo);
}

export interface HistogramOverlayOptions {
  width?: number;
  height?: number;
  xLabel: string;
  yLabel?: string;
}

/** Blue base histogram with the green conditioned histogram overlaid on the
same bins, plus vertical mean indicators for both. */
export function histogramOverlay(
  base: HistogramJson,
  cond: HistogramJson | null,
  opts: HistogramOverlayOptions,
): SVGElement {
  const width = opts.width ?? 360;
  const height = opts.height ?? 140;
  const pad = { left: 34, right: 8, top: 8, bottom: 24 };
  const root = svg("svg", {
    width,
    height,
    class: "chart histogram",
    viewBox: `0 0 ${width} ${height}`,
  });
  const maxCount = Math.max(1, ...base.counts);
  const y = scale(0, maxCount, height - pad.bottom, pad.top);
  const n = base.counts.length;
  const x = scale(0, n, pad.left, width - pad.right);
  const barW = Math.max(1, (width - pad.left - pad.right) / n - 1);

  base.counts.forEach((count, i) => {
    root.appendChild(
      svg("rect", {
        x: x(i),
        y: y(count),
        width: barW,
        height: Math.max(0, y(0) - y(count)),
        fill: COLOR_BASE,
        opacity: 0.85,
        "data-role": "base-bar",
        "data-count": count,
      }),
    );
  });
  if (cond) {
    cond.counts.forEach((count, i) => {
      root.appendChild(
        svg("rect", {
          x: x(i),
          y: y(count),
          width: barW,
          height: Math.max(0, y(0) - y(count)),
          fill: COLOR_COND,
          opacity: 0.9,
          "data-role": "cond-bar",
          "data-count": count,
        }),
      );
    });
  }

  const meanLine = (mean: number | null, color: string, role: string) => {
    if (mean === null || base.edges === null) return;
    const lo = base.edges[0];
    const hi = base.edges[base.edges.length - 1];
    const mx = scale(lo, hi, pad.left, width - pad.right)(mean);
    root.appendChild(
      svg("line", {
        x1: mx, x2: mx, y1: pad.top, y2: height - pad.bottom,
        stroke: color, "stroke-width": 2, "data-role": role, "data-value": mean,
      }),
    );
  };
  meanLine(base.mean, COLOR_BASE, "base-mean");
  if (cond) meanLine(cond.mean, COLOR_COND, "cond-mean");

  const xText = svg("text", {
    x: width / 2, y: height - 4, "text-anchor": "middle",
    class: "axis-label", "font-size": 10,
  });
  xText.textContent = opts.xLabel;
  root.appendChild(xText);
  const yText = svg("text", {
    x: 10, y: height / 2, "text-anchor": "middle",
    transform: `rotate(-90 10 ${height / 2})`, class: "axis-label", "font-size": 10,
  });
  yText.textContent = opts.yLabel ?? "count";
  root.appendChild(yText);
  return root;
}

/** One box per tested cause, ordered by significance; insignificant boxes
are gray, significant ones colored by their palette slot. The side handles
mark the cause's average significance on the shared scale. */
export function boxChart(
  report: ReportJson,
  colorOf: (eventId: string) => string,
): HTMLElement {
  const wrap = el("div", { class: "box-chart", "data-role": "box-chart" });
  wrap.dataset.sigIds = report.significant_ids.join(",");
  const maxAbs = Math.max(
    1e-9,
    ...report.causes.map((m) => Math.abs(m.eps_avg ?? m.elevation)),
  );
  for (const measure of report.causes) {
    const box = el("div", { class: "cause-box", "data-event-id": measure.event.id });
    box.dataset.significant = String(measure.is_significant);
    const fill = measure.is_significant ? colorOf(measure.event.id) : COLOR_INSIGNIFICANT;
    const value = measure.eps_avg ?? measure.elevation;
    const frac = Math.min(1, Math.abs(value) / maxAbs);
    const bar = el("div", { class: "cause-box-bar" });
    bar.style.background = fill;
    bar.style.height = `${Math.round(20 + 60 * frac)}px`;
    bar.title = measure.event.label;
    box.appendChild(bar);
    const label = el("div", { class: "cause-box-label" }, measure.event.label);
    box.appendChild(label);
    const eps = el("div", { class: "cause-box-eps" });
    eps.appendChild(el("span", {}, "eps_avg "));
    eps.appendChild(numberSpan(measure.eps_avg, "num eps-value"));
    if (measure.eps_reason) {
      eps.appendChild(el("span", { class: "eps-reason" }, ` (${measure.eps_reason})`));
    }
    box.appendChild(eps);
    const elev = el("div", { class: "cause-box-elev" });
    elev.appendChild(el("span", {}, "elevation "));
    elev.appendChild(numberSpan(measure.elevation, "num elevation-value"));
    box.appendChild(elev);
    wrap.appendChild(box);
  }
  return wrap;
}

/** Combined-influence area over exact delays; gaps break the polygon. Green
for increase/valuein effects, red for decrease. */
export function areaChart(
  sweep: SweepJson,
  effectType: string,
  currentDelay: number,
  opts: { width?: number; height?: number } = {},
): SVGElement {
  const width = opts.width ?? 420;
  const height = opts.height ?? 120;
  const pad = { left: 36, right: 10, top: 8, bottom: 22 };
  const root = svg("svg", {
    width, height, class: "chart area-chart", viewBox: `0 0 ${width} ${height}`,
    "data-role": "area-chart",
  });
  const defined = sweep.points.filter((p) => p.influence !== null);
  const values = defined.map((p) => p.influence as number);
  const lo = Math.min(0, ...values);
  const hi = Math.max(0, ...values);
  const x = scale(0, sweep.max_delay, pad.left, width - pad.right);
  const y = scale(lo, hi, height - pad.bottom, pad.top);
  const color = effectType === "decrease" ? COLOR_DECREASE : COLOR_INCREASE;

  let run: string[] = [];
  let runStart: number | null = null;
  const flush = (endDelay: number) => {
    if (run.length === 0 || runStart === null) return;
    const path =
      `M ${x(runStart)} ${y(0)} ` + run.join(" ") + ` L ${x(endDelay)} ${y(0)} Z`;
    root.appendChild(
      svg("path", { d: path, fill: color, opacity: 0.5, stroke: color }),
    );
    run = [];
    runStart = null;
  };
  let lastDelay = 0;
  for (const point of sweep.points) {
    if (point.influence === null) {
      flush(lastDelay);
      continue;
    }
    if (runStart === null) runStart = point.delay;
    run.push(`L ${x(point.delay)} ${y(point.influence)}`);
    lastDelay = point.delay;
  }
  flush(lastDelay);

  for (const point of sweep.points) {
    if (point.influence === null) continue;
    root.appendChild(
      svg("circle", {
        cx: x(point.delay), cy: y(point.influence), r: 2.5, fill: color,
        "data-role": "sweep-point", "data-delay": point.delay,
        "data-value": point.influence,
      }),
    );
  }
  root.appendChild(
    svg("line", {
      x1: x(currentDelay), x2: x(currentDelay), y1: pad.top, y2: height - pad.bottom,
      stroke: "#333", "stroke-dasharray": "3,2", "data-role": "delay-cursor",
    }),
  );
  const xText = svg("text", {
    x: width / 2, y: height - 4, "text-anchor": "middle", "font-size": 10,
    class: "axis-label",
  });
  xText.textContent = "time delay (index units)";
  root.appendChild(xText);
  const yText = svg("text", {
    x: 10, y: height / 2, "text-anchor": "middle",
    transform: `rotate(-90 10 ${height / 2})`, "font-size": 10, class: "axis-label",
  });
  yText.textContent = "combined influence";
  root.appendChild(yText);
  return root;
}

/** Ring with base (gray) and conditional (blue) indicators; the bottom and
top of the underlying value scale meet at 12 o'clock. */
export function donutChart(
  base: number,
  cond: number | null,
  spanLo: number,
  spanHi: number,
  label: string,
  effectType: string,
): HTMLElement {
  const size = 120;
  const c = size / 2;
  const radius = 44;
  const wrap = el("div", { class: "donut", "data-role": "donut" });
  const root = svg("svg", { width: size, height: size, viewBox: `0 0 ${size} ${size}` });
  const ringColor = effectType === "decrease" ? COLOR_DECREASE : COLOR_INCREASE;
  root.appendChild(
    svg("circle", {
      cx: c, cy: c, r: radius, fill: "none", stroke: ringColor,
      "stroke-width": 10, opacity: 0.25,
    }),
  );
  const angleOf = (v: number) => {
    const span = spanHi - spanLo || 1;
    const frac = Math.min(1, Math.max(0, (v - spanLo) / span));
    return frac * 2 * Math.PI - Math.PI / 2; // 12 o'clock start
  };
  const tick = (value: number, color: string, role: string) => {
    const a = angleOf(value);
    const x1 = c + Math.cos(a) * (radius - 8);
    const y1 = c + Math.sin(a) * (radius - 8);
    const x2 = c + Math.cos(a) * (radius + 8);
    const y2 = c + Math.sin(a) * (radius + 8);
    root.appendChild(
      svg("line", {
        x1, y1, x2, y2, stroke: color, "stroke-width": 3,
        "data-role": role, "data-value": value,
      }),
    );
  };
  tick(base, "#7f7f7f", "donut-base");
  if (cond !== null) tick(cond, COLOR_BASE, "donut-cond");
  wrap.appendChild(root);
  const center = el("div", { class: "donut-center" });
  center.appendChild(el("div", { class: "donut-label" }, label));
  const readout = el("div", { class: "donut-readout" });
  readout.appendChild(numberSpan(base, "num donut-base-value"));
  readout.appendChild(el("span", {}, " to "));
  readout.appendChild(numberSpan(cond, "num donut-cond-value"));
  center.appendChild(readout);
  wrap.appendChild(center);
  return wrap;
}

function heatColor(value: number | null, maxAbs: number, effectType: string): string {
  if (value === null) return "#eeeeee";
  const frac = Math.min(1, Math.abs(value) / (maxAbs || 1));
  const alpha = 0.15 + 0.85 * frac;
  // Positive helps an increase (green-ish blue), hurts a decrease (red).
  const positiveColor = effectType === "decrease" ? "214,39,40" : "44,110,160";
  const negativeColor = effectType === "decrease" ? "44,110,160" : "214,39,40";
  const rgb = value >= 0 ? positiveColor : negativeColor;
  return `rgba(${rgb},${alpha.toFixed(3)})`;
}

/** Screening matrix: diagonal = elevation, off-diagonal = screened term of
row cause against column cause; tooltip carries the formula used. */
export function matrixChart(report: ReportJson): HTMLElement {
  const ids = report.matrix.event_ids;
  const values = report.matrix.values;
  const isProb = report.effect.effect_type === "valuein";
  const maxAbs = Math.max(
    1e-9,
    ...values.flat().map((v) => (v === null ? 0 : Math.abs(v))),
  );
  const table = el("table", { class: "matrix", "data-role": "matrix" });
  table.dataset.sigIds = report.significant_ids.join(",");
  const head = el("tr");
  head.appendChild(el("th"));
  for (const id of ids) head.appendChild(el("th", { class: "matrix-col" }, id));
  table.appendChild(head);
  values.forEach((row, i) => {
    const tr = el("tr");
    tr.appendChild(el("th", { class: "matrix-row" }, ids[i]));
    row.forEach((value, j) => {
      const td = el("td", { class: "matrix-cell", "data-row": ids[i], "data-col": ids[j] });
      td.style.background = heatColor(value, maxAbs, report.effect.effect_type);
      const measure = isProb ? "P" : "E";
      const target = isProb ? "e" : "v_e";
      td.title =
        i === j
          ? `${measure}[${target}|c] - ${measure}[${target}] = ${fmt(value)}`
          : `${measure}[${target}|c AND x] - ${measure}[${target}|NOT c AND x] = ${fmt(value)} ` +
            `(c=${ids[i]}, x=${ids[j]})`;
      td.dataset.value = value === null ? "null" : String(value);
      tr.appendChild(td);
    });
    table.appendChild(tr);
  });
  return table;
}
