// SVG comparison chart: simulated curve overlaid with the evaluated
// analytic answer, settling-tail shading, and a tolerance band.
//
// Scaling points to pixels is the only arithmetic here; every number
// written into the DOM is copied verbatim from the comparison report.

import type { PointReport } from "./types";

export interface ChartInputs {
  axis: number[];
  axisLabel: string;
  sim: number[];
  expr?: number[];
  report: PointReport;
  title?: string;
}

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 640;
const HEIGHT = 280;
const PAD = 28;

function svgEl(doc: Document, tag: string, attrs: Record<string, string>) {
  const node = doc.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  return node;
}

function scaler(min: number, max: number, lo: number, hi: number) {
  const span = max - min || 1;
  return (v: number) => lo + ((v - min) / span) * (hi - lo);
}

function polyPoints(
  axis: number[],
  values: number[],
  x: (v: number) => number,
  y: (v: number) => number,
): string {
  return axis.map((a, i) => `${x(a)},${y(values[i])}`).join(" ");
}

export function renderComparisonChart(
  root: HTMLElement,
  inputs: ChartInputs,
): void {
  const doc = root.ownerDocument;
  root.textContent = "";
  root.className = "comparison-chart";

  const { axis, sim, expr, report } = inputs;
  if (
    axis.length === 0 ||
    sim.length !== axis.length ||
    (expr !== undefined && expr.length !== axis.length)
  ) {
    const card = doc.createElement("div");
    card.className = "chart-error-card";
    card.setAttribute("role", "alert");
    card.textContent =
      "Cannot chart: the simulated and derived series do not share an axis.";
    root.append(card);
    return;
  }

  const badge = doc.createElement("span");
  const verdict =
    report.outcome === "Match" ? (report.matched_by ?? "Match") : "Mismatch";
  badge.className = `verdict-badge verdict-${verdict.toLowerCase()}`;
  badge.textContent = verdict;

  const heading = doc.createElement("header");
  heading.className = "chart-heading";
  if (inputs.title) {
    const title = doc.createElement("span");
    title.className = "chart-title";
    title.textContent = inputs.title;
    heading.append(title);
  }
  const axisLabel = doc.createElement("span");
  axisLabel.className = "axis-label";
  axisLabel.textContent = `vs ${inputs.axisLabel}`;
  heading.append(axisLabel, badge);
  root.append(heading);

  // tolerance band edges, for drawing only
  const band = axis.map((_, i) => {
    const reference = expr ? expr[i] : sim[i];
    const allowed =
      report.abs_tolerance +
      report.rel_tolerance *
        Math.max(Math.abs(sim[i]), Math.abs(reference));
    return { lo: reference - allowed, hi: reference + allowed };
  });

  const everything = [...sim, ...(expr ?? []), ...band.map((b) => b.lo), ...band.map((b) => b.hi)];
  const x = scaler(axis[0], axis[axis.length - 1], PAD, WIDTH - PAD);
  const y = scaler(
    Math.min(...everything),
    Math.max(...everything),
    HEIGHT - PAD,
    PAD,
  );

  const svg = svgEl(doc, "svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    width: String(WIDTH),
    height: String(HEIGHT),
  });

  // settling-tail shading: the last report.tail_window points
  const tailStart = Math.max(0, axis.length - report.tail_window);
  const tailX = x(axis[tailStart]);
  svg.append(
    svgEl(doc, "rect", {
      class: "tail-window",
      x: String(tailX),
      y: String(PAD),
      width: String(WIDTH - PAD - tailX),
      height: String(HEIGHT - 2 * PAD),
    }),
  );

  const bandPoints = [
    ...axis.map((a, i) => `${x(a)},${y(band[i].hi)}`),
    ...axis
      .map((a, i) => `${x(a)},${y(band[i].lo)}`)
      .reverse(),
  ].join(" ");
  svg.append(svgEl(doc, "polygon", { class: "tolerance-band", points: bandPoints }));

  svg.append(
    svgEl(doc, "polyline", {
      class: "series-sim",
      fill: "none",
      points: polyPoints(axis, sim, x, y),
    }),
  );
  if (expr) {
    svg.append(
      svgEl(doc, "polyline", {
        class: "series-expr",
        fill: "none",
        points: polyPoints(axis, expr, x, y),
      }),
    );
  }

  // worst point, exactly where the report says it is
  const worstIndex = report.max_deviation_index;
  if (worstIndex >= 0 && worstIndex < axis.length) {
    const marker = svgEl(doc, "circle", {
      class: "max-deviation-marker",
      cx: String(x(axis[worstIndex])),
      cy: String(y(sim[worstIndex])),
      r: "4",
    });
    marker.setAttribute("data-index", String(worstIndex));
    svg.append(marker);
  }
  root.append(svg);

  const readout = doc.createElement("dl");
  readout.className = "report-readout";
  const pairs: Array<[string, string, string]> = [
    ["max-deviation", "worst deviation", String(report.max_deviation)],
    ["max-deviation-index", "at index", String(report.max_deviation_index)],
    ["tail-window-size", "tail window", String(report.tail_window)],
    ["rel-tolerance", "rel tolerance", String(report.rel_tolerance)],
    ["abs-tolerance", "abs tolerance", String(report.abs_tolerance)],
  ];
  for (const [cls, label, value] of pairs) {
    const dt = doc.createElement("dt");
    dt.textContent = label;
    const dd = doc.createElement("dd");
    dd.className = cls;
    dd.textContent = value;
    readout.append(dt, dd);
  }
  root.append(readout);

  for (const warning of report.warnings) {
    const note = doc.createElement("div");
    note.className = "report-warning";
    note.textContent = warning;
    root.append(note);
  }
}
