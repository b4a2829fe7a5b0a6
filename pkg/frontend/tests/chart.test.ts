// Chart contract: every number on screen is the report's number, the
// worst-point marker sits where the report says, and series that do not
// share an axis produce an error card instead of a chart.

import { afterEach, beforeEach, describe, expect, it } from "vitest";
import { renderComparisonChart, type ChartInputs } from "../src/chart";
import { makeReport } from "./helpers";

let root: HTMLElement;

beforeEach(() => {
  root = document.createElement("div");
  document.body.append(root);
});

afterEach(() => {
  root.remove();
});

function inputs(overrides: Partial<ChartInputs> = {}): ChartInputs {
  return {
    axis: [0, 0.1, 0.2, 0.3, 0.4],
    axisLabel: "time",
    sim: [0, 3.93, 6.32, 7.77, 8.65],
    expr: [0, 3.935, 6.321, 7.769, 8.647],
    report: makeReport({
      deviations: [0, 0.0013, 0.0002, 0.0001, 0.0004],
      point_pass: [true, true, true, true, true],
      tail_window: 2,
      max_deviation: 0.0013,
      max_deviation_index: 1,
    }),
    title: "vout",
    ...overrides,
  };
}

describe("renderComparisonChart", () => {
  it("displays the report values verbatim", () => {
    const report = makeReport({
      rel_tolerance: 0.02,
      abs_tolerance: 1e-6,
      tail_window: 53,
      max_deviation: 0.009796428710047848,
      max_deviation_index: 1044,
      deviations: new Array(1045).fill(0.001),
      point_pass: new Array(1045).fill(true),
    });
    const axis = Array.from({ length: 1045 }, (_, i) => i * 0.0005);
    const sim = axis.map((t) => 10 - 5 * Math.exp(-12.5 * t));
    renderComparisonChart(root, {
      axis,
      axisLabel: "time",
      sim,
      report,
      title: "vout",
    });

    // no reformatting, no rounding: String() of the payload field exactly
    expect(root.querySelector(".max-deviation")!.textContent).toBe(
      String(report.max_deviation),
    );
    expect(root.querySelector(".max-deviation")!.textContent).toBe(
      "0.009796428710047848",
    );
    expect(root.querySelector(".max-deviation-index")!.textContent).toBe("1044");
    expect(root.querySelector(".tail-window-size")!.textContent).toBe("53");
    expect(root.querySelector(".rel-tolerance")!.textContent).toBe(
      String(report.rel_tolerance),
    );
    expect(root.querySelector(".abs-tolerance")!.textContent).toBe(
      String(report.abs_tolerance),
    );

    const marker = root.querySelector(".max-deviation-marker")!;
    expect(marker.getAttribute("data-index")).toBe("1044");
  });

  it("draws both curves, the tolerance band, and the settling-tail shading", () => {
    renderComparisonChart(root, inputs());
    expect(root.querySelector("polyline.series-sim")).not.toBeNull();
    expect(root.querySelector("polyline.series-expr")).not.toBeNull();
    expect(root.querySelector("polygon.tolerance-band")).not.toBeNull();
    expect(root.querySelector("rect.tail-window")).not.toBeNull();
    expect(root.querySelector(".chart-title")!.textContent).toBe("vout");
    expect(root.querySelector(".axis-label")!.textContent).toBe("vs time");
  });

  it("badges a global match as Global", () => {
    renderComparisonChart(root, inputs());
    const badge = root.querySelector(".verdict-badge")!;
    expect(badge.textContent).toBe("Global");
    expect(badge.classList.contains("verdict-global")).toBe(true);
  });

  it("badges a tail-only match as TailOnly", () => {
    renderComparisonChart(
      root,
      inputs({
        report: makeReport({
          matched_by: "TailOnly",
          global_pass: false,
          tail_window: 2,
        }),
      }),
    );
    const badge = root.querySelector(".verdict-badge")!;
    expect(badge.textContent).toBe("TailOnly");
    expect(badge.classList.contains("verdict-tailonly")).toBe(true);
  });

  it("badges a mismatch as Mismatch", () => {
    renderComparisonChart(
      root,
      inputs({
        report: makeReport({
          outcome: "Mismatch",
          matched_by: null,
          global_pass: false,
          tail_pass: false,
        }),
      }),
    );
    const badge = root.querySelector(".verdict-badge")!;
    expect(badge.textContent).toBe("Mismatch");
    expect(badge.classList.contains("verdict-mismatch")).toBe(true);
  });

  it("puts the worst-point marker at the reported index", () => {
    renderComparisonChart(root, inputs());
    const marker = root.querySelector(".max-deviation-marker")!;
    expect(marker.getAttribute("data-index")).toBe("1");
  });

  it("refuses to chart series that do not share an axis", () => {
    renderComparisonChart(
      root,
      inputs({ sim: [1, 2, 3], expr: undefined }),
    );
    const card = root.querySelector(".chart-error-card")!;
    expect(card.getAttribute("role")).toBe("alert");
    expect(card.textContent).toContain("do not share an axis");
    expect(root.querySelector("svg")).toBeNull();
  });

  it("refuses an expr series of a different length", () => {
    renderComparisonChart(root, inputs({ expr: [1, 2] }));
    expect(root.querySelector(".chart-error-card")).not.toBeNull();
    expect(root.querySelector("svg")).toBeNull();
  });

  it("renders report warnings", () => {
    renderComparisonChart(
      root,
      inputs({ report: makeReport({ warnings: ["axis resampled"] }) }),
    );
    expect(root.querySelector(".report-warning")!.textContent).toBe(
      "axis resampled",
    );
  });
});
