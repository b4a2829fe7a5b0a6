// Review dashboard: polls the queue, opens tickets into a detail pane
// with the description editor and the comparison chart.

import { ReviewApi } from "./api";
import { renderComparisonChart } from "./chart";
import { CorrectionPanel } from "./correction";
import { renderQueue, type QueueState } from "./queue";
import type {
  ArtifactLink,
  CompareReport,
  ExprSeriesPayload,
  SeriesPayload,
  TicketView,
} from "./types";

export interface DashboardOptions {
  baseUrl?: string;
  token?: string;
  pollMs?: number;
}

// newest description version first; the first present link is the baseline
const DESCRIPTION_NAMES = [
  "description_v3.txt",
  "description_v2.txt",
  "description_v1.txt",
];

function link(ticket: TicketView, name: string): ArtifactLink | undefined {
  return ticket.artifacts.find((a) => a.name === name);
}

// the recorded vector usually carries the target's name; a single-variable
// series is unambiguous either way
function simVector(
  sim: SeriesPayload,
  axisKind: string,
  name: string,
): number[] {
  const direct = sim[name];
  if (direct) return direct;
  const others = Object.keys(sim).filter((key) => key !== axisKind);
  return others.length === 1 ? sim[others[0]] : [];
}

export class Dashboard {
  readonly api: ReviewApi;
  readonly state: QueueState = {
    tickets: [],
    summary: null,
    stale: false,
    error: "",
  };
  selected: TicketView | null = null;
  panel: CorrectionPanel | null = null;

  private readonly pollMs: number;
  private pollTimer: ReturnType<typeof setInterval> | null = null;
  private readonly queueRoot: HTMLElement;
  private readonly detailRoot: HTMLElement;

  constructor(root: HTMLElement, options: DashboardOptions = {}) {
    this.api = new ReviewApi(options);
    this.pollMs = options.pollMs ?? 2000;
    const doc = root.ownerDocument;
    this.queueRoot = doc.createElement("div");
    this.queueRoot.className = "queue-pane";
    this.detailRoot = doc.createElement("div");
    this.detailRoot.className = "detail-pane";
    root.append(this.queueRoot, this.detailRoot);
  }

  async start(): Promise<void> {
    await this.refresh();
    this.pollTimer = setInterval(() => {
      void this.refresh();
    }, this.pollMs);
  }

  stop(): void {
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
    this.panel?.stop();
  }

  async refresh(): Promise<void> {
    try {
      const [tickets, summary] = await Promise.all([
        this.api.listTickets(),
        this.api.summary(),
      ]);
      this.state.tickets = tickets;
      this.state.summary = summary;
      this.state.stale = false;
      this.state.error = "";
    } catch (err) {
      // keep the last good data on screen, marked stale
      this.state.stale = true;
      this.state.error = err instanceof Error ? err.message : String(err);
    }
    renderQueue(this.queueRoot, this.state, (ticket) => {
      void this.select(ticket);
    });
  }

  async select(ticket: TicketView): Promise<void> {
    this.selected = ticket;
    this.panel?.stop();
    this.panel = null;
    const doc = this.detailRoot.ownerDocument;
    this.detailRoot.textContent = "";

    const heading = doc.createElement("h2");
    heading.className = "detail-heading";
    heading.textContent = `${ticket.id} (${ticket.trigger})`;
    const request = doc.createElement("p");
    request.className = "review-request";
    request.textContent = ticket.review_request;
    this.detailRoot.append(heading, request);

    const diagram = link(ticket, "diagram.png") ?? link(ticket, "diagram.jpg");
    if (diagram) {
      const img = doc.createElement("img");
      img.className = "ticket-diagram";
      img.src = this.api.url(diagram.url);
      img.alt = "problem schematic";
      this.detailRoot.append(img);
    }

    const descriptionLink = DESCRIPTION_NAMES.map((name) =>
      link(ticket, name),
    ).find((found) => found !== undefined);
    if (descriptionLink && ticket.status === "open") {
      const baseline = await this.api.artifactText(descriptionLink.url);
      const panelRoot = doc.createElement("div");
      this.detailRoot.append(panelRoot);
      this.panel = new CorrectionPanel(this.api, ticket, baseline, {
        pollMs: this.pollMs,
      });
      this.panel.render(panelRoot);
    }

    await this.renderCharts(ticket);
  }

  private async renderCharts(ticket: TicketView): Promise<void> {
    const seriesLink = link(ticket, "series.json");
    const reportLink = link(ticket, "compare_report.json");
    if (!seriesLink || !reportLink) return;
    const doc = this.detailRoot.ownerDocument;

    let sim: SeriesPayload;
    let report: CompareReport;
    let curves: ExprSeriesPayload = {};
    try {
      [sim, report] = await Promise.all([
        this.api.artifactJson<SeriesPayload>(seriesLink.url),
        this.api.artifactJson<CompareReport>(reportLink.url),
      ]);
      const exprLink = link(ticket, "expr_series.json");
      if (exprLink) {
        curves = await this.api.artifactJson<ExprSeriesPayload>(exprLink.url);
      }
    } catch {
      const card = doc.createElement("div");
      card.className = "chart-error-card";
      card.textContent = "Comparison artifacts could not be loaded.";
      this.detailRoot.append(card);
      return;
    }

    const axisKind = "time" in sim ? "time" : "frequency";
    const axis = sim[axisKind] ?? [];

    for (const target of report.targets) {
      const chartRoot = doc.createElement("div");
      this.detailRoot.append(chartRoot);
      const evaluated = curves[target.name];
      if (target.report) {
        const expr = Array.isArray(evaluated) ? evaluated : undefined;
        renderComparisonChart(chartRoot, {
          axis,
          axisLabel: axisKind,
          sim: simVector(sim, axisKind, target.name),
          expr,
          report: target.report,
          title: target.name,
        });
      } else if (target.magnitude && target.phase) {
        const pair =
          evaluated && !Array.isArray(evaluated) ? evaluated : undefined;
        renderComparisonChart(chartRoot, {
          axis,
          axisLabel: axisKind,
          sim: sim["magout"] ?? [],
          expr: pair?.magnitude,
          report: target.magnitude,
          title: `${target.name} magnitude`,
        });
        const phaseRoot = doc.createElement("div");
        this.detailRoot.append(phaseRoot);
        renderComparisonChart(phaseRoot, {
          axis,
          axisLabel: axisKind,
          sim: sim["phout"] ?? [],
          expr: pair?.phase,
          report: target.phase,
          title: `${target.name} phase`,
        });
      }
    }
  }
}

export function mountDashboard(
  root: HTMLElement,
  options: DashboardOptions = {},
): Dashboard {
  const dashboard = new Dashboard(root, options);
  void dashboard.start();
  return dashboard;
}
