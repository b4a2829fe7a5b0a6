// Shared test scaffolding: a recording fetch stub plus payload factories
// shaped like the review API's responses.

import type { PointReport, Summary, TicketView } from "../src/types";

export interface RecordedRequest {
  method: string;
  url: string;
  body: unknown;
}

type Handler = (req: RecordedRequest) => Response;

interface Route {
  method: string;
  url: string;
  handler: Handler;
}

export function json(data: unknown, status = 200): Response {
  return new Response(JSON.stringify(data), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function text(body: string, status = 200): Response {
  return new Response(body, {
    status,
    headers: { "Content-Type": "text/plain" },
  });
}

export class FakeApi {
  requests: RecordedRequest[] = [];
  // when true every request rejects, as a dead server would
  networkDown = false;

  private routes: Route[] = [];

  route(method: string, url: string, response: Handler | unknown): void {
    const handler =
      typeof response === "function" ? (response as Handler) : () => json(response);
    this.routes.push({ method: method.toUpperCase(), url, handler });
  }

  requestsTo(method: string, url: string): RecordedRequest[] {
    return this.requests.filter((r) => r.method === method && r.url === url);
  }

  fetch = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url =
      typeof input === "string"
        ? input
        : input instanceof URL
          ? input.toString()
          : input.url;
    const method = (init?.method ?? "GET").toUpperCase();
    let body: unknown = null;
    if (typeof init?.body === "string") {
      try {
        body = JSON.parse(init.body);
      } catch {
        body = init.body;
      }
    }
    const recorded: RecordedRequest = { method, url, body };
    this.requests.push(recorded);
    if (this.networkDown) throw new TypeError("fetch failed");
    for (let i = this.routes.length - 1; i >= 0; i--) {
      const route = this.routes[i];
      if (route.method === method && route.url === url) {
        return route.handler(recorded);
      }
    }
    return json({ detail: `no route for ${method} ${url}` }, 404);
  };
}

export function makeTicket(overrides: Partial<TicketView> = {}): TicketView {
  return {
    id: "t1",
    problem_id: "p1",
    trigger: "persistent-mismatch",
    created_at: 1_700_000_000,
    status: "open",
    review_request: "Simulation and derivation disagree after three attempts.",
    artifacts: [],
    resolution: null,
    trial_status: {
      stage: "await-review",
      llm_trial: 3,
      sim_trial: 3,
      retrial_running: false,
    },
    ...overrides,
  };
}

export function makeSummary(overrides: Partial<Summary> = {}): Summary {
  return {
    problems: 3,
    accepted: 1,
    awaiting_review: 2,
    failed: 0,
    in_progress: 0,
    accepted_by_trial: { "1": 1 },
    accepted_cumulative: { "1": 1 },
    tickets: 3,
    ticket_triggers: { "persistent-mismatch": 2, "lint-failure": 1 },
    awaiting_triggers: { "persistent-mismatch": 2 },
    failure_reasons: {},
    per_problem: {},
    ...overrides,
  };
}

export function makeReport(overrides: Partial<PointReport> = {}): PointReport {
  return {
    rel_tolerance: 0.02,
    abs_tolerance: 1e-6,
    deviations: [0.001, 0.002, 0.0005],
    point_pass: [true, true, true],
    global_pass: true,
    tail_pass: true,
    tail_window: 1,
    outcome: "Match",
    matched_by: "Global",
    max_deviation: 0.002,
    max_deviation_index: 1,
    angular: false,
    warnings: [],
    ...overrides,
  };
}
