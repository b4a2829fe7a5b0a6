// Thin fetch client for the review API. Every number the UI shows comes
// through here; nothing is recomputed client-side.

import type {
  ProblemListing,
  ResolutionResult,
  Summary,
  TicketStatus,
  TicketView,
} from "./types";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

export interface ClientOptions {
  baseUrl?: string;
  token?: string;
}

async function errorDetail(res: Response): Promise<string> {
  try {
    const body = await res.json();
    if (body && typeof body.detail === "string") return body.detail;
  } catch {
    // non-JSON error body; fall through to the status text
  }
  return res.statusText || `HTTP ${res.status}`;
}

export class ReviewApi {
  private readonly baseUrl: string;
  private readonly token: string;

  constructor(options: ClientOptions = {}) {
    this.baseUrl = (options.baseUrl ?? "").replace(/\/$/, "");
    this.token = options.token ?? "";
  }

  url(path: string): string {
    return this.baseUrl + path;
  }

  private headers(json: boolean): Record<string, string> {
    const headers: Record<string, string> = {};
    if (json) headers["Content-Type"] = "application/json";
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    return headers;
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const res = await fetch(this.url(path), {
      ...init,
      headers: { ...this.headers(init?.body != null), ...init?.headers },
    });
    if (!res.ok) throw new ApiError(res.status, await errorDetail(res));
    return res;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.request(path, init);
    return (await res.json()) as T;
  }

  listTickets(status?: TicketStatus): Promise<TicketView[]> {
    const query = status ? `?status=${status}` : "";
    return this.json(`/tickets${query}`);
  }

  getTicket(id: string): Promise<TicketView> {
    return this.json(`/tickets/${encodeURIComponent(id)}`);
  }

  submitResolution(
    ticketId: string,
    kind: string,
    text: string,
  ): Promise<ResolutionResult> {
    return this.json(`/tickets/${encodeURIComponent(ticketId)}/resolution`, {
      method: "POST",
      body: JSON.stringify({ kind, text }),
    });
  }

  listProblems(): Promise<ProblemListing[]> {
    return this.json("/problems");
  }

  problemState(problemId: string): Promise<Record<string, unknown> & { trial_status: TicketView["trial_status"] }> {
    return this.json(`/problems/${encodeURIComponent(problemId)}/state`);
  }

  summary(): Promise<Summary> {
    return this.json("/summary");
  }

  // Artifact links arrive as API-relative URLs on the ticket view.
  artifactJson<T>(url: string): Promise<T> {
    return this.json<T>(url);
  }

  async artifactText(url: string): Promise<string> {
    const res = await this.request(url);
    return res.text();
  }
}
