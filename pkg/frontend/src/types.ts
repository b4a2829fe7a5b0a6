// Shapes of the review API payloads this client consumes.

export type TicketStatus = "open" | "closed";

export interface ArtifactLink {
  name: string;
  url: string;
}

export interface TrialStatus {
  stage: string;
  llm_trial: number;
  sim_trial: number;
  retrial_running: boolean;
}

export interface Resolution {
  kind: string;
  text: string;
  ts: number;
}

export interface TicketView {
  id: string;
  problem_id: string;
  trigger: string;
  created_at: number;
  status: TicketStatus;
  review_request: string;
  artifacts: ArtifactLink[];
  resolution: Resolution | null;
  trial_status: TrialStatus;
}

export interface ResolutionResult {
  ticket_id: string;
  problem_id: string;
  kind: string;
  stage: string;
  llm_trial: number;
  sim_trial: number;
  trial_status: TrialStatus;
}

export interface ProblemListing {
  id: string;
  stage: string;
  llm_trial: number;
  sim_trial: number;
  open_tickets: number;
}

export interface Summary {
  problems: number;
  accepted: number;
  awaiting_review: number;
  failed: number;
  in_progress: number;
  accepted_by_trial: Record<string, number>;
  accepted_cumulative: Record<string, number>;
  tickets: number;
  ticket_triggers: Record<string, number>;
  awaiting_triggers: Record<string, number>;
  failure_reasons: Record<string, number>;
  per_problem: Record<
    string,
    { stage: string; llm_trial: number; sim_trial: number; tickets: number }
  >;
}

// Per-variable comparison verdict as stored in compare_report.json targets.
export interface PointReport {
  rel_tolerance: number;
  abs_tolerance: number;
  deviations: number[];
  point_pass: boolean[];
  global_pass: boolean;
  tail_pass: boolean;
  tail_window: number;
  outcome: "Match" | "Mismatch";
  matched_by: "Global" | "TailOnly" | null;
  max_deviation: number;
  max_deviation_index: number;
  angular: boolean;
  warnings: string[];
}

export interface TargetComparison {
  name: string;
  kind: string;
  match: boolean;
  matched_by: "Global" | "TailOnly" | null;
  report?: PointReport; // time-series targets
  magnitude?: PointReport; // network-function targets
  phase?: PointReport;
}

export interface CompareReport {
  overall: "match" | "mismatch";
  matched_by: "Global" | "TailOnly" | null;
  llm_trial: number;
  sim_trial: number;
  changed_side: string;
  rel_tolerance: number;
  abs_tolerance: number;
  targets: TargetComparison[];
}

// series.json: the axis under its kind name ("time" or "frequency") plus
// one number list per recorded variable.
export type SeriesPayload = Record<string, number[]>;

// expr_series.json: evaluated analytic answer per target name; network
// functions store magnitude/phase lists instead of a flat vector.
export type ExprSeriesPayload = Record<
  string,
  number[] | { magnitude: number[]; phase: number[] }
>;
