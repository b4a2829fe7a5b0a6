// Correction editor: plain-text draft over the latest recognized
// description, diff highlighting, and the resolution submit flow.
//
// Drafts never auto-submit and survive every failure path; only a 200
// from the API clears one.

import { ApiError, ReviewApi } from "./api";
import { diffWords, hasEdits, renderDiff } from "./diff";
import type { TicketView, TrialStatus } from "./types";

export type CorrectionPhase =
  | "editing"
  | "confirm-empty" // submit pressed with no edits; waiting for confirmation
  | "submitting"
  | "scheduled" // accepted by the API, retrial running
  | "done"
  | "conflict" // 409: someone else resolved the ticket first
  | "failed";

export interface CorrectionOptions {
  kind?: string;
  pollMs?: number;
}

export class CorrectionPanel {
  phase: CorrectionPhase = "editing";
  draft: string;
  statusLine = "";
  conflictTicket: TicketView | null = null;
  lastTrialStatus: TrialStatus | null = null;

  private readonly kind: string;
  private readonly pollMs: number;
  private pollTimer: ReturnType<typeof setInterval> | null = null;
  private root: HTMLElement | null = null;

  constructor(
    private readonly api: ReviewApi,
    readonly ticket: TicketView,
    readonly baseline: string,
    options: CorrectionOptions = {},
  ) {
    this.draft = baseline;
    this.kind = options.kind ?? "circuit-correction";
    this.pollMs = options.pollMs ?? 2000;
  }

  setDraft(text: string): void {
    this.draft = text;
    if (this.phase === "confirm-empty") this.phase = "editing";
    this.rerender();
  }

  async submit(): Promise<void> {
    if (this.phase === "submitting" || this.phase === "scheduled") return;
    if (!hasEdits(this.baseline, this.draft)) {
      // empty diff: make the reviewer confirm they mean "resubmit as-is"
      this.phase = "confirm-empty";
      this.rerender();
      return;
    }
    await this.post();
  }

  async confirmEmptySubmit(): Promise<void> {
    if (this.phase !== "confirm-empty") return;
    await this.post();
  }

  cancelEmptySubmit(): void {
    if (this.phase !== "confirm-empty") return;
    this.phase = "editing";
    this.rerender();
  }

  dismissConflict(): void {
    if (this.phase !== "conflict") return;
    this.phase = "editing";
    this.rerender();
  }

  stop(): void {
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
  }

  private async post(): Promise<void> {
    this.phase = "submitting";
    this.statusLine = "submitting";
    this.rerender();
    try {
      // the full edited text goes up, never a patch
      const result = await this.api.submitResolution(
        this.ticket.id,
        this.kind,
        this.draft,
      );
      this.phase = "scheduled";
      this.statusLine = "retrial scheduled";
      this.lastTrialStatus = result.trial_status;
      this.draft = this.baseline; // cleared only here, on 200
      this.rerender();
      this.startPolling();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.phase = "conflict";
        this.statusLine = err.message;
        try {
          this.conflictTicket = await this.api.getTicket(this.ticket.id);
        } catch {
          this.conflictTicket = null;
        }
      } else {
        this.phase = "failed";
        this.statusLine = err instanceof Error ? err.message : String(err);
      }
      this.rerender(); // draft untouched: no silent overwrite, no lost edit
    }
  }

  private startPolling(): void {
    this.stop();
    this.pollTimer = setInterval(() => {
      void this.pollOnce();
    }, this.pollMs);
  }

  private async pollOnce(): Promise<void> {
    try {
      const state = await this.api.problemState(this.ticket.problem_id);
      this.lastTrialStatus = state.trial_status;
      if (!state.trial_status.retrial_running) {
        this.phase = "done";
        this.statusLine = `retrial finished: ${state.trial_status.stage}`;
        this.stop();
      } else {
        this.statusLine = `retrial running: ${state.trial_status.stage}`;
      }
    } catch {
      // transient poll failure: keep the optimistic status and try again
    }
    this.rerender();
  }

  render(root: HTMLElement): void {
    this.root = root;
    this.rerender();
  }

  private rerender(): void {
    const root = this.root;
    if (!root) return;
    const doc = root.ownerDocument;
    root.textContent = "";
    root.className = `correction-panel phase-${this.phase}`;

    const editor = doc.createElement("textarea");
    editor.className = "correction-draft";
    editor.value = this.draft;
    editor.addEventListener("input", () => {
      this.draft = editor.value;
      if (this.phase === "confirm-empty") this.phase = "editing";
    });
    root.append(editor);

    root.append(renderDiff(doc, diffWords(this.baseline, this.draft)));

    const submit = doc.createElement("button");
    submit.type = "button";
    submit.className = "correction-submit";
    submit.textContent = "Submit correction";
    submit.disabled = this.phase === "submitting" || this.phase === "scheduled";
    submit.addEventListener("click", () => {
      this.draft = editor.value;
      void this.submit();
    });
    root.append(submit);

    if (this.statusLine) {
      const status = doc.createElement("div");
      status.className = "correction-status";
      status.textContent = this.statusLine;
      root.append(status);
    }

    if (this.phase === "confirm-empty") {
      root.append(this.confirmDialog(doc));
    }
    if (this.phase === "conflict") {
      root.append(this.conflictDialog(doc));
    }
  }

  private confirmDialog(doc: Document): HTMLElement {
    const dialog = doc.createElement("div");
    dialog.className = "dialog empty-diff-dialog";
    dialog.setAttribute("role", "dialog");
    const message = doc.createElement("p");
    message.textContent =
      "The description is unchanged. Submit it as-is anyway?";
    const confirm = doc.createElement("button");
    confirm.type = "button";
    confirm.className = "confirm-empty";
    confirm.textContent = "Submit unchanged";
    confirm.addEventListener("click", () => void this.confirmEmptySubmit());
    const cancel = doc.createElement("button");
    cancel.type = "button";
    cancel.className = "cancel-empty";
    cancel.textContent = "Keep editing";
    cancel.addEventListener("click", () => this.cancelEmptySubmit());
    dialog.append(message, confirm, cancel);
    return dialog;
  }

  private conflictDialog(doc: Document): HTMLElement {
    const dialog = doc.createElement("div");
    dialog.className = "dialog conflict-dialog";
    dialog.setAttribute("role", "dialog");
    const message = doc.createElement("p");
    message.textContent = `This ticket changed under you: ${this.statusLine}`;
    dialog.append(message);
    if (this.conflictTicket) {
      const refreshed = doc.createElement("p");
      refreshed.className = "conflict-refreshed";
      const resolution = this.conflictTicket.resolution;
      refreshed.textContent = resolution
        ? `Now ${this.conflictTicket.status}, resolved as ${resolution.kind}.`
        : `Now ${this.conflictTicket.status}.`;
      dialog.append(refreshed);
    }
    const note = doc.createElement("p");
    note.className = "conflict-draft-note";
    note.textContent = "Your draft is preserved above.";
    const dismiss = doc.createElement("button");
    dismiss.type = "button";
    dismiss.className = "dismiss-conflict";
    dismiss.textContent = "Back to editor";
    dismiss.addEventListener("click", () => this.dismissConflict());
    dialog.append(note, dismiss);
    return dialog;
  }
}
