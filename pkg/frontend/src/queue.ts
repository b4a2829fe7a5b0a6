// Ticket queue: tickets grouped by trigger, with totals taken from the
// API summary rather than recounted ad hoc.

import type { Summary, TicketView } from "./types";

export interface QueueGroup {
  trigger: string;
  tickets: TicketView[];
}

export interface QueueState {
  tickets: TicketView[];
  summary: Summary | null;
  // true when the last refresh failed and the list shows old data
  stale: boolean;
  error: string;
}

export function groupByTrigger(tickets: TicketView[]): QueueGroup[] {
  const groups = new Map<string, TicketView[]>();
  for (const ticket of tickets) {
    const bucket = groups.get(ticket.trigger);
    if (bucket) bucket.push(ticket);
    else groups.set(ticket.trigger, [ticket]);
  }
  return [...groups.entries()].map(([trigger, items]) => ({
    trigger,
    tickets: items,
  }));
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderQueue(
  root: HTMLElement,
  state: QueueState,
  onSelect: (ticket: TicketView) => void,
): void {
  const doc = root.ownerDocument;
  root.textContent = "";
  root.classList.toggle("stale", state.stale);

  if (state.error) {
    const banner = el(doc, "div", "retry-banner");
    banner.setAttribute("role", "alert");
    banner.append(
      el(doc, "span", "retry-message", `Refresh failed: ${state.error}`),
      el(
        doc,
        "span",
        "stale-note",
        state.tickets.length ? " Showing last known data." : "",
      ),
    );
    root.append(banner);
  }

  if (!state.tickets.length) {
    if (!state.error) {
      root.append(el(doc, "div", "empty-state", "No tickets to review."));
    }
    return;
  }

  const totals = el(doc, "div", "queue-totals");
  const shown = state.tickets.length;
  totals.append(el(doc, "span", "shown-count", `${shown} tickets`));
  if (state.summary) {
    // the authoritative count comes from /summary, shown verbatim
    totals.append(
      el(doc, "span", "api-total", `API total: ${state.summary.tickets}`),
    );
    if (state.summary.tickets !== shown) {
      totals.append(el(doc, "span", "totals-drift", "out of sync"));
    }
  }
  root.append(totals);

  for (const group of groupByTrigger(state.tickets)) {
    const section = el(doc, "section", "queue-group");
    section.dataset.trigger = group.trigger;
    const header = el(doc, "header", "group-header");
    header.append(
      el(doc, "span", "group-trigger", group.trigger),
      el(doc, "span", "group-count", String(group.tickets.length)),
    );
    section.append(header);

    const list = el(doc, "ul", "group-tickets");
    for (const ticket of group.tickets) {
      const item = el(doc, "li", `ticket ticket-${ticket.status}`);
      item.dataset.ticketId = ticket.id;
      const button = el(doc, "button", "ticket-open", ticket.id);
      button.type = "button";
      button.addEventListener("click", () => onSelect(ticket));
      item.append(
        button,
        el(doc, "span", "ticket-problem", ticket.problem_id),
        el(doc, "span", "ticket-status", ticket.status),
        el(doc, "span", "ticket-stage", ticket.trial_status.stage),
      );
      list.append(item);
    }
    section.append(list);
    root.append(section);
  }
}
