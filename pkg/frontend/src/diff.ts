// Word-level diff for prose descriptions: enough to highlight what the
// reviewer changed, not a general-purpose patch tool.

export interface DiffSpan {
  kind: "same" | "removed" | "added";
  text: string;
}

function tokenize(text: string): string[] {
  // words and whitespace runs as separate tokens, so the diff keeps layout
  return text.match(/\S+|\s+/g) ?? [];
}

export function diffWords(before: string, after: string): DiffSpan[] {
  const a = tokenize(before);
  const b = tokenize(after);

  // longest common subsequence over tokens
  const rows = a.length + 1;
  const cols = b.length + 1;
  const lcs = new Uint32Array(rows * cols);
  for (let i = a.length - 1; i >= 0; i--) {
    for (let j = b.length - 1; j >= 0; j--) {
      lcs[i * cols + j] =
        a[i] === b[j]
          ? lcs[(i + 1) * cols + j + 1] + 1
          : Math.max(lcs[(i + 1) * cols + j], lcs[i * cols + j + 1]);
    }
  }

  const spans: DiffSpan[] = [];
  const push = (kind: DiffSpan["kind"], text: string) => {
    const last = spans[spans.length - 1];
    if (last && last.kind === kind) last.text += text;
    else spans.push({ kind, text });
  };

  let i = 0;
  let j = 0;
  while (i < a.length && j < b.length) {
    if (a[i] === b[j]) {
      push("same", a[i]);
      i++;
      j++;
    } else if (lcs[(i + 1) * cols + j] >= lcs[i * cols + j + 1]) {
      push("removed", a[i]);
      i++;
    } else {
      push("added", b[j]);
      j++;
    }
  }
  while (i < a.length) push("removed", a[i++]);
  while (j < b.length) push("added", b[j++]);
  return spans;
}

export function hasEdits(before: string, after: string): boolean {
  return before !== after;
}

export function renderDiff(doc: Document, spans: DiffSpan[]): HTMLElement {
  const container = doc.createElement("div");
  container.className = "description-diff";
  for (const span of spans) {
    const node = doc.createElement(
      span.kind === "removed" ? "del" : span.kind === "added" ? "ins" : "span",
    );
    node.className = `diff-${span.kind}`;
    node.textContent = span.text;
    container.append(node);
  }
  return container;
}
