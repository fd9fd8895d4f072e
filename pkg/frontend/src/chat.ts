/** Chat transcript rendering. Engine-templated, external, and
 * unavailable replies each get a distinct visual treatment; evidence
 * cards carry hoverable citations whose hover text repeats the served
 * citation record. */

import { clear, el } from "./dom.js";
import type { ChatMessage } from "./state.js";
import type { Citation, EvidencePayload } from "./types.js";

export type RetryHandler = (query: string) => void;

/** Hover text for a citation: the served record's fields, unmodified. */
export function citationHoverText(c: Citation): string {
  return `${c.marker} ${c.title} (${c.source_type}, ${c.year}) ${c.locator}`;
}

function citationSpan(c: Citation, text: string): HTMLElement {
  const span = el("span", "citation", text);
  span.title = citationHoverText(c);
  span.dataset.marker = c.marker;
  return span;
}

/** Summary text with each [n] marker wrapped as a hoverable citation. */
function summaryWithMarkers(summary: string, citations: Citation[]): HTMLElement {
  const byMarker = new Map(citations.map((c) => [c.marker, c]));
  const holder = el("p", "evidence-summary");
  for (const part of summary.split(/(\[\d+\])/)) {
    const cite = byMarker.get(part);
    if (cite !== undefined) {
      holder.appendChild(citationSpan(cite, part));
    } else if (part) {
      holder.appendChild(document.createTextNode(part));
    }
  }
  return holder;
}

function evidenceCard(payload: EvidencePayload): HTMLElement {
  const card = el("div", "msg msg-evidence");
  card.appendChild(el("div", "msg-tag", `evidence: ${payload.feature} ${payload.kind}`));
  card.appendChild(summaryWithMarkers(payload.summary, payload.citations));
  const sources = el("ul", "citation-list");
  for (const c of payload.citations) {
    const item = el("li");
    item.appendChild(citationSpan(c, `${c.marker} ${c.title}`));
    sources.appendChild(item);
  }
  card.appendChild(sources);
  return card;
}

function messageNode(msg: ChatMessage, onRetry: RetryHandler): HTMLElement {
  switch (msg.kind) {
    case "user":
      return el("div", "msg msg-user", msg.text);
    case "reply": {
      const cls =
        msg.provenance === "external"
          ? "msg msg-external"
          : msg.provenance === "unavailable"
            ? "msg msg-unavailable"
            : "msg msg-engine";
      const node = el("div", cls);
      if (msg.provenance !== "grammar") {
        node.appendChild(el("div", "msg-tag", msg.provenance));
      }
      node.appendChild(el("p", undefined, msg.text));
      return node;
    }
    case "evidence":
      return evidenceCard(msg.payload);
    case "note":
      return el("div", "msg msg-note", msg.text);
    case "error": {
      const node = el("div", "msg msg-error");
      node.appendChild(el("p", undefined, msg.text));
      const retry = el("button", "retry-btn", "Retry");
      retry.type = "button";
      retry.addEventListener("click", () => onRetry(msg.query));
      node.appendChild(retry);
      return node;
    }
  }
}

/** Replace `target` content with the full transcript, newest last. */
export function renderTranscript(target: HTMLElement, transcript: ChatMessage[], onRetry: RetryHandler): void {
  clear(target);
  for (const msg of transcript) {
    target.appendChild(messageNode(msg, onRetry));
  }
  target.scrollTop = target.scrollHeight;
}
