/** Analysis views: importance bars, range comparisons, and the step plan
 * timeline. Numbers are rendered exactly as served; bar geometry only
 * rescales them for display. */

import { clear, el } from "./dom.js";
import {
  formatBound,
  formatDelta,
  formatOverlap,
  formatPercent,
  formatPhi,
  formatValue,
} from "./format.js";
import type {
  ImportancePayload,
  RangeRow,
  RangesPayload,
  RecommendationPayload,
} from "./types.js";

export type HelpHandler = (feature: string, kind: "importance" | "range") => void;

function helpButton(feature: string, kind: "importance" | "range", onHelp: HelpHandler): HTMLElement {
  const btn = el("button", "help-btn", "?");
  btn.type = "button";
  btn.dataset.feature = feature;
  btn.setAttribute("aria-label", `evidence for ${feature} ${kind}`);
  btn.title = `Why ${feature}? Show the evidence`;
  btn.addEventListener("click", () => onHelp(feature, kind));
  return btn;
}

/** Horizontal attribution bars, one row per feature in served rank order. */
export function renderImportanceView(
  target: HTMLElement,
  payload: ImportancePayload,
  onHelp: HelpHandler,
): void {
  clear(target);
  if (payload.features.length === 0) {
    target.appendChild(el("p", "placeholder", "No importance data for this patient."));
    return;
  }
  target.appendChild(
    el("p", "view-caption", `Influence on this prediction, ranked by the ${payload.selected} explainer.`),
  );
  const maxAbs = payload.features.reduce((m, row) => Math.max(m, Math.abs(row.phi)), 0);
  const list = el("div", "importance-list");
  for (const row of payload.features) {
    const item = el("div", "importance-row");
    item.dataset.feature = row.feature;
    item.appendChild(el("span", "row-label", row.feature));

    const track = el("div", "bar-track");
    const bar = el("div", `bar ${row.phi >= 0 ? "bar-positive" : "bar-negative"}`);
    const width = maxAbs > 0 ? (Math.abs(row.phi) / maxAbs) * 100 : 0;
    bar.style.width = `${width}%`;
    track.appendChild(bar);
    item.appendChild(track);

    item.appendChild(el("span", "row-number", formatPhi(row.phi)));
    item.appendChild(helpButton(row.feature, "importance", onHelp));
    list.appendChild(item);
  }
  target.appendChild(list);
}

function rangeScale(row: RangeRow): { lo: number; hi: number } {
  let lo = row.ai_low;
  let hi = row.ai_high;
  if (row.sci_low !== undefined && row.sci_high !== undefined) {
    lo = Math.min(lo, row.sci_low);
    hi = Math.max(hi, row.sci_high);
  }
  // Degenerate spans still need a nonzero axis to place bars on.
  if (hi <= lo) {
    hi = lo + 1;
  }
  return { lo, hi };
}

function intervalBar(
  low: number,
  high: number,
  scale: { lo: number; hi: number },
  className: string,
  label: string,
): HTMLElement {
  const track = el("div", "interval-track");
  const span = hiLoSpan(low, high, scale, className);
  span.title = label;
  track.appendChild(span);
  return track;
}

function hiLoSpan(low: number, high: number, scale: { lo: number; hi: number }, className: string): HTMLElement {
  const width = scale.hi - scale.lo;
  const left = ((low - scale.lo) / width) * 100;
  const right = ((high - scale.lo) / width) * 100;
  const span = el("div", className);
  span.style.left = `${left}%`;
  span.style.width = `${Math.max(0, right - left)}%`;
  return span;
}

/** Paired interval bars per feature: AI-observed against the curated
 * reference, with the intersection shaded when the two overlap. */
export function renderRangesView(
  target: HTMLElement,
  payload: RangesPayload,
  onHelp: HelpHandler,
): void {
  clear(target);
  if (payload.features.length === 0) {
    target.appendChild(el("p", "placeholder", "No range data for this patient."));
    return;
  }
  const group = payload.predicted_class === 1 ? "predicted at-risk" : "predicted healthy";
  target.appendChild(
    el("p", "view-caption", `Observed across the ${payload.n_class_samples} ${group} patients.`),
  );
  if (payload.low_confidence) {
    target.appendChild(
      el("p", "low-confidence", "Few similar patients; these observed ranges are low confidence."),
    );
  }

  const list = el("div", "ranges-list");
  for (const row of payload.features) {
    const item = el("div", "range-row");
    item.dataset.feature = row.feature;

    const head = el("div", "range-head");
    head.appendChild(el("span", "row-label", row.feature));
    head.appendChild(el("span", "feature-unit", row.unit));
    head.appendChild(helpButton(row.feature, "range", onHelp));
    item.appendChild(head);

    const scale = rangeScale(row);
    const aiLabel = `AI-observed ${formatBound(row.ai_low)} to ${formatBound(row.ai_high)}`;
    item.appendChild(intervalBar(row.ai_low, row.ai_high, scale, "interval interval-ai", aiLabel));

    if (row.sci_low !== undefined && row.sci_high !== undefined) {
      const sciLabel = `${row.sci_kind} reference ${formatBound(row.sci_low)} to ${formatBound(row.sci_high)}`;
      const sciTrack = intervalBar(row.sci_low, row.sci_high, scale, "interval interval-sci", sciLabel);
      const overlapLow = Math.max(row.ai_low, row.sci_low);
      const overlapHigh = Math.min(row.ai_high, row.sci_high);
      if (overlapHigh > overlapLow) {
        sciTrack.appendChild(hiLoSpan(overlapLow, overlapHigh, scale, "interval-overlap"));
      }
      item.appendChild(sciTrack);
      item.appendChild(
        el(
          "div",
          "range-note",
          `AI ${formatBound(row.ai_low)}–${formatBound(row.ai_high)} vs ` +
            `${row.sci_kind} ${formatBound(row.sci_low)}–${formatBound(row.sci_high)} ` +
            `(overlap ${formatOverlap(row.overlap ?? 0)})`,
        ),
      );
    } else {
      item.appendChild(
        el("div", "range-note", `AI ${formatBound(row.ai_low)}–${formatBound(row.ai_high)}; no curated reference range.`),
      );
    }
    list.appendChild(item);
  }
  target.appendChild(list);
}

/** Step plan timeline, or the matching explanatory state when the server
 * reports nothing to change or nothing feasible. */
export function renderRecommendationView(
  target: HTMLElement,
  payload: RecommendationPayload | null,
  onRequest: () => void,
  pending: boolean,
): void {
  clear(target);

  const button = el("button", "primary-btn", "Get Recommendation");
  button.type = "button";
  button.id = "get-recommendation";
  button.disabled = pending;
  button.addEventListener("click", onRequest);

  if (payload === null) {
    target.appendChild(
      el("p", "placeholder", "No plan requested yet. Ask for a step-by-step path to a healthy prediction."),
    );
    target.appendChild(button);
    return;
  }

  if (payload.status === "no_change_needed") {
    const note = el("div", "no-change");
    note.appendChild(el("p", undefined, "No change needed."));
    note.appendChild(el("p", "view-caption", "This patient is already predicted healthy."));
    target.appendChild(note);
    target.appendChild(button);
    return;
  }

  if (payload.status === "no_feasible_plan" || payload.plan === undefined) {
    target.appendChild(
      el("p", "placeholder", "No achievable combination of changes flips this prediction within observed bounds."),
    );
    target.appendChild(button);
    return;
  }

  const plan = payload.plan;
  const list = el("ol", "timeline");
  plan.steps.forEach((step, i) => {
    const item = el("li", "step");
    item.appendChild(el("span", `badge badge-${step.feasibility}`, step.feasibility));
    item.appendChild(
      el(
        "span",
        "step-text",
        `Step ${i + 1}: ${step.feature} ${formatDelta(step.delta)} to ${formatValue(step.cumulative_value)}`,
      ),
    );
    item.appendChild(
      el("span", "step-risk", `risk after: ${formatPercent(step.predicted_probability_after)}`),
    );
    list.appendChild(item);
  });
  target.appendChild(list);
  target.appendChild(el("p", "horizon-note", plan.horizon_note));
  target.appendChild(button);
}
