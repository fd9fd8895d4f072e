/** Record view: risk summary header plus one panel per feature showing
 * the patient's value against the cohort distribution and clinical bands. */

import { clear, el, svgEl } from "./dom.js";
import { bandSeverity, formatPercent, formatValue, positionPercent } from "./format.js";
import type { FeaturePanelModel, PatientView } from "./types.js";

const PLOT_W = 240;
const PLOT_H = 52;
const BAR_TOP = 4;
const BAR_BASE = 48;

function xAt(value: number, panel: FeaturePanelModel): number {
  return (positionPercent(value, panel.min, panel.max) / 100) * PLOT_W;
}

function panelPlot(panel: FeaturePanelModel): SVGElement {
  const svg = svgEl("svg", {
    viewBox: `0 0 ${PLOT_W} ${PLOT_H}`,
    class: "panel-plot",
    role: "img",
    "aria-label": `${panel.name} distribution`,
  });

  const counts = panel.histogram.counts;
  const maxCount = counts.reduce((a, b) => Math.max(a, b), 0);
  const barW = PLOT_W / Math.max(1, counts.length);
  counts.forEach((count, i) => {
    const h = maxCount > 0 ? (count / maxCount) * (BAR_BASE - BAR_TOP) : 0;
    svg.appendChild(
      svgEl("rect", {
        x: i * barW,
        y: BAR_BASE - h,
        width: Math.max(0.5, barW - 0.5),
        height: h,
        class: "hist-bar",
      }),
    );
  });

  if (panel.bands !== null) {
    const warnX = xAt(panel.bands.warning, panel);
    const critX = xAt(panel.bands.critical, panel);
    svg.appendChild(
      svgEl("rect", {
        x: warnX,
        y: BAR_TOP,
        width: Math.max(0, critX - warnX),
        height: BAR_BASE - BAR_TOP,
        class: "band-warning",
      }),
    );
    svg.appendChild(
      svgEl("rect", {
        x: critX,
        y: BAR_TOP,
        width: Math.max(0, PLOT_W - critX),
        height: BAR_BASE - BAR_TOP,
        class: "band-critical",
      }),
    );
  }

  for (const edge of [0, PLOT_W]) {
    svg.appendChild(
      svgEl("line", { x1: edge, y1: BAR_BASE, x2: edge, y2: BAR_BASE + 3, class: "extent-tick" }),
    );
  }

  const markerX = xAt(panel.value, panel);
  const marker = svgEl("line", {
    x1: markerX,
    y1: 0,
    x2: markerX,
    y2: BAR_BASE + 2,
    class: `value-marker marker-${bandSeverity(panel.value, panel.bands)}`,
  });
  svg.appendChild(marker);
  return svg;
}

function featurePanel(panel: FeaturePanelModel): HTMLElement {
  const root = el("div", "feature-panel");
  root.dataset.feature = panel.name;

  const head = el("div", "panel-head");
  head.appendChild(el("span", "feature-name", panel.name));
  head.appendChild(el("span", "feature-unit", panel.unit));
  root.appendChild(head);

  root.appendChild(panelPlot(panel));

  const foot = el("div", "panel-foot");
  const severity = bandSeverity(panel.value, panel.bands);
  foot.appendChild(el("span", "extent-label", formatValue(panel.min)));
  foot.appendChild(
    el("span", `feature-value value-${severity}`, `${formatValue(panel.value)} ${panel.unit}`),
  );
  foot.appendChild(el("span", "extent-label", formatValue(panel.max)));
  root.appendChild(foot);

  if (!panel.actionable) {
    root.appendChild(el("div", "fixed-tag", "not modifiable"));
  }
  return root;
}

/** Replace `target` content with the risk summary for a loaded patient. */
export function renderRiskHeader(target: HTMLElement, view: PatientView): void {
  clear(target);
  target.appendChild(el("span", "risk-patient", `Patient ${view.patient_id}`));
  target.appendChild(el("span", "risk-value", formatPercent(view.risk_probability)));
  const atRisk = view.predicted_class === 1;
  target.appendChild(
    el("span", `risk-pill ${atRisk ? "risk-high" : "risk-low"}`, atRisk ? "AT RISK" : "not at risk"),
  );
}

/** Replace `target` content with one panel per feature. */
export function renderRecordView(target: HTMLElement, view: PatientView): void {
  clear(target);
  const grid = el("div", "panel-grid");
  for (const panel of view.features) {
    grid.appendChild(featurePanel(panel));
  }
  target.appendChild(grid);
}
