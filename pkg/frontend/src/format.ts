/** Presentation helpers. Every value shown originates in an API field;
 * these functions only format or position, never derive new quantities. */

import type { Severity, ThresholdBands } from "./types.js";

/** Probability as a percentage with one decimal, e.g. 0.782 -> "78.2%". */
export function formatPercent(p: number): string {
  return `${(100 * p).toFixed(1)}%`;
}

/** Shortest exact decimal for a measured value, e.g. 124 -> "124", 33.6 -> "33.6". */
export function formatValue(v: number): string {
  return String(v);
}

/** Signed attribution with three decimals, e.g. "+0.207". */
export function formatPhi(phi: number): string {
  const fixed = phi.toFixed(3);
  return phi >= 0 ? `+${fixed}` : fixed;
}

/** Range bound with one decimal, matching the engine's range templates. */
export function formatBound(v: number): string {
  return v.toFixed(1);
}

/** Overlap fraction as a whole percentage, e.g. 0.339 -> "34%". */
export function formatOverlap(overlap: number): string {
  return `${Math.round(100 * overlap)}%`;
}

/** Signed step delta without trailing zeros, e.g. -2 -> "-2". */
export function formatDelta(delta: number): string {
  return delta > 0 ? `+${delta}` : String(delta);
}

/**
 * Horizontal position of a value on a [min, max] scale as a 0..100
 * percentage. Clamped so out-of-range values pin to the panel edge.
 */
export function positionPercent(value: number, min: number, max: number): number {
  if (max <= min) {
    return 0;
  }
  const t = (value - min) / (max - min);
  return 100 * Math.min(1, Math.max(0, t));
}

/** Color class for a value against its warning/critical thresholds. */
export function bandSeverity(value: number, bands: ThresholdBands | null): Severity {
  if (bands === null) {
    return "normal";
  }
  if (value >= bands.critical) {
    return "critical";
  }
  return value >= bands.warning ? "warning" : "normal";
}
