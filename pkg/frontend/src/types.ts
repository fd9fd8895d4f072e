/** Payload shapes served by the riskscope HTTP API. */

export type ViewTag = "record" | "importance" | "ranges" | "recommendation";

export type Provenance = "grammar" | "external" | "unavailable";

export type Severity = "normal" | "warning" | "critical";

/** Error envelope returned by every non-2xx response. */
export interface ApiEnvelope {
  code: string;
  message: string;
  detail: unknown;
}

export interface FeatureHistogram {
  edges: number[];
  counts: number[];
}

export interface ThresholdBands {
  warning: number;
  critical: number;
}

/** One feature panel: value, cohort extent, distribution, threshold bands. */
export interface FeaturePanelModel {
  name: string;
  unit: string;
  value: number;
  min: number;
  max: number;
  histogram: FeatureHistogram;
  bands: ThresholdBands | null;
  actionable: boolean;
}

export interface PatientView {
  patient_id: number;
  risk_probability: number;
  predicted_class: number;
  features: FeaturePanelModel[];
}

export interface ImportanceRow {
  feature: string;
  phi: number;
}

export interface ImportancePayload {
  patient_id: number;
  selected: string;
  features: ImportanceRow[];
  report: unknown;
}

/** AI-observed interval with the matching curated interval when one exists. */
export interface RangeRow {
  feature: string;
  unit: string;
  ai_low: number;
  ai_high: number;
  sci_low?: number;
  sci_high?: number;
  sci_kind?: string;
  overlap?: number;
}

export interface RangesPayload {
  patient_id: number;
  predicted_class: number;
  n_class_samples: number;
  low_confidence: boolean;
  features: RangeRow[];
}

export type Feasibility = "easy" | "moderate" | "hard";

export interface PlanStep {
  feature: string;
  delta: number;
  cumulative_value: number;
  feasibility: Feasibility;
  predicted_probability_after: number;
}

export interface RecommendationPlan {
  patient: number | null;
  steps: PlanStep[];
  flips_at_step: number;
  horizon_note: string;
}

export interface RecommendationPayload {
  patient_id: number;
  status: "ok" | "no_change_needed" | "no_feasible_plan";
  plan?: RecommendationPlan;
  candidates?: { feature: string; new_value: number }[][];
}

export interface Citation {
  marker: string;
  title: string;
  source_type: string;
  year: number;
  locator: string;
}

export interface EvidencePayload {
  feature: string;
  kind: string;
  summary: string;
  citations: Citation[];
  range?: {
    normal: [number, number];
    diagnostic: [number, number];
    units: string;
  };
}

export interface SessionInfo {
  session_id: string;
  patient_id: number | null;
}

export interface ChatResponse {
  session_id: string;
  route: "grammar" | "fallback";
  intent: string | null;
  similarity: number;
  reason: string | null;
  command: { action: string; args: Record<string, unknown> } | null;
  text: string;
  payload: unknown;
  provenance: Provenance;
  view: ViewTag | null;
  cause?: string;
}

export interface ViewEventRecord {
  ts: number;
  session: string;
  type: string;
  view: string;
}
