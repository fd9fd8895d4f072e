/** Client-side view state. The transcript mirrors server turns plus
 * locally rendered evidence cards and transport errors. */

import type {
  EvidencePayload,
  ImportancePayload,
  PatientView,
  Provenance,
  RangesPayload,
  RecommendationPayload,
  ViewTag,
} from "./types.js";

export type ChatMessage =
  | { kind: "user"; text: string }
  | { kind: "reply"; text: string; provenance: Provenance; cause?: string }
  | { kind: "evidence"; payload: EvidencePayload }
  | { kind: "note"; text: string }
  | { kind: "error"; text: string; query: string };

export interface ViewState {
  sessionId: string | null;
  patientId: number | null;
  activeView: ViewTag;
  transcript: ChatMessage[];
  pendingChat: boolean;
  pendingLoad: boolean;
  record: PatientView | null;
  importance: ImportancePayload | null;
  ranges: RangesPayload | null;
  recommendation: RecommendationPayload | null;
  errorCard: string | null;
}

export function initialState(): ViewState {
  return {
    sessionId: null,
    patientId: null,
    activeView: "record",
    transcript: [],
    pendingChat: false,
    pendingLoad: false,
    record: null,
    importance: null,
    ranges: null,
    recommendation: null,
    errorCard: null,
  };
}

/** Drop per-patient data when a new record is loaded. */
export function resetForPatient(state: ViewState): void {
  state.activeView = "record";
  state.transcript = [];
  state.record = null;
  state.importance = null;
  state.ranges = null;
  state.recommendation = null;
  state.errorCard = null;
}
