/** Typed client for the riskscope HTTP API. All dashboard data comes
 * through this module; nothing is computed client-side. */

import type {
  ApiEnvelope,
  ChatResponse,
  EvidencePayload,
  ImportancePayload,
  PatientView,
  RangesPayload,
  RecommendationPayload,
  SessionInfo,
  ViewEventRecord,
  ViewTag,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Non-2xx response, carrying the service's error envelope. */
export class ApiRequestError extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: unknown;

  constructor(status: number, envelope: ApiEnvelope) {
    super(envelope.message);
    this.name = "ApiRequestError";
    this.status = status;
    this.code = envelope.code;
    this.detail = envelope.detail;
  }
}

export class RiskscopeApi {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/$/, "");
    // Bind so the stub or the browser fetch keeps its own receiver.
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "Content-Type": "application/json" } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchFn(`${this.base}${path}`, init);
    if (!resp.ok) {
      let envelope: ApiEnvelope = { code: "http_error", message: `HTTP ${resp.status}`, detail: null };
      try {
        envelope = (await resp.json()) as ApiEnvelope;
      } catch {
        // Non-JSON error body; keep the status-only envelope.
      }
      throw new ApiRequestError(resp.status, envelope);
    }
    return (await resp.json()) as T;
  }

  health(): Promise<{ status: string; version: string }> {
    return this.request("GET", "/health");
  }

  patient(id: number): Promise<PatientView> {
    return this.request("GET", `/patients/${id}`);
  }

  importance(id: number): Promise<ImportancePayload> {
    return this.request("GET", `/patients/${id}/importance`);
  }

  ranges(id: number): Promise<RangesPayload> {
    return this.request("GET", `/patients/${id}/ranges`);
  }

  recommendation(id: number): Promise<RecommendationPayload> {
    return this.request("POST", `/patients/${id}/recommendation`);
  }

  evidence(feature: string, kind: "importance" | "range"): Promise<EvidencePayload> {
    return this.request("GET", `/evidence/${encodeURIComponent(feature)}?kind=${kind}`);
  }

  createSession(patientId: number | null): Promise<SessionInfo> {
    return this.request("POST", "/sessions", { patient_id: patientId });
  }

  chat(sessionId: string, query: string): Promise<ChatResponse> {
    return this.request("POST", `/sessions/${sessionId}/chat`, { query });
  }

  postViewEvent(sessionId: string, view: ViewTag): Promise<ViewEventRecord> {
    return this.request("POST", `/sessions/${sessionId}/events`, { type: "view", view });
  }
}
