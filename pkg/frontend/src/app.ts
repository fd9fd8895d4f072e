/** Dashboard wiring: one session per loaded patient, a single active
 * view synced to the server through view events, and a chat panel that
 * relays every question to the service. The client renders served data
 * and computes nothing itself. */

import { renderImportanceView, renderRangesView, renderRecommendationView } from "./analysis.js";
import { ApiRequestError, RiskscopeApi } from "./api.js";
import { renderTranscript } from "./chat.js";
import { clear, el } from "./dom.js";
import { renderRecordView, renderRiskHeader } from "./record.js";
import { initialState, resetForPatient, type ViewState } from "./state.js";
import type {
  ImportancePayload,
  RangesPayload,
  RecommendationPayload,
  ViewTag,
} from "./types.js";

const VIEW_OPTIONS: { tag: ViewTag; label: string }[] = [
  { tag: "record", label: "Record" },
  { tag: "importance", label: "Important factors" },
  { tag: "ranges", label: "Value ranges" },
  { tag: "recommendation", label: "Recommendation" },
];

export interface AppHandle {
  state: ViewState;
  loadPatient(id: number): Promise<void>;
  setView(tag: ViewTag): Promise<void>;
  sendChat(query: string): Promise<void>;
  requestEvidence(feature: string, kind: "importance" | "range"): Promise<void>;
  requestRecommendation(): Promise<void>;
}

export function createApp(root: HTMLElement, api: RiskscopeApi): AppHandle {
  const state = initialState();

  // ------------------------------------------------------------- skeleton

  clear(root);
  root.className = "app";

  const topbar = el("header", "topbar");
  topbar.appendChild(el("h1", "brand", "riskscope"));

  const loadForm = el("form", "load-form");
  loadForm.id = "load-form";
  const patientInput = el("input");
  patientInput.id = "patient-input";
  patientInput.type = "number";
  patientInput.placeholder = "patient id";
  patientInput.setAttribute("aria-label", "patient id");
  const loadBtn = el("button", "primary-btn", "Load");
  loadBtn.id = "load-btn";
  loadBtn.type = "submit";
  loadForm.appendChild(patientInput);
  loadForm.appendChild(loadBtn);
  topbar.appendChild(loadForm);

  const riskHeader = el("div", "risk-header");
  riskHeader.id = "risk-header";
  topbar.appendChild(riskHeader);
  root.appendChild(topbar);

  const errorCard = el("div", "error-card hidden");
  errorCard.id = "error-card";
  root.appendChild(errorCard);

  const layout = el("main", "layout");

  const viewArea = el("section", "view-area");
  const viewLabel = el("label", "view-label", "View ");
  const viewSelect = el("select");
  viewSelect.id = "view-select";
  for (const opt of VIEW_OPTIONS) {
    const option = el("option", undefined, opt.label);
    option.value = opt.tag;
    viewSelect.appendChild(option);
  }
  viewLabel.appendChild(viewSelect);
  viewArea.appendChild(viewLabel);
  const viewRoot = el("div", "view-root");
  viewRoot.id = "view-root";
  viewArea.appendChild(viewRoot);
  layout.appendChild(viewArea);

  const chatArea = el("aside", "chat-area");
  const chatLog = el("div", "chat-log");
  chatLog.id = "chat-log";
  chatArea.appendChild(chatLog);
  const chatForm = el("form", "chat-form");
  chatForm.id = "chat-form";
  const chatInput = el("input");
  chatInput.id = "chat-input";
  chatInput.type = "text";
  chatInput.placeholder = "Ask about this patient, the data, or the evidence";
  chatInput.setAttribute("aria-label", "chat message");
  const chatSend = el("button", "primary-btn", "Send");
  chatSend.id = "chat-send";
  chatSend.type = "submit";
  chatForm.appendChild(chatInput);
  chatForm.appendChild(chatSend);
  chatArea.appendChild(chatForm);
  layout.appendChild(chatArea);
  root.appendChild(layout);

  // ------------------------------------------------------------ rendering

  function renderViewRoot(): void {
    switch (state.activeView) {
      case "record":
        if (state.record !== null) {
          renderRecordView(viewRoot, state.record);
        } else {
          clear(viewRoot);
          viewRoot.appendChild(el("p", "placeholder", "Load a patient to see the record view."));
        }
        return;
      case "importance":
        if (state.importance !== null) {
          renderImportanceView(viewRoot, state.importance, onHelp);
        } else {
          clear(viewRoot);
          viewRoot.appendChild(el("p", "placeholder", "Fetching importance for this patient…"));
        }
        return;
      case "ranges":
        if (state.ranges !== null) {
          renderRangesView(viewRoot, state.ranges, onHelp);
        } else {
          clear(viewRoot);
          viewRoot.appendChild(el("p", "placeholder", "Fetching value ranges for this patient…"));
        }
        return;
      case "recommendation":
        renderRecommendationView(viewRoot, state.recommendation, onRequestRecommendation, state.pendingChat);
        return;
    }
  }

  function render(): void {
    if (state.record !== null) {
      renderRiskHeader(riskHeader, state.record);
    } else {
      clear(riskHeader);
      riskHeader.appendChild(el("span", "risk-muted", "no patient loaded"));
    }

    if (state.errorCard !== null) {
      errorCard.textContent = state.errorCard;
      errorCard.classList.remove("hidden");
    } else {
      errorCard.textContent = "";
      errorCard.classList.add("hidden");
    }

    viewSelect.value = state.activeView;
    viewSelect.disabled = state.sessionId === null;
    chatSend.disabled = state.pendingChat || state.sessionId === null;
    loadBtn.disabled = state.pendingLoad;

    renderViewRoot();
    renderTranscript(chatLog, state.transcript, onRetry);
  }

  // -------------------------------------------------------------- actions

  function describeFailure(err: unknown): string {
    if (err instanceof ApiRequestError) {
      return err.message;
    }
    return err instanceof Error ? err.message : String(err);
  }

  async function loadPatient(id: number): Promise<void> {
    if (state.pendingLoad) {
      return;
    }
    state.pendingLoad = true;
    state.errorCard = null;
    render();
    try {
      const view = await api.patient(id);
      const session = await api.createSession(id);
      resetForPatient(state);
      state.patientId = id;
      state.sessionId = session.session_id;
      state.record = view;
    } catch (err) {
      // The input keeps its value so the id can be corrected in place.
      state.errorCard = describeFailure(err);
    } finally {
      state.pendingLoad = false;
      render();
    }
  }

  async function fetchViewData(tag: ViewTag): Promise<void> {
    if (state.patientId === null) {
      return;
    }
    if (tag === "importance" && state.importance === null) {
      state.importance = await api.importance(state.patientId);
    } else if (tag === "ranges" && state.ranges === null) {
      state.ranges = await api.ranges(state.patientId);
    } else if (tag === "record" && state.record === null) {
      state.record = await api.patient(state.patientId);
    }
  }

  async function setView(tag: ViewTag): Promise<void> {
    if (state.sessionId === null) {
      return;
    }
    state.activeView = tag;
    state.errorCard = null;
    render();
    try {
      // Server first: the session's context pack must carry this view tag.
      await api.postViewEvent(state.sessionId, tag);
      await fetchViewData(tag);
    } catch (err) {
      state.errorCard = describeFailure(err);
    }
    render();
  }

  async function sendChat(query: string): Promise<void> {
    if (state.pendingChat || state.sessionId === null || !query.trim()) {
      return;
    }
    state.pendingChat = true;
    state.transcript.push({ kind: "user", text: query });
    render();
    try {
      const resp = await api.chat(state.sessionId, query);
      state.transcript.push({
        kind: "reply",
        text: resp.text,
        provenance: resp.provenance,
        cause: resp.cause,
      });
      const pid = resp.command?.args?.patient_id;
      if (typeof pid === "number" && pid !== state.patientId) {
        // The session now tracks another patient; served caches are stale.
        state.patientId = pid;
        state.record = null;
        state.importance = null;
        state.ranges = null;
        state.recommendation = null;
      }
      if (resp.view !== null) {
        state.activeView = resp.view;
        if (resp.view === "importance") {
          state.importance = resp.payload as ImportancePayload;
        } else if (resp.view === "ranges") {
          state.ranges = resp.payload as RangesPayload;
        } else if (resp.view === "recommendation") {
          state.recommendation = resp.payload as RecommendationPayload;
        }
        await fetchViewData(resp.view === "record" ? "record" : state.activeView);
      }
    } catch (err) {
      if (err instanceof ApiRequestError) {
        state.transcript.push({ kind: "note", text: describeFailure(err) });
      } else {
        state.transcript.push({
          kind: "error",
          text: `Message failed to send: ${describeFailure(err)}`,
          query,
        });
      }
    } finally {
      state.pendingChat = false;
      render();
    }
  }

  async function requestEvidence(feature: string, kind: "importance" | "range"): Promise<void> {
    try {
      const payload = await api.evidence(feature, kind);
      state.transcript.push({ kind: "evidence", payload });
    } catch (err) {
      state.transcript.push({ kind: "note", text: describeFailure(err) });
    }
    render();
  }

  async function requestRecommendation(): Promise<void> {
    if (state.patientId === null) {
      return;
    }
    await sendChat(`give me recommendations for patient ${state.patientId}`);
  }

  const onHelp = (feature: string, kind: "importance" | "range"): void => {
    void requestEvidence(feature, kind);
  };
  const onRequestRecommendation = (): void => {
    void requestRecommendation();
  };
  const onRetry = (query: string): void => {
    void sendChat(query);
  };

  // --------------------------------------------------------------- events

  loadForm.addEventListener("submit", (event) => {
    event.preventDefault();
    const id = Number.parseInt(patientInput.value, 10);
    if (Number.isFinite(id)) {
      void loadPatient(id);
    }
  });

  viewSelect.addEventListener("change", () => {
    void setView(viewSelect.value as ViewTag);
  });

  chatForm.addEventListener("submit", (event) => {
    event.preventDefault();
    const query = chatInput.value;
    if (query.trim() && !state.pendingChat) {
      chatInput.value = "";
      void sendChat(query);
    }
  });

  render();
  return { state, loadPatient, setView, sendChat, requestEvidence, requestRecommendation };
}
