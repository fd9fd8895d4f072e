/** Scripted walk through the dashboard against captured service
 * responses: load a patient, open every view, pull evidence from a help
 * button, request a plan, then ask something out of scope. */

import { beforeEach, describe, expect, it } from "vitest";

import { createApp, type AppHandle } from "../src/app.js";
import { RiskscopeApi } from "../src/api.js";
import type {
  ChatResponse,
  EvidencePayload,
  ImportancePayload,
  PatientView,
  RangesPayload,
  SessionInfo,
  ViewEventRecord,
} from "../src/types.js";
import { FetchStub, flush } from "./mockFetch.js";
import { fixture } from "./serverFixtures.js";

const BASE = "http://service.test";

const patient39 = fixture<PatientView>("patient_39");
const importance39 = fixture<ImportancePayload>("importance_39");
const ranges39 = fixture<RangesPayload>("ranges_39");
const session39 = fixture<SessionInfo>("session_39");
const viewEvent = fixture<ViewEventRecord>("view_event_importance");
const chatPlan = fixture<ChatResponse>("chat_recommendation_39");
const chatOutOfScope = fixture<ChatResponse>("chat_out_of_scope");
const chatUnavailable = fixture<ChatResponse>("chat_unavailable");
const evidenceGlucoseRange = fixture<EvidencePayload>("evidence_glucose_range");
const patient404 = fixture<{ code: string; message: string }>("patient_404");

const SID = session39.session_id;

function routedStub(): FetchStub {
  const stub = new FetchStub();
  stub.on("GET", "/patients/39", { status: 200, body: patient39 });
  stub.on("GET", "/patients/39/importance", { status: 200, body: importance39 });
  stub.on("GET", "/patients/39/ranges", { status: 200, body: ranges39 });
  stub.on("POST", "/sessions", { status: 201, body: session39 });
  stub.on("POST", `/sessions/${SID}/events`, { status: 201, body: viewEvent });
  stub.on("GET", "/evidence/Glucose?kind=range", { status: 200, body: evidenceGlucoseRange });
  stub.on("POST", `/sessions/${SID}/chat`, (body) => {
    const query = (body as { query: string }).query;
    return query.includes("recommendation")
      ? { status: 200, body: chatPlan }
      : { status: 200, body: chatOutOfScope };
  });
  return stub;
}

let stub: FetchStub;
let app: AppHandle;
let root: HTMLElement;

function mount(theStub: FetchStub): void {
  root = document.createElement("div");
  document.body.appendChild(root);
  app = createApp(root, new RiskscopeApi(BASE, theStub.fetch));
}

function query<T extends Element>(selector: string): T {
  const node = root.querySelector<T>(selector);
  if (node === null) {
    throw new Error(`missing ${selector}`);
  }
  return node;
}

function queryAll<T extends Element>(selector: string): T[] {
  return Array.from(root.querySelectorAll<T>(selector));
}

function submitForm(id: string): void {
  query<HTMLFormElement>(`#${id}`).dispatchEvent(
    new Event("submit", { bubbles: true, cancelable: true }),
  );
}

async function loadPatient(id: string): Promise<void> {
  query<HTMLInputElement>("#patient-input").value = id;
  submitForm("load-form");
  await flush();
}

async function selectView(tag: string): Promise<void> {
  const select = query<HTMLSelectElement>("#view-select");
  select.value = tag;
  select.dispatchEvent(new Event("change", { bubbles: true }));
  await flush();
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("scripted dashboard walk", () => {
  it("covers record, importance, ranges, recommendation, evidence, and fallback", async () => {
    stub = routedStub();
    mount(stub);

    // Enter patient 39: risk header plus one panel per feature.
    await loadPatient("39");
    expect(stub.sent("POST", "/sessions")[0]?.body).toEqual({ patient_id: 39 });
    const header = query<HTMLElement>("#risk-header");
    expect(header.textContent).toContain("Patient 39");
    expect(header.textContent).toContain("78.2%");
    expect(header.textContent).toContain("AT RISK");
    expect(queryAll(".feature-panel")).toHaveLength(8);

    const glucose = query<HTMLElement>('.feature-panel[data-feature="Glucose"]');
    expect(glucose.querySelectorAll(".hist-bar")).toHaveLength(16);
    expect(glucose.querySelector(".band-warning")).not.toBeNull();
    expect(glucose.querySelector(".band-critical")).not.toBeNull();
    expect(glucose.querySelector(".value-marker")).not.toBeNull();
    expect(glucose.querySelector(".feature-value")?.textContent).toBe("124 mg/dL");

    const pregnancies = query<HTMLElement>('.feature-panel[data-feature="Pregnancies"]');
    expect(pregnancies.querySelector(".band-warning")).toBeNull();
    expect(pregnancies.querySelector(".fixed-tag")?.textContent).toBe("not modifiable");

    // Importance view: served rank order, one help button per row.
    await selectView("importance");
    const rows = queryAll<HTMLElement>(".importance-row");
    expect(rows).toHaveLength(8);
    expect(rows[0]?.dataset.feature).toBe("SkinThickness");
    expect(rows[0]?.querySelector(".row-number")?.textContent).toBe("+0.207");
    expect(rows[0]?.querySelector<HTMLElement>(".bar")?.style.width).toBe("100%");
    expect(queryAll(".importance-row .help-btn")).toHaveLength(8);
    expect(query<HTMLElement>(".view-caption").textContent).toContain("kernel_shap");

    // Ranges view: paired intervals, overlap shading only where they meet.
    await selectView("ranges");
    const rangeRows = queryAll<HTMLElement>(".range-row");
    expect(rangeRows).toHaveLength(4);
    const glucoseRow = query<HTMLElement>('.range-row[data-feature="Glucose"]');
    expect(glucoseRow.querySelector(".interval-ai")).not.toBeNull();
    expect(glucoseRow.querySelector(".interval-sci")).not.toBeNull();
    expect(glucoseRow.querySelector(".interval-overlap")).not.toBeNull();
    expect(glucoseRow.querySelector(".range-note")?.textContent).toBe(
      "AI 127.0–164.8 vs diagnostic 140.0–200.0 (overlap 34%)",
    );
    const bmiRow = query<HTMLElement>('.range-row[data-feature="BMI"]');
    expect(bmiRow.querySelector(".interval-overlap")).toBeNull();
    const skinRow = query<HTMLElement>('.range-row[data-feature="SkinThickness"]');
    expect(skinRow.querySelector(".range-note")?.textContent).toContain("no curated reference range");

    // Range help button: evidence lands in the chat area, citations hoverable.
    glucoseRow.querySelector<HTMLButtonElement>(".help-btn")?.click();
    await flush();
    const evidenceCard = query<HTMLElement>("#chat-log .msg-evidence");
    expect(evidenceCard.textContent).toContain("two-hour post-load plasma glucose");
    const markers = evidenceCard.querySelectorAll<HTMLElement>(".evidence-summary .citation");
    expect(markers.length).toBeGreaterThanOrEqual(2);
    expect(markers[0]?.title).toBe(
      "[1] American Diabetes Association, Standards of Care in Diabetes: " +
        "Classification and Diagnosis (guideline, 2024) Diabetes Care 47(Suppl. 1):S20-S42",
    );
    expect(evidenceCard.querySelectorAll(".citation-list li")).toHaveLength(2);

    // Recommendation view: plan arrives through chat, timeline renders.
    await selectView("recommendation");
    expect(query<HTMLElement>("#view-root").textContent).toContain("No plan requested yet");
    query<HTMLButtonElement>("#get-recommendation").click();
    await flush();
    const chatCalls = stub.sent("POST", `/sessions/${SID}/chat`);
    expect(chatCalls[0]?.body).toEqual({ query: "give me recommendations for patient 39" });
    const steps = queryAll<HTMLElement>(".timeline .step");
    expect(steps).toHaveLength(1);
    expect(steps[0]?.querySelector(".badge")?.className).toContain("badge-moderate");
    expect(steps[0]?.querySelector(".step-text")?.textContent).toBe("Step 1: SkinThickness -2 to 44");
    expect(steps[0]?.querySelector(".step-risk")?.textContent).toBe("risk after: 48.4%");
    expect(query<HTMLElement>(".horizon-note").textContent).toContain("step 1 of 1");
    const planBubble = queryAll<HTMLElement>("#chat-log .msg-engine").at(-1);
    expect(planBubble?.textContent).toContain("Recommended plan for patient 39");
    expect(app.state.activeView).toBe("recommendation");

    // Out-of-scope question: optimistic bubble, single in-flight send,
    // then the external-style reply.
    const input = query<HTMLInputElement>("#chat-input");
    input.value = "What should I cook for dinner tonight?";
    submitForm("chat-form");
    const userBubbles = queryAll<HTMLElement>("#chat-log .msg-user");
    expect(userBubbles.at(-1)?.textContent).toBe("What should I cook for dinner tonight?");
    expect(query<HTMLButtonElement>("#chat-send").disabled).toBe(true);
    await flush();
    const external = query<HTMLElement>("#chat-log .msg-external");
    expect(external.textContent).toContain("outside this dashboard's scope");
    expect(external.querySelector(".msg-tag")?.textContent).toBe("external");
    expect(query<HTMLButtonElement>("#chat-send").disabled).toBe(false);
    expect(app.state.activeView).toBe("recommendation");

    // Back to the record view; every dropdown change reported one event.
    await selectView("record");
    expect(queryAll(".feature-panel")).toHaveLength(8);
    const viewEvents = stub.sent("POST", `/sessions/${SID}/events`).map((c) => c.body);
    expect(viewEvents).toEqual([
      { type: "view", view: "importance" },
      { type: "view", view: "ranges" },
      { type: "view", view: "recommendation" },
      { type: "view", view: "record" },
    ]);
  });

  it("shows an inline error card for an unknown patient and keeps the input", async () => {
    stub = new FetchStub();
    stub.on("GET", "/patients/9999", { status: 404, body: patient404 });
    mount(stub);

    await loadPatient("9999");
    const card = query<HTMLElement>("#error-card");
    expect(card.classList.contains("hidden")).toBe(false);
    expect(card.textContent).toBe("unknown patient 9999");
    expect(query<HTMLInputElement>("#patient-input").value).toBe("9999");
    expect(stub.sent("POST", "/sessions")).toHaveLength(0);
  });

  it("styles an unavailable fallback reply distinctly", async () => {
    stub = routedStub();
    stub.on("POST", `/sessions/${SID}/chat`, { status: 200, body: chatUnavailable });
    mount(stub);

    await loadPatient("39");
    const input = query<HTMLInputElement>("#chat-input");
    input.value = "What should I cook for dinner tonight?";
    submitForm("chat-form");
    await flush();

    const bubble = query<HTMLElement>("#chat-log .msg-unavailable");
    expect(bubble.textContent).toContain("external assistant is unavailable");
    expect(bubble.querySelector(".msg-tag")?.textContent).toBe("unavailable");
    expect(root.querySelector(".msg-external")).toBeNull();
  });

  it("offers a retry after a transport failure and recovers on retry", async () => {
    stub = routedStub();
    stub.off("POST", `/sessions/${SID}/chat`);
    mount(stub);

    await loadPatient("39");
    const input = query<HTMLInputElement>("#chat-input");
    input.value = "What should I cook for dinner tonight?";
    submitForm("chat-form");
    await flush();

    const errorBubble = query<HTMLElement>("#chat-log .msg-error");
    expect(errorBubble.textContent).toContain("failed to send");
    const retry = errorBubble.querySelector<HTMLButtonElement>(".retry-btn");
    expect(retry).not.toBeNull();

    stub.on("POST", `/sessions/${SID}/chat`, { status: 200, body: chatOutOfScope });
    retry?.click();
    await flush();
    expect(root.querySelector("#chat-log .msg-external")).not.toBeNull();
  });
});
