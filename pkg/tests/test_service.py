from __future__ import annotations

import threading

import pytest
from fastapi.testclient import TestClient

from riskscope.service import EventLog, build_app, summarize_events


def _session(client, patient=None):
    body = {} if patient is None else {"patient_id": patient}
    r = client.post("/sessions", json=body)
    assert r.status_code == 201
    return r.json()["session_id"]


def test_health(client):
    doc = client.get("/health").json()
    assert doc["status"] == "ok"
    assert set(doc["artifacts"]) == {"model", "kb", "dataset_records"}


def test_patient_view(client):
    doc = client.get("/patients/39").json()
    assert doc["predicted_class"] == 1
    assert len(doc["features"]) == 8
    row = next(f for f in doc["features"] if f["name"] == "Glucose")
    assert row["value"] == 124.0
    assert row["bands"] == {"warning": 140.0, "critical": 200.0}
    assert sum(row["histogram"]["counts"]) == 768
    age = next(f for f in doc["features"] if f["name"] == "Age")
    assert age["bands"] is None and not age["actionable"]


def test_unknown_patient_envelope(client):
    r = client.get("/patients/99999")
    assert r.status_code == 404
    assert set(r.json()) == {"code", "message", "detail"}
    assert r.json()["code"] == "not_found"


def test_prediction(client):
    doc = client.get("/patients/39/prediction").json()
    assert doc["predicted_class"] == 1
    assert 0.5 <= doc["probability"] <= 1.0


def test_importance_is_seed_stable(client):
    a = client.get("/patients/39/importance", params={"seed": 5}).json()
    b = client.get("/patients/39/importance", params={"seed": 5}).json()
    assert a == b
    assert a["selected"]
    assert len(a["features"]) == 8


def test_ranges_endpoint(client):
    doc = client.get("/patients/39/ranges").json()
    assert doc["predicted_class"] == 1
    names = [r["feature"] for r in doc["features"]]
    assert len(names) == 4


def test_recommendation_endpoint(client):
    doc = client.post("/patients/39/recommendation").json()
    assert doc["status"] == "ok"
    plan = doc["plan"]
    assert plan["flips_at_step"] == len(plan["steps"]) >= 1
    assert all(s["feasibility"] in ("easy", "moderate", "hard") for s in plan["steps"])


def test_evidence_endpoint(client):
    doc = client.get("/evidence/Glucose", params={"kind": "range"}).json()
    assert doc["kind"] == "range"
    assert doc["citations"]
    assert client.get("/evidence/Glucose", params={"kind": "x"}).status_code == 400
    assert client.get("/evidence/Unknown", params={"kind": "range"}).status_code == 404


def test_validation_envelope(client):
    sid = _session(client)
    r = client.post(f"/sessions/{sid}/chat", json={})
    assert r.status_code == 422
    assert r.json()["code"] == "invalid_request"


def test_grammar_chat_sets_patient_and_view(client):
    sid = _session(client)
    doc = client.post(f"/sessions/{sid}/chat", json={"query": "is patient 39 at risk"}).json()
    assert doc["route"] == "grammar"
    assert doc["provenance"] == "grammar"
    assert doc["view"] == "record"
    assert "78.2%" in doc["text"]
    # The session remembers the patient for follow-up questions.
    follow = client.post(f"/sessions/{sid}/chat", json={"query": "why is this patient high risk"}).json()
    assert follow["route"] == "grammar"
    assert follow["intent"] == "explain_importance"
    assert follow["payload"]["patient_id"] == 39


def test_fallback_chat_without_client(client):
    sid = _session(client)
    doc = client.post(f"/sessions/{sid}/chat", json={"query": "what should I cook tonight"}).json()
    assert doc["route"] == "fallback"
    assert doc["provenance"] == "unavailable"
    assert doc["cause"] == "not_configured"


def test_empty_query_chat(client):
    sid = _session(client)
    doc = client.post(f"/sessions/{sid}/chat", json={"query": "  "}).json()
    assert doc["reason"] == "empty_query"
    assert doc["provenance"] == "unavailable"


def test_fallback_receives_context(engine, tmp_path):
    class EchoClient:
        def __init__(self):
            self.payloads = []

        def complete(self, payload):
            self.payloads.append(payload)
            return {"text": "external says hi"}

    echo = EchoClient()
    app = build_app(engine=engine, chat_client=echo, log_dir=tmp_path / "logs")
    with TestClient(app) as client:
        sid = _session(client, patient=39)
        client.post(f"/sessions/{sid}/events", json={"type": "view", "view": "importance"})
        doc = client.post(f"/sessions/{sid}/chat", json={"query": "how does weather affect mood"}).json()
    assert doc["provenance"] == "external"
    assert doc["text"] == "external says hi"
    context = echo.payloads[0]["context"]
    values = {v["name"]: v["value"] for v in context["patient_values"]}
    assert values["Glucose"] == 124.0 and values["BMI"] == 37.0
    assert context["active_view"] == "importance"
    assert context["view_data"]["features"]
    assert context["evidence_excerpts"]


def test_view_event_validation(client):
    sid = _session(client, patient=39)
    assert client.post(f"/sessions/{sid}/events", json={"type": "view", "view": "ranges"}).status_code == 201
    assert client.post(f"/sessions/{sid}/events", json={"type": "view", "view": "bogus"}).status_code == 400
    assert client.post(f"/sessions/{sid}/events", json={"type": "note", "view": "ranges"}).status_code == 400


def test_unknown_session(client):
    assert client.post("/sessions/nope/chat", json={"query": "hi"}).status_code == 404
    assert client.get("/sessions/nope/log").status_code == 404


def test_session_log_orders_events(client):
    sid = _session(client, patient=39)
    client.post(f"/sessions/{sid}/chat", json={"query": "is patient 39 at risk"})
    client.post(f"/sessions/{sid}/events", json={"type": "view", "view": "ranges"})
    client.post(f"/sessions/{sid}/chat", json={"query": "compare glucose range"})
    doc = client.get(f"/sessions/{sid}/log").json()
    kinds = [e["type"] for e in doc["events"]]
    assert kinds == ["session_start", "chat", "view", "chat"]
    stamps = [e["ts"] for e in doc["events"]]
    assert stamps == sorted(stamps)


def test_create_session_rejects_unknown_patient(client):
    r = client.post("/sessions", json={"patient_id": 123456})
    assert r.status_code == 404


def test_concurrent_chats_single_writer(engine, tmp_path):
    app = build_app(engine=engine, chat_client=None, log_dir=tmp_path / "logs")
    with TestClient(app) as client:
        sid = _session(client, patient=39)
        errors = []

        def worker():
            try:
                r = client.post(f"/sessions/{sid}/chat", json={"query": "is patient 39 at risk"})
                assert r.status_code == 200
            except Exception as exc:
                errors.append(exc)

        threads = [threading.Thread(target=worker) for _ in range(12)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        doc = client.get(f"/sessions/{sid}/log").json()
    chat_events = [e for e in doc["events"] if e["type"] == "chat"]
    assert len(chat_events) == 12
    stamps = [e["ts"] for e in doc["events"]]
    assert stamps == sorted(stamps)


def test_event_log_survives_restart(tmp_path):
    log = EventLog(tmp_path / "logs")
    log.append("s1", "chat", {"query": "a"}, 100.0)
    log.append("s1", "view", {"view": "ranges"}, 101.0)
    log.append("s2", "chat", {"query": "b"}, 102.0)
    reopened = EventLog(tmp_path / "logs")
    events = reopened.export()
    assert len(events) == 3
    assert events[0]["session"] == "s1"
    summary = summarize_events(events)
    assert summary["n_sessions"] == 2
    assert summary["chat_per_session"] == 1.0
    assert summary["view_per_session"] == 0.5


def test_event_log_spans_days(tmp_path):
    log = EventLog(tmp_path / "logs")
    day = 86400.0
    log.append("s1", "chat", {}, 100.0)
    log.append("s1", "chat", {}, 100.0 + 3 * day)
    files = sorted(p.name for p in (tmp_path / "logs").glob("events-*.jsonl"))
    assert len(files) == 2
    assert len(log.export()) == 2
