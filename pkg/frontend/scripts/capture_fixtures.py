"""Capture HTTP fixtures for the frontend test suite.

Runs the service in-process and records real responses as JSON files
under test/fixtures/. The chat client is a stub that answers every
fallback request, so the out-of-scope fixture carries provenance
"external" exactly as a configured deployment would produce it.

Usage: python3 scripts/capture_fixtures.py
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from riskscope.engine import Engine
from riskscope.service import build_app

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "test" / "fixtures"

OUT_OF_SCOPE_QUERY = "What should I cook for dinner tonight?"
STUB_REPLY = (
    "General nutrition is outside this dashboard's scope, but a balanced "
    "dinner works well alongside the plan shown for this patient."
)


class StubChatClient:
    """Answers every fallback request with a fixed reply."""

    def complete(self, payload: dict) -> dict:
        return {"text": STUB_REPLY}


def save(name: str, doc) -> None:
    path = FIXTURE_DIR / f"{name}.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path.relative_to(FIXTURE_DIR.parent.parent)}")


def first_healthy_patient(engine: Engine) -> int:
    for rec in engine.dataset.records:
        if engine.model.predict(engine.record_values(rec.id)) == 0:
            return rec.id
    raise SystemExit("no healthy record found")


def main() -> int:
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    engine = Engine()
    with tempfile.TemporaryDirectory() as logs:
        app = build_app(engine=engine, chat_client=StubChatClient(), log_dir=logs)
        client = TestClient(app)

        save("patient_39", client.get("/patients/39").json())
        save("importance_39", client.get("/patients/39/importance").json())
        save("ranges_39", client.get("/patients/39/ranges").json())
        save("patient_404", client.get("/patients/9999").json())

        save("evidence_glucose_range", client.get("/evidence/Glucose", params={"kind": "range"}).json())
        save("evidence_bmi_range", client.get("/evidence/BMI", params={"kind": "range"}).json())
        save(
            "evidence_skinthickness_importance",
            client.get("/evidence/SkinThickness", params={"kind": "importance"}).json(),
        )
        save(
            "evidence_skinthickness_range_404",
            client.get("/evidence/SkinThickness", params={"kind": "range"}).json(),
        )

        session = client.post("/sessions", json={"patient_id": 39}).json()
        save("session_39", session)
        sid = session["session_id"]

        save(
            "view_event_importance",
            client.post(f"/sessions/{sid}/events", json={"type": "view", "view": "importance"}).json(),
        )

        save(
            "chat_recommendation_39",
            client.post(f"/sessions/{sid}/chat", json={"query": "give me recommendations for patient 39"}).json(),
        )
        save(
            "chat_out_of_scope",
            client.post(f"/sessions/{sid}/chat", json={"query": OUT_OF_SCOPE_QUERY}).json(),
        )

        healthy = first_healthy_patient(engine)
        hs = client.post("/sessions", json={"patient_id": healthy}).json()
        save(
            "chat_recommendation_healthy",
            client.post(
                f"/sessions/{hs['session_id']}/chat",
                json={"query": f"give me recommendations for patient {healthy}"},
            ).json(),
        )

        plain = build_app(engine=engine, chat_client=None, log_dir=logs)
        with TestClient(plain) as unconfigured:
            us = unconfigured.post("/sessions", json={"patient_id": 39}).json()
            save(
                "chat_unavailable",
                unconfigured.post(
                    f"/sessions/{us['session_id']}/chat", json={"query": OUT_OF_SCOPE_QUERY}
                ).json(),
            )
    return 0


if __name__ == "__main__":
    sys.exit(main())
