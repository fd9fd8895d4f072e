from __future__ import annotations

import json
import re

import pytest

from riskscope.engine import asset_path
from riskscope.evidence import (
    KINDS,
    SOURCE_TYPES,
    EvidenceNotFound,
    KBError,
    get_evidence,
    load_kb,
    parse_entries,
)


def _valid_entry(**overrides):
    entry = {
        "feature": "Glucose",
        "kind": "importance",
        "summary": "Raised glucose is the strongest factor [1].",
        "citations": [
            {
                "marker": "[1]",
                "title": "Some cohort study",
                "source_type": "journal",
                "year": 2001,
                "locator": "doi:10.1000/x",
            }
        ],
    }
    entry.update(overrides)
    return entry


def test_bundled_kb_loads(kb):
    assert len(kb) == 12
    assert kb.recompute_checksum() == kb.checksum
    features = {e.feature for e in kb.entries}
    assert features == {
        "Pregnancies",
        "Glucose",
        "BloodPressure",
        "SkinThickness",
        "Insulin",
        "BMI",
        "DiabetesPedigreeFunction",
        "Age",
    }


def test_every_summary_marker_resolves(kb):
    for entry in kb.entries:
        markers = {c.marker for c in entry.citations}
        for used in re.findall(r"\[\d+\]", entry.summary):
            assert used in markers, f"{entry.feature}/{entry.kind}: {used} unresolved"


def test_lookup(kb):
    entry = get_evidence(kb, "Glucose", "range")
    assert entry.kind == "range"
    assert entry.range_info.normal == (70.0, 140.0)
    assert entry.range_info.diagnostic == (140.0, 200.0)
    with pytest.raises(EvidenceNotFound):
        get_evidence(kb, "Glucose", "nope")
    with pytest.raises(EvidenceNotFound):
        get_evidence(kb, "Nothing", "range")


def test_reads_never_mutate(kb):
    before = kb.checksum
    for i in range(200):
        entry = kb.entries[i % len(kb)]
        get_evidence(kb, entry.feature, entry.kind)
    assert kb.recompute_checksum() == before


def test_tampered_checksum_rejected(tmp_path, kb):
    doc = json.loads(asset_path("kb.json").read_text())
    doc["entries"][0]["summary"] = "tampered " + doc["entries"][0]["summary"]
    p = tmp_path / "kb.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(KBError, match="checksum"):
        load_kb(p)


def test_parse_rejects_duplicate_keys():
    with pytest.raises(KBError, match="duplicate"):
        parse_entries([_valid_entry(), _valid_entry()])


def test_parse_rejects_unresolved_marker():
    bad = _valid_entry(summary="See [2] for details.")
    with pytest.raises(KBError, match=r"\[2\]"):
        parse_entries([bad])


def test_parse_rejects_unknown_source_type():
    bad = _valid_entry()
    bad["citations"][0]["source_type"] = "blog"
    with pytest.raises(KBError, match="source_type"):
        parse_entries([bad])


def test_parse_rejects_inverted_interval():
    bad = _valid_entry(
        kind="range",
        range={"normal": [5.0, 1.0], "diagnostic": [1.0, 2.0], "units": "u"},
    )
    with pytest.raises(KBError):
        parse_entries([bad])


def test_parse_rejects_range_payload_on_importance_entry():
    bad = _valid_entry(range={"normal": [0.0, 1.0], "diagnostic": [1.0, 2.0], "units": "u"})
    with pytest.raises(KBError, match="only valid"):
        parse_entries([bad])


def test_vocabulary_constants():
    assert KINDS == ("importance", "range")
    assert set(SOURCE_TYPES) == {"journal", "guideline", "systematic-review", "epidemiological"}


def test_entry_serialization_round_trip(kb):
    entry = get_evidence(kb, "BMI", "range")
    doc = entry.to_dict()
    assert doc["feature"] == "BMI"
    assert doc["citations"][0]["marker"].startswith("[")
    assert doc["range"]["units"] == entry.range_info.units
    assert doc["range"]["normal"] == [18.5, 25.0]
