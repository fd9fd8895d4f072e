from __future__ import annotations

import json

import pytest

from riskscope.cli import main
from riskscope.engine import asset_path


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_train_writes_deterministic_model(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    code, out, _ = _run(capsys, "train", "--out", str(a))
    assert code == 0
    doc = json.loads(out)
    assert doc["n_train"] == 461 and doc["n_test"] == 307
    assert 0.68 <= doc["test_accuracy"] <= 0.78
    code, _, _ = _run(capsys, "train", "--out", str(b))
    assert code == 0
    assert a.read_bytes() == b.read_bytes()


def test_explain_ranks_features(capsys):
    code, out, _ = _run(
        capsys, "explain", "--model", str(asset_path("model.json")), "--patient", "39", "--seed", "17"
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["patient"] == 39
    assert doc["selected"] in {c["method_id"] for c in doc["candidates"]}
    assert len(doc["ranked"]) == 8
    top = [r["feature"] for r in doc["ranked"][:4]]
    assert "Glucose" in top or "BMI" in top


def test_ranges_switches_reference_band(capsys):
    code, out, _ = _run(capsys, "ranges", "--model", str(asset_path("model.json")), "--class", "1")
    assert code == 0
    at_risk = json.loads(out)
    glucose = next(r for r in at_risk["features"] if r["feature"] == "Glucose")
    assert glucose["sci_kind"] == "diagnostic"
    code, out, _ = _run(capsys, "ranges", "--model", str(asset_path("model.json")), "--class", "0")
    healthy = json.loads(out)
    glucose0 = next(r for r in healthy["features"] if r["feature"] == "Glucose")
    assert glucose0["sci_kind"] == "normal"
    assert at_risk["n_class_samples"] + healthy["n_class_samples"] == 768


def test_recommend_outputs_plan(capsys):
    code, out, _ = _run(capsys, "recommend", "--model", str(asset_path("model.json")), "--patient", "39")
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "ok"
    assert doc["plan"]["flips_at_step"] >= 1


def test_calibrate_matches_bundled_threshold(capsys):
    code, out, _ = _run(
        capsys,
        "calibrate",
        "--corpus",
        str(asset_path("corpus.json")),
        "--labeled",
        str(asset_path("calibration_set.json")),
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["threshold"] == 0.6
    assert doc["accuracy"] == 1.0


def test_kb_lint_accepts_bundled(capsys):
    code, out, _ = _run(capsys, "kb-lint", str(asset_path("kb.json")))
    assert code == 0
    assert "OK: 12 entries" in out


def test_kb_lint_rejects_tampered(tmp_path, capsys):
    doc = json.loads(asset_path("kb.json").read_text())
    doc["entries"][0]["summary"] += " extra"
    bad = tmp_path / "kb.json"
    bad.write_text(json.dumps(doc))
    code, _, err = _run(capsys, "kb-lint", str(bad))
    assert code == 1
    assert "checksum" in err


def test_unknown_patient_fails_cleanly(capsys):
    code, _, err = _run(
        capsys, "explain", "--model", str(asset_path("model.json")), "--patient", "424242"
    )
    assert code == 1
    assert "error:" in err


def test_missing_subcommand_exits_with_usage(capsys):
    with pytest.raises(SystemExit):
        main([])
