"""Train the bundled model and calibrate the bundled router threshold.

Inputs are the committed assets (synthetic table, corpus, calibration set);
outputs are src/riskscope/assets/model.json and router_config.json. Both
are deterministic, so reruns leave the files byte-identical.
"""

from __future__ import annotations

import json
from datetime import date
from pathlib import Path

from riskscope.data import load_dataset, pima_schema
from riskscope.gbdt import train
from riskscope.router import MatcherConfig, PromptCorpus, calibrate_threshold, load_labeled_set

ASSETS = Path(__file__).resolve().parent.parent / "src" / "riskscope" / "assets"


def build_model() -> None:
    ds = load_dataset(ASSETS / "pima_synthetic.csv", pima_schema())
    model = train(ds)
    model.save(ASSETS / "model.json")
    print(f"model.json: test_accuracy={model.metadata['test_accuracy']:.4f}, trees={len(model.trees)}")


def build_router_config() -> None:
    corpus = PromptCorpus.load(ASSETS / "corpus.json")
    labeled = load_labeled_set(ASSETS / "calibration_set.json")
    result = calibrate_threshold(corpus, labeled)
    doc = {
        "vectorizer": "char_ngram_tfidf",
        "threshold": result.threshold,
        "calibration": {
            "accuracy": result.accuracy,
            "n_in_scope": result.n_in_scope,
            "n_out_of_scope": result.n_out_of_scope,
            "grid_step": 0.01,
            "labeled_set": "calibration_set.json",
            "calibrated_on": date(2026, 8, 23).isoformat(),
        },
    }
    (ASSETS / "router_config.json").write_text(json.dumps(doc, indent=2) + "\n")
    print(f"router_config.json: threshold={result.threshold}, accuracy={result.accuracy:.3f}")


if __name__ == "__main__":
    build_model()
    build_router_config()
