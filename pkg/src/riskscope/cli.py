"""Command-line front door: train, explain, ranges, recommend, calibrate,
kb-lint, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .data import DataError, load_dataset, pima_schema
from .engine import ArtifactError, EngineConfig, asset_path
from .evidence import KBError, load_kb
from .explain import ExplainerSelectionError, PerturbationConfig, SelectionConfig, select_explainer
from .gbdt import LearningConfig, RiskModel, SplitSpec, TrainingError, train
from .ranges import EmptyClassError, compute_ai_ranges, range_overlap
from .router import MatcherConfig, PromptCorpus, RouterError, calibrate_threshold, load_labeled_set


def _dataset(path: str | None):
    schema = pima_schema()
    return load_dataset(Path(path) if path else EngineConfig().data, schema), schema


def _emit(doc) -> None:
    print(json.dumps(doc, indent=2))


def cmd_train(args) -> int:
    dataset, _ = _dataset(args.data)
    model = train(
        dataset,
        config=LearningConfig(),
        split=SplitSpec(holdout_fraction=args.holdout, seed=args.seed),
    )
    model.save(args.out)
    _emit(
        {
            "out": str(args.out),
            "n_train": model.metadata["n_train"],
            "n_test": model.metadata["n_test"],
            "test_accuracy": model.metadata["test_accuracy"],
        }
    )
    return 0


def cmd_explain(args) -> int:
    dataset, schema = _dataset(args.data)
    model = RiskModel.load(args.model)
    x = np.array(dataset.record(args.patient).values)
    report = select_explainer(
        model,
        dataset,
        x,
        SelectionConfig(K=4),
        PerturbationConfig(seed=args.seed),
        target=args.patient,
    )
    doc = report.to_dict()
    phi = report.selected_result.phi
    order = np.argsort(-np.abs(np.array(phi)), kind="stable")
    doc["patient"] = args.patient
    doc["ranked"] = [{"feature": schema.names[i], "phi": phi[i]} for i in order]
    _emit(doc)
    return 0


def cmd_ranges(args) -> int:
    dataset, schema = _dataset(args.data)
    model = RiskModel.load(args.model)
    kb = load_kb(Path(args.kb) if args.kb else EngineConfig().kb)
    ranges = compute_ai_ranges(model, dataset, args.cls, schema.names)
    sci_kind = "diagnostic" if args.cls == 1 else "normal"
    rows = []
    for spec in schema.features:
        ai = ranges[spec.name]
        row = {"feature": spec.name, "unit": spec.unit, "ai_low": ai.low, "ai_high": ai.high}
        entry = next(
            (e for e in kb.entries if e.feature == spec.name and e.kind == "range"), None
        )
        if entry is not None:
            sci = entry.range_info.diagnostic if args.cls == 1 else entry.range_info.normal
            row.update(
                {
                    "sci_low": sci[0],
                    "sci_high": sci[1],
                    "sci_kind": sci_kind,
                    "overlap": range_overlap((ai.low, ai.high), sci),
                }
            )
        rows.append(row)
    _emit({"predicted_class": args.cls, "n_class_samples": next(iter(ranges.values())).n, "features": rows})
    return 0


def cmd_recommend(args) -> int:
    from .recommend import choose_candidate, decompose_steps, generate_counterfactual, load_step_rules

    dataset, schema = _dataset(args.data)
    model = RiskModel.load(args.model)
    rules = load_step_rules(Path(args.rules) if args.rules else EngineConfig().step_rules, schema)
    x = np.array(dataset.record(args.patient).values)
    search = generate_counterfactual(model, dataset, x)
    if search.status != "found":
        _emit({"patient": args.patient, "status": search.status})
        return 0
    candidate = choose_candidate(search, dataset, x)
    plan = decompose_steps(model, x, candidate, schema, rules, patient=args.patient)
    _emit({"patient": args.patient, "status": "ok", "plan": plan.to_dict()})
    return 0


def cmd_calibrate(args) -> int:
    corpus = PromptCorpus.load(args.corpus)
    labeled = load_labeled_set(args.labeled)
    result = calibrate_threshold(corpus, labeled, MatcherConfig())
    _emit(
        {
            "threshold": result.threshold,
            "accuracy": result.accuracy,
            "n_in_scope": result.n_in_scope,
            "n_out_of_scope": result.n_out_of_scope,
        }
    )
    return 0


def cmd_kb_lint(args) -> int:
    kb = load_kb(args.file)
    print(f"OK: {len(kb)} entries, checksum {kb.checksum}")
    return 0


def cmd_serve(args) -> int:
    from .service import run

    run(args.config, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riskscope", description="Risk model workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a model on a CSV and save it as JSON")
    p.add_argument("--data", help="training CSV (defaults to the bundled cohort)")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--holdout", type=float, default=0.4)
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("explain", help="run explainer selection for one patient")
    p.add_argument("--model", required=True)
    p.add_argument("--data", help="cohort CSV (defaults to the bundled cohort)")
    p.add_argument("--patient", required=True, type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_explain)

    p = sub.add_parser("ranges", help="typical feature ranges for a predicted class")
    p.add_argument("--model", required=True)
    p.add_argument("--data", help="cohort CSV (defaults to the bundled cohort)")
    p.add_argument("--class", dest="cls", required=True, type=int, choices=(0, 1))
    p.add_argument("--kb", help="knowledge base JSON (defaults to the bundled one)")
    p.set_defaults(fn=cmd_ranges)

    p = sub.add_parser("recommend", help="stepwise risk-reduction plan for a patient")
    p.add_argument("--model", required=True)
    p.add_argument("--data", help="cohort CSV (defaults to the bundled cohort)")
    p.add_argument("--patient", required=True, type=int)
    p.add_argument("--rules", help="step-size rules JSON (defaults to the bundled one)")
    p.set_defaults(fn=cmd_recommend)

    p = sub.add_parser("calibrate", help="pick the routing threshold from a labeled set")
    p.add_argument("--corpus", required=True)
    p.add_argument("--labeled", required=True)
    p.set_defaults(fn=cmd_calibrate)

    p = sub.add_parser("kb-lint", help="validate a knowledge base file")
    p.add_argument("file")
    p.set_defaults(fn=cmd_kb_lint)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--config", help="service config JSON (defaults to bundled assets)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.set_defaults(fn=cmd_serve)

    return parser


_KNOWN_ERRORS = (
    DataError,
    TrainingError,
    ArtifactError,
    KBError,
    RouterError,
    EmptyClassError,
    ExplainerSelectionError,
    KeyError,
    FileNotFoundError,
    ValueError,
)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except _KNOWN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
