"""Artifact loading and command execution behind the chat and HTTP layers.

The Engine owns every loaded artifact (dataset, model, KB, router assets,
rule tables), answers view-model queries, and renders grammar-routed chat
answers from fixed templates so identical requests produce identical
bytes. It performs no session or transport work.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from importlib.resources import files
from pathlib import Path

import numpy as np

from .data import Dataset, FeatureSchema, load_dataset, pima_schema
from .evidence import EvidenceNotFound, KnowledgeBase, get_evidence, load_kb
from .explain import FaithfulnessReport, PerturbationConfig, SelectionConfig, select_explainer
from .gbdt import RiskModel
from .ranges import FeatureRangeReport, build_range_report
from .recommend import (
    StepRules,
    choose_candidate,
    decompose_steps,
    generate_counterfactual,
    load_step_rules,
)
from .router import MatcherConfig, ParsedCommand, PromptCorpus, Router

DEFAULT_SEED = 17
TOP_K = 4


class ArtifactError(RuntimeError):
    """An artifact failed to load or validate; message names the artifact."""


def asset_path(name: str) -> Path:
    return Path(str(files("riskscope").joinpath("assets", name)))


@dataclass(frozen=True)
class EngineConfig:
    data: Path = field(default_factory=lambda: asset_path("pima_synthetic.csv"))
    model: Path = field(default_factory=lambda: asset_path("model.json"))
    kb: Path = field(default_factory=lambda: asset_path("kb.json"))
    corpus: Path = field(default_factory=lambda: asset_path("corpus.json"))
    router_config: Path = field(default_factory=lambda: asset_path("router_config.json"))
    step_rules: Path = field(default_factory=lambda: asset_path("step_rules.json"))
    thresholds: Path = field(default_factory=lambda: asset_path("thresholds.json"))
    seed: int = DEFAULT_SEED

    @classmethod
    def from_file(cls, path: str | Path) -> "EngineConfig":
        doc = json.loads(Path(path).read_text())
        base = Path(path).resolve().parent
        kwargs = {}
        for key in ("data", "model", "kb", "corpus", "router_config", "step_rules", "thresholds"):
            if key in doc:
                p = Path(doc[key])
                kwargs[key] = p if p.is_absolute() else base / p
        if "seed" in doc:
            kwargs["seed"] = int(doc["seed"])
        return cls(**kwargs)


def _load(artifact: str, fn):
    try:
        return fn()
    except Exception as exc:
        raise ArtifactError(f"{artifact}: {exc}") from exc


class Engine:
    def __init__(self, config: EngineConfig | None = None):
        cfg = config or EngineConfig()
        self.config = cfg
        self.schema: FeatureSchema = pima_schema()
        self.dataset: Dataset = _load("dataset", lambda: load_dataset(cfg.data, self.schema))
        self.model: RiskModel = _load("model", lambda: RiskModel.load(cfg.model))
        self.kb: KnowledgeBase = _load("knowledge base", lambda: load_kb(cfg.kb))
        self.rules: StepRules = _load("step rules", lambda: load_step_rules(cfg.step_rules, self.schema))
        self.bands: dict = _load("threshold bands", lambda: self._load_bands(cfg.thresholds))
        corpus = _load("prompt corpus", lambda: PromptCorpus.load(cfg.corpus))
        matcher_cfg = _load("router config", lambda: MatcherConfig.load(cfg.router_config))
        self.router: Router = Router(corpus, matcher_cfg, self.schema)
        if self.model.d != self.schema.d:
            raise ArtifactError(f"model: expects {self.model.d} features, schema has {self.schema.d}")
        self.seed = cfg.seed
        self._importance_cache: dict[tuple[int, int], FaithfulnessReport] = {}
        self._cache_lock = threading.Lock()

    def _load_bands(self, path: Path) -> dict:
        doc = json.loads(Path(path).read_text())
        bands = {}
        for name, raw in doc.items():
            if name not in self.schema.names:
                raise ValueError(f"threshold band for unknown feature {name!r}")
            warning, critical = float(raw["warning"]), float(raw["critical"])
            if warning >= critical:
                raise ValueError(f"{name}: warning must sit below critical")
            bands[name] = {"warning": warning, "critical": critical}
        return bands

    # ------------------------------------------------------------------ views

    def artifact_checksums(self) -> dict:
        import hashlib

        return {
            "model": hashlib.sha256(self.model.to_json().encode()).hexdigest(),
            "kb": self.kb.checksum,
            "dataset_records": len(self.dataset),
        }

    def record_values(self, patient_id: int) -> np.ndarray:
        return np.array(self.dataset.record(patient_id).values)

    def patient_view(self, patient_id: int) -> dict:
        rec = self.dataset.record(patient_id)
        proba = self.model.predict_proba(np.array(rec.values))
        feats = []
        for j, spec in enumerate(self.schema.features):
            s = self.dataset.summaries[spec.name]
            feats.append(
                {
                    "name": spec.name,
                    "unit": spec.unit,
                    "value": rec.values[j],
                    "min": s.low,
                    "max": s.high,
                    "histogram": {"edges": list(s.bin_edges), "counts": list(s.bin_counts)},
                    "bands": self.bands.get(spec.name),
                    "actionable": spec.actionable,
                }
            )
        return {
            "patient_id": patient_id,
            "risk_probability": proba,
            "predicted_class": int(proba >= 0.5),
            "features": feats,
        }

    def prediction(self, patient_id: int) -> dict:
        proba = self.model.predict_proba(self.record_values(patient_id))
        return {"patient_id": patient_id, "probability": proba, "predicted_class": int(proba >= 0.5)}

    def importance(self, patient_id: int, seed: int | None = None) -> FaithfulnessReport:
        seed = self.seed if seed is None else seed
        key = (patient_id, seed)
        with self._cache_lock:
            hit = self._importance_cache.get(key)
        if hit is not None:
            return hit
        report = select_explainer(
            self.model,
            self.dataset,
            self.record_values(patient_id),
            SelectionConfig(K=TOP_K),
            PerturbationConfig(seed=seed),
            target=patient_id,
        )
        with self._cache_lock:
            self._importance_cache[key] = report
        return report

    def importance_payload(self, patient_id: int, seed: int | None = None) -> dict:
        report = self.importance(patient_id, seed)
        ranked = self.top_features(patient_id, seed, count=self.schema.d)
        phi = dict(zip(self.schema.names, report.selected_result.phi))
        return {
            "patient_id": patient_id,
            "selected": report.selected,
            "features": [{"feature": name, "phi": phi[name]} for name in ranked],
            "report": report.to_dict(),
        }

    def top_features(self, patient_id: int, seed: int | None = None, count: int = TOP_K) -> list[str]:
        report = self.importance(patient_id, seed)
        phi = np.abs(np.array(report.selected_result.phi))
        order = np.argsort(-phi, kind="stable")
        return [self.schema.names[i] for i in order[:count]]

    def ranges_report(self, patient_id: int, seed: int | None = None) -> FeatureRangeReport:
        return build_range_report(
            self.model,
            self.dataset,
            self.record_values(patient_id),
            self.top_features(patient_id, seed),
            self.kb,
        )

    def ranges_payload(self, patient_id: int, seed: int | None = None) -> dict:
        doc = self.ranges_report(patient_id, seed).to_dict()
        doc["patient_id"] = patient_id
        return doc

    def recommendation_payload(self, patient_id: int) -> dict:
        x = self.record_values(patient_id)
        search = generate_counterfactual(self.model, self.dataset, x)
        if search.status != "found":
            return {"patient_id": patient_id, "status": search.status}
        candidate = choose_candidate(search, self.dataset, x)
        plan = decompose_steps(self.model, x, candidate, self.schema, self.rules, patient=patient_id)
        return {
            "patient_id": patient_id,
            "status": "ok",
            "plan": plan.to_dict(),
            "candidates": [
                [{"feature": ch.feature, "new_value": ch.new_value} for ch in cand]
                for cand in search.candidates
            ],
        }

    def evidence_payload(self, feature: str, kind: str) -> dict:
        return get_evidence(self.kb, feature, kind).to_dict()

    def dataset_summary(self, cls: int | None = None) -> dict:
        ds = self.dataset
        labels = ds.labels
        preds = self.model.predict_batch(ds.matrix)
        doc = {
            "n_records": len(ds),
            "n_positive_label": int(labels.sum()) if labels is not None else None,
            "n_predicted_at_risk": int((preds == 1).sum()),
            "features": [
                {"name": s.name, "unit": s.unit, "min": ds.summaries[s.name].low, "max": ds.summaries[s.name].high}
                for s in self.schema.features
            ],
        }
        if cls is not None:
            doc["filter_class"] = cls
            doc["n_predicted_in_class"] = int((preds == cls).sum())
        return doc

    # --------------------------------------------------------- chat execution

    def run_command(self, cmd: ParsedCommand) -> tuple[str, dict, str | None]:
        """Execute a parsed grammar command. Returns (answer text, payload,
        suggested view tag). Text comes from fixed templates only."""
        action = cmd.action
        if action == "predict":
            pid = cmd.args["patient_id"]
            p = self.prediction(pid)
            state = "AT RISK" if p["predicted_class"] == 1 else "not at risk"
            text = f"Patient {pid} is predicted {state}, with a risk of {_pct(p['probability'])}."
            return text, p, "record"
        if action == "explain_importance":
            pid = cmd.args["patient_id"]
            count = int(cmd.args.get("count", TOP_K))
            payload = self.importance_payload(pid)
            shown = payload["features"][: max(1, count)]
            parts = ", ".join(f"{row['feature']} ({row['phi']:+.3f})" for row in shown)
            text = (
                f"Most influential factors for patient {pid}, by the {payload['selected']} "
                f"explainer: {parts}."
            )
            return text, payload, "importance"
        if action == "explain_range":
            pid = cmd.args["patient_id"]
            payload = self.ranges_payload(pid)
            feature = cmd.args.get("feature")
            rows = payload["features"]
            if feature:
                rows = [r for r in rows if r["feature"] == feature]
                if not rows:
                    extra = build_range_report(
                        self.model, self.dataset, self.record_values(pid), [feature], self.kb
                    ).to_dict()
                    rows = extra["features"]
            lines = [_range_line(r) for r in rows]
            group = "predicted at-risk" if payload["predicted_class"] == 1 else "predicted healthy"
            text = f"Across the {payload['n_class_samples']} {group} patients: " + " ".join(lines)
            return text, payload, "ranges"
        if action == "counterfactual":
            pid = cmd.args["patient_id"]
            payload = self.recommendation_payload(pid)
            if payload["status"] == "no_change_needed":
                return (f"Patient {pid} is already predicted healthy; no change is needed.", payload, "recommendation")
            if payload["status"] == "no_feasible_plan":
                return (
                    f"No achievable combination of changes flips patient {pid} within observed bounds.",
                    payload,
                    "recommendation",
                )
            alts = "; ".join(
                " and ".join(f"{ch['feature']} to {ch['new_value']:g}" for ch in cand)
                for cand in payload["candidates"]
            )
            text = f"These changes would flip patient {pid} to a healthy prediction: {alts}."
            return text, payload, "recommendation"
        if action == "recommendation":
            pid = cmd.args["patient_id"]
            payload = self.recommendation_payload(pid)
            if payload["status"] == "no_change_needed":
                return (f"Patient {pid} is already predicted healthy; no plan is needed.", payload, "recommendation")
            if payload["status"] == "no_feasible_plan":
                return (
                    f"No achievable step plan was found for patient {pid} within observed bounds.",
                    payload,
                    "recommendation",
                )
            plan = payload["plan"]
            lines = [
                f"Step {i + 1} [{s['feasibility']}]: {s['feature']} {s['delta']:+g} to {s['cumulative_value']:g} "
                f"(risk {_pct(s['predicted_probability_after'])})"
                for i, s in enumerate(plan["steps"])
            ]
            text = f"Recommended plan for patient {pid}: " + "; ".join(lines) + f". {plan['horizon_note']}"
            return text, payload, "recommendation"
        if action == "data_summary":
            payload = self.dataset_summary(cmd.args.get("class"))
            share = payload["n_positive_label"] / payload["n_records"] * 100.0
            text = (
                f"The dataset holds {payload['n_records']} patients, "
                f"{payload['n_positive_label']} ({share:.1f}%) with a recorded positive outcome; "
                f"the model currently flags {payload['n_predicted_at_risk']} as at risk."
            )
            return text, payload, None
        if action == "evidence_request":
            feature, kind = cmd.args["feature"], cmd.args["kind"]
            try:
                payload = self.evidence_payload(feature, kind)
            except EvidenceNotFound:
                return (
                    f"The knowledge base has no {kind} entry for {feature}.",
                    {"feature": feature, "kind": kind, "found": False},
                    None,
                )
            sources = "; ".join(
                f"{c['marker']} {c['title']} ({c['year']}, {c['locator']})" for c in payload["citations"]
            )
            text = f"{payload['summary']} Sources: {sources}"
            return text, payload, None
        raise ValueError(f"unhandled action {action!r}")


def _pct(p: float) -> str:
    return f"{p * 100.0:.1f}%"


def _range_line(r: dict) -> str:
    base = f"{r['feature']} runs {r['ai_low']:.1f} to {r['ai_high']:.1f} {r['unit']}".rstrip()
    if r.get("sci_low") is None:
        return base + " (no curated reference range)."
    return (
        base
        + f"; the {r['sci_kind']} reference is {r['sci_low']:.1f} to {r['sci_high']:.1f} "
        + f"(overlap {r['overlap'] * 100.0:.0f}%)."
    )
