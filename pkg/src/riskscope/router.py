"""Hybrid query routing: semantic match, grammar parse, or LLM fallback.

Queries close to a supported prompt (cosine over character n-gram TF-IDF)
are parsed into engine commands by a deterministic per-intent grammar.
Everything else, including matched queries whose arguments cannot be
resolved, goes to an external chat-completion client carrying a bounded,
grounded context pack. The two paths are exclusive by construction.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

import numpy as np
from sklearn.feature_extraction.text import TfidfVectorizer

from .data import FeatureSchema
from .evidence import EvidenceNotFound, KnowledgeBase, get_evidence

INTENTS = (
    "predict",
    "explain_importance",
    "explain_range",
    "counterfactual",
    "recommendation",
    "data_summary",
    "evidence_request",
)

MIN_ENTRIES_PER_INTENT = 3
PACK_BUDGET_BYTES = 32 * 1024
FALLBACK_TIMEOUT_SECONDS = 30.0

FALLBACK_PREAMBLE = (
    "You are the conversational assistant of a diabetes-risk dashboard. "
    "Answer using only the provided context: the recent conversation, the "
    "current patient's feature values, the data shown in the active view, "
    "and the attached evidence excerpts. If the context does not cover the "
    "question, say so plainly."
)


class RouterError(ValueError):
    pass


class EmptyQueryError(RouterError):
    pass


class ParseMiss(Exception):
    """Soft parse failure; the query is demoted to the fallback route."""


@dataclass(frozen=True)
class PromptCorpus:
    entries: tuple[tuple[str, str], ...]  # (text, intent)

    def __post_init__(self) -> None:
        texts = [t for t, _ in self.entries]
        if len(set(texts)) != len(texts):
            raise RouterError("corpus texts must be unique")
        counts: dict[str, int] = {}
        for _, intent in self.entries:
            if intent not in INTENTS:
                raise RouterError(f"unknown intent {intent!r}")
            counts[intent] = counts.get(intent, 0) + 1
        thin = [i for i in INTENTS if counts.get(i, 0) < MIN_ENTRIES_PER_INTENT]
        if thin:
            raise RouterError(f"intents need at least {MIN_ENTRIES_PER_INTENT} entries each: {thin}")

    @classmethod
    def load(cls, path: str | Path) -> "PromptCorpus":
        doc = json.loads(Path(path).read_text())
        return cls(tuple((e["text"], e["intent"]) for e in doc["entries"]))


@dataclass(frozen=True)
class MatcherConfig:
    vectorizer: str = "char_ngram_tfidf"
    threshold: float = 0.5
    calibration: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 < self.threshold < 1.0:
            raise RouterError(f"threshold must be in (0, 1), got {self.threshold}")

    @classmethod
    def load(cls, path: str | Path) -> "MatcherConfig":
        doc = json.loads(Path(path).read_text())
        return cls(
            vectorizer=doc.get("vectorizer", "char_ngram_tfidf"),
            threshold=float(doc["threshold"]),
            calibration=doc.get("calibration", {}),
        )


class Vectorizer(Protocol):
    """Anything that maps texts to L2-normalized rows; an external embedding
    provider can stand in for the default n-gram vectorizer."""

    def fit(self, texts: list[str]) -> None: ...
    def transform(self, texts: list[str]) -> np.ndarray: ...


class CharNgramVectorizer:
    def __init__(self) -> None:
        self._tfidf = TfidfVectorizer(analyzer="char_wb", ngram_range=(3, 5), lowercase=True)

    def fit(self, texts: list[str]) -> None:
        self._tfidf.fit(texts)

    def transform(self, texts: list[str]) -> np.ndarray:
        return np.asarray(self._tfidf.transform(texts).todense())


_VECTORIZERS: dict[str, Callable[[], Vectorizer]] = {"char_ngram_tfidf": CharNgramVectorizer}


def register_vectorizer(name: str, factory: Callable[[], Vectorizer]) -> None:
    _VECTORIZERS[name] = factory


class Matcher:
    """Nearest-corpus-entry lookup under cosine similarity."""

    def __init__(self, corpus: PromptCorpus, cfg: MatcherConfig):
        if not corpus.entries:
            raise RouterError("corpus is empty")
        if cfg.vectorizer not in _VECTORIZERS:
            raise RouterError(f"unknown vectorizer {cfg.vectorizer!r}")
        self.corpus = corpus
        self.cfg = cfg
        self._vec = _VECTORIZERS[cfg.vectorizer]()
        texts = [t for t, _ in corpus.entries]
        self._vec.fit(texts)
        self._rows = self._vec.transform(texts)

    def match(self, text: str) -> tuple[str, float]:
        if not text or not text.strip():
            raise EmptyQueryError("query text is empty")
        q = self._vec.transform([text])[0]
        sims = self._rows @ q
        best = int(np.argmax(sims))
        return self.corpus.entries[best][1], float(sims[best])


def match_intent(text: str, corpus: PromptCorpus, cfg: MatcherConfig) -> tuple[str, float]:
    return Matcher(corpus, cfg).match(text)


@dataclass(frozen=True)
class LabeledExample:
    text: str
    in_scope: bool
    intent: str | None = None


def load_labeled_set(path: str | Path) -> list[LabeledExample]:
    doc = json.loads(Path(path).read_text())
    return [LabeledExample(i["text"], bool(i["in_scope"]), i.get("intent")) for i in doc["items"]]


@dataclass(frozen=True)
class CalibrationResult:
    threshold: float
    accuracy: float
    n_in_scope: int
    n_out_of_scope: int


def calibrate_threshold(
    corpus: PromptCorpus,
    labeled: list[LabeledExample],
    cfg: MatcherConfig | None = None,
) -> CalibrationResult:
    """Grid-search the similarity threshold for routing accuracy.

    An in-scope item counts as correct when it clears the threshold and
    matches its labeled intent; an out-of-scope item when it falls below.
    Ties prefer the larger threshold (precision of the grammar route).
    """
    cfg = cfg or MatcherConfig()
    n_in = sum(1 for ex in labeled if ex.in_scope)
    n_out = len(labeled) - n_in
    if n_in == 0 or n_out == 0:
        raise RouterError("labeled set needs both in-scope and out-of-scope items")
    matcher = Matcher(corpus, cfg)
    scored = [(ex, *matcher.match(ex.text)) for ex in labeled]
    best_t, best_acc = 0.01, -1.0
    for step in range(1, 100):
        t = step / 100.0
        correct = 0
        for ex, intent, sim in scored:
            if ex.in_scope:
                correct += sim >= t and intent == ex.intent
            else:
                correct += sim < t
        acc = correct / len(labeled)
        if acc >= best_acc:  # ties resolve to the larger threshold
            best_t, best_acc = t, acc
    return CalibrationResult(best_t, best_acc, n_in, n_out)


@dataclass(frozen=True)
class ParsedCommand:
    action: str
    args: dict

    def to_dict(self) -> dict:
        return {"action": self.action, "args": dict(self.args)}


_SYNONYMS: tuple[tuple[str, str], ...] = (
    ("blood pressure", "BloodPressure"),
    ("diastolic", "BloodPressure"),
    ("bp", "BloodPressure"),
    ("skin thickness", "SkinThickness"),
    ("skinfold", "SkinThickness"),
    ("skin fold", "SkinThickness"),
    ("triceps", "SkinThickness"),
    ("body mass index", "BMI"),
    ("bmi", "BMI"),
    ("blood sugar", "Glucose"),
    ("glucose", "Glucose"),
    ("insulin", "Insulin"),
    ("pedigree", "DiabetesPedigreeFunction"),
    ("family history", "DiabetesPedigreeFunction"),
    ("dpf", "DiabetesPedigreeFunction"),
    ("pregnancies", "Pregnancies"),
    ("pregnancy", "Pregnancies"),
    ("parity", "Pregnancies"),
    ("age", "Age"),
)

_PATIENT_RE = re.compile(r"\b(?:patient|record|id)\s*#?\s*(\d+)", re.IGNORECASE)
_COUNT_RE = re.compile(r"\btop\s+(\d+)", re.IGNORECASE)
_BARE_INT_RE = re.compile(r"\b(\d+)\b")

_POSITIVE_RE = re.compile(r"\b(?:at[- ]risk|positive|diabetic|high[- ]risk|class\s*1)\b", re.IGNORECASE)
_NEGATIVE_RE = re.compile(r"\b(?:healthy|negative|low[- ]risk|not at risk|class\s*0)\b", re.IGNORECASE)


def _find_feature(text: str, schema: FeatureSchema) -> str | None:
    low = text.lower()
    for phrase, name in _SYNONYMS:
        if len(phrase) <= 3:
            if re.search(rf"\b{re.escape(phrase)}\b", low):
                return name if name in schema.names else None
        elif phrase in low:
            return name if name in schema.names else None
    return None


def _find_patient(text: str) -> int | None:
    m = _PATIENT_RE.search(text)
    if m:
        return int(m.group(1))
    counted = {c.group(1) for c in _COUNT_RE.finditer(text)}
    bare = [b for b in _BARE_INT_RE.findall(text) if b not in counted]
    if len(bare) == 1:
        return int(bare[0])
    return None


def _find_class(text: str) -> int | None:
    if _POSITIVE_RE.search(text):
        return 1
    if _NEGATIVE_RE.search(text):
        return 0
    return None


def parse_command(
    text: str,
    intent: str,
    schema: FeatureSchema,
    session_patient: int | None = None,
) -> ParsedCommand:
    """Per-intent argument extraction. A required argument that cannot be
    resolved raises ParseMiss, never a user-facing error."""
    if intent not in INTENTS:
        raise RouterError(f"unknown intent {intent!r}")
    args: dict = {}
    patient = _find_patient(text)
    if patient is None:
        patient = session_patient
    feature = _find_feature(text, schema)
    cls = _find_class(text)
    count = _COUNT_RE.search(text)

    needs_patient = intent in ("predict", "explain_importance", "explain_range", "counterfactual", "recommendation")
    if needs_patient:
        if patient is None:
            raise ParseMiss(f"{intent} needs a patient id and none was given or active")
        args["patient_id"] = patient
    if intent == "explain_importance" and count:
        args["count"] = int(count.group(1))
    if intent == "explain_range" and feature:
        args["feature"] = feature
    if intent == "data_summary" and cls is not None:
        args["class"] = cls
    if intent == "evidence_request":
        if feature is None:
            raise ParseMiss("evidence request names no known factor")
        args["feature"] = feature
        args["kind"] = "range" if re.search(r"\b(?:range|normal|threshold)s?\b", text, re.IGNORECASE) else "importance"
    return ParsedCommand(action=intent, args=args)


@dataclass(frozen=True)
class RouteDecision:
    route: str  # "grammar" | "fallback"
    intent: str | None
    similarity: float
    command: ParsedCommand | None
    reason: str  # "matched" | "below_threshold" | "parse_demotion" | "empty_query"

    def to_dict(self) -> dict:
        return {
            "route": self.route,
            "intent": self.intent,
            "similarity": self.similarity,
            "command": self.command.to_dict() if self.command else None,
            "reason": self.reason,
        }


class Router:
    """Fitted matcher plus grammar, shared by the service across requests."""

    def __init__(self, corpus: PromptCorpus, cfg: MatcherConfig, schema: FeatureSchema):
        self.matcher = Matcher(corpus, cfg)
        self.cfg = cfg
        self.schema = schema

    def decide(self, query: str, session_patient: int | None = None) -> RouteDecision:
        try:
            intent, sim = self.matcher.match(query)
        except EmptyQueryError:
            return RouteDecision("fallback", None, 0.0, None, "empty_query")
        if sim < self.cfg.threshold:
            return RouteDecision("fallback", intent, sim, None, "below_threshold")
        try:
            cmd = parse_command(query, intent, self.schema, session_patient)
        except ParseMiss:
            return RouteDecision("fallback", intent, sim, None, "parse_demotion")
        return RouteDecision("grammar", intent, sim, cmd, "matched")


def route(
    query: str,
    corpus: PromptCorpus,
    cfg: MatcherConfig,
    schema: FeatureSchema,
    session_patient: int | None = None,
) -> RouteDecision:
    return Router(corpus, cfg, schema).decide(query, session_patient)


@dataclass(frozen=True)
class ContextPack:
    recent_turns: tuple[tuple[str, str], ...]  # (user text, system text)
    patient_values: tuple[dict, ...]  # {"name", "value", "unit"} - never truncated
    active_view: str
    view_data: dict | None
    evidence_excerpts: tuple[dict, ...]

    def to_dict(self) -> dict:
        return {
            "recent_turns": [{"user": u, "system": s} for u, s in self.recent_turns],
            "patient_values": list(self.patient_values),
            "active_view": self.active_view,
            "view_data": self.view_data,
            "evidence_excerpts": list(self.evidence_excerpts),
        }

    def serialize(self) -> str:
        """JSON within the pack budget: drop oldest turns first, then
        histogram detail inside the view data. Patient values survive."""
        doc = self.to_dict()
        text = json.dumps(doc)
        while len(text.encode()) > PACK_BUDGET_BYTES and doc["recent_turns"]:
            doc["recent_turns"] = doc["recent_turns"][1:]
            text = json.dumps(doc)
        if len(text.encode()) > PACK_BUDGET_BYTES and doc["view_data"]:
            doc["view_data"] = _strip_histograms(doc["view_data"])
            text = json.dumps(doc)
        return text


def _strip_histograms(node):
    if isinstance(node, dict):
        return {k: _strip_histograms(v) for k, v in node.items() if k != "histogram"}
    if isinstance(node, list):
        return [_strip_histograms(v) for v in node]
    return node


_VIEW_EVIDENCE_KIND = {"importance": "importance", "ranges": "range", "recommendation": "importance"}


def build_context(
    turns: list[tuple[str, str]],
    patient_values: list[dict],
    active_view: str,
    view_data: dict | None,
    kb: KnowledgeBase,
) -> ContextPack:
    """Pack the last three turns, the patient's values, the active view's
    payload, and the evidence entries that view would surface."""
    excerpts: list[dict] = []
    kind = _VIEW_EVIDENCE_KIND.get(active_view)
    if kind and view_data:
        for name in _view_features(view_data):
            try:
                excerpts.append(get_evidence(kb, name, kind).to_dict())
            except EvidenceNotFound:
                continue
    return ContextPack(
        recent_turns=tuple(tuple(t) for t in turns[-3:]),
        patient_values=tuple(patient_values),
        active_view=active_view,
        view_data=view_data,
        evidence_excerpts=tuple(excerpts),
    )


def _view_features(view_data: dict) -> list[str]:
    names: list[str] = []
    for row in view_data.get("features", []):
        n = row.get("feature") or row.get("name")
        if n and n not in names:
            names.append(n)
    for step in view_data.get("steps", []):
        n = step.get("feature")
        if n and n not in names:
            names.append(n)
    return names


class ChatClient(Protocol):
    def complete(self, payload: dict) -> dict: ...


class HttpChatClient:
    """POSTs {system, context, query} as JSON and expects {"text": ...}."""

    def __init__(self, base_url: str, api_key: str | None = None, timeout: float = FALLBACK_TIMEOUT_SECONDS):
        self.base_url = base_url
        self.api_key = api_key
        self.timeout = timeout

    def complete(self, payload: dict) -> dict:
        import httpx

        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        resp = httpx.post(self.base_url, json=payload, headers=headers, timeout=self.timeout)
        resp.raise_for_status()
        return resp.json()


@dataclass(frozen=True)
class FallbackAnswer:
    text: str
    provenance: str  # "external" | "unavailable"
    cause: str | None = None

    def to_dict(self) -> dict:
        doc = {"text": self.text, "provenance": self.provenance}
        if self.cause:
            doc["cause"] = self.cause
        return doc


def _unavailable(cause: str) -> FallbackAnswer:
    return FallbackAnswer(
        text=(
            "The external assistant is unavailable right now "
            f"({cause.replace('_', ' ')}). Supported questions about "
            "predictions, important factors, ranges, and recommendations "
            "are still answered by the engine."
        ),
        provenance="unavailable",
        cause=cause,
    )


def fallback_answer(query: str, pack: ContextPack, client: ChatClient | None) -> FallbackAnswer:
    """One grounded request to the external service; transport or contract
    failures surface as a structured unavailable message, never invented
    content."""
    if client is None:
        return _unavailable("not_configured")
    payload = {
        "system": FALLBACK_PREAMBLE,
        "context": json.loads(pack.serialize()),
        "query": query,
    }
    try:
        reply = client.complete(payload)
    except Exception as exc:  # noqa: BLE001 - every transport failure maps to a cause
        return _unavailable(_classify_failure(exc))
    text = reply.get("text") if isinstance(reply, dict) else None
    if not isinstance(text, str) or not text:
        return _unavailable("malformed_reply")
    return FallbackAnswer(text=text, provenance="external")


def _classify_failure(exc: Exception) -> str:
    try:
        import httpx

        if isinstance(exc, httpx.TimeoutException):
            return "timeout"
        if isinstance(exc, httpx.HTTPError):
            return "http_error"
    except ImportError:  # pragma: no cover
        pass
    if isinstance(exc, TimeoutError):
        return "timeout"
    if isinstance(exc, (ConnectionError, OSError)):
        return "http_error"
    return "malformed_reply"
