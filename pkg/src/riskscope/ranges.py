"""Percentile ranges of same-class predictions vs curated scientific ranges."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .evidence import EvidenceNotFound, KnowledgeBase, get_evidence

MIN_CLASS_SAMPLES = 10  # below this the report flags low confidence


class EmptyClassError(ValueError):
    """No dataset record is predicted in the requested class."""


def percentile(values, p: float) -> float:
    """Linear interpolation between closest ranks (the p/100*(n-1) rule)."""
    vs = sorted(float(v) for v in values)
    if not vs:
        raise ValueError("cannot take a percentile of no values")
    if not 0.0 <= p <= 100.0:
        raise ValueError(f"percentile must be in [0, 100], got {p}")
    h = (p / 100.0) * (len(vs) - 1)
    lo = math.floor(h)
    hi = min(lo + 1, len(vs) - 1)
    a, b, t = vs[lo], vs[hi], h - lo
    # Anchor the interpolation at the nearer endpoint so t=1 is exact and
    # results agree bit for bit with library linear interpolation.
    return b - (b - a) * (1.0 - t) if t >= 0.5 else a + (b - a) * t


@dataclass(frozen=True)
class AiRange:
    low: float
    high: float
    n: int


def compute_ai_ranges(
    model,
    dataset: Dataset,
    predicted_class: int,
    features: list[str],
    span: tuple[float, float] = (25.0, 75.0),
) -> dict[str, AiRange]:
    """Percentile interval of each feature over records the model puts in
    `predicted_class`. Depends only on the multiset of same-class values."""
    if len(dataset) == 0:
        raise EmptyClassError("dataset is empty")
    unknown = [f for f in features if f not in dataset.schema.names]
    if unknown:
        raise KeyError(f"features not in schema: {unknown}")
    preds = model.predict_batch(dataset.matrix)
    pool = dataset.matrix[preds == predicted_class]
    if pool.shape[0] == 0:
        raise EmptyClassError(f"no records predicted in class {predicted_class}")
    p_lo, p_hi = span
    out: dict[str, AiRange] = {}
    for name in features:
        col = pool[:, dataset.schema.index_of(name)]
        out[name] = AiRange(percentile(col, p_lo), percentile(col, p_hi), int(pool.shape[0]))
    return out


def range_overlap(ai: tuple[float, float], sci: tuple[float, float]) -> float:
    """Interval Jaccard, with point-in-interval semantics for degenerate inputs."""
    (a0, a1), (b0, b1) = ai, sci
    if a0 > a1 or b0 > b1:
        raise ValueError("interval low must not exceed high")
    len_a, len_b = a1 - a0, b1 - b0
    inter = max(0.0, min(a1, b1) - max(a0, b0))
    if len_a == 0.0 and len_b == 0.0:
        return 1.0 if a0 == b0 else 0.0
    if len_a == 0.0:
        return 1.0 if b0 <= a0 <= b1 else 0.0
    if len_b == 0.0:
        return 1.0 if a0 <= b0 <= a1 else 0.0
    return inter / (len_a + len_b - inter)


@dataclass(frozen=True)
class FeatureRange:
    feature: str
    unit: str
    ai_low: float
    ai_high: float
    sci_low: float | None = None
    sci_high: float | None = None
    sci_kind: str | None = None  # which KB interval applies: "normal" or "diagnostic"
    overlap: float | None = None

    def to_dict(self) -> dict:
        doc = {"feature": self.feature, "unit": self.unit, "ai_low": self.ai_low, "ai_high": self.ai_high}
        if self.sci_low is not None:
            doc.update(
                sci_low=self.sci_low, sci_high=self.sci_high, sci_kind=self.sci_kind, overlap=self.overlap
            )
        return doc


@dataclass(frozen=True)
class FeatureRangeReport:
    predicted_class: int
    n_class_samples: int
    low_confidence: bool
    features: tuple[FeatureRange, ...]

    def to_dict(self) -> dict:
        return {
            "predicted_class": self.predicted_class,
            "n_class_samples": self.n_class_samples,
            "low_confidence": self.low_confidence,
            "features": [f.to_dict() for f in self.features],
        }


def build_range_report(
    model,
    dataset: Dataset,
    x,
    top_features: list[str],
    kb: KnowledgeBase,
) -> FeatureRangeReport:
    """AI-observed [p25, p75] for the requested features among records
    predicted like x, against the matching scientific interval.

    The scientific side uses the KB diagnostic interval for the at-risk
    class and the normal interval otherwise; features without a KB range
    entry carry only their AI side.
    """
    predicted_class = model.predict(np.asarray(x, dtype=np.float64))
    if top_features:
        ai = compute_ai_ranges(model, dataset, predicted_class, top_features)
        n = next(iter(ai.values())).n
    else:
        preds = model.predict_batch(dataset.matrix) if len(dataset) else np.array([], dtype=np.int64)
        ai = {}
        n = int((preds == predicted_class).sum())
    rows = []
    for name in top_features:
        r = ai[name]
        unit = dataset.schema.spec_of(name).unit
        try:
            entry = get_evidence(kb, name, "range")
        except EvidenceNotFound:
            rows.append(FeatureRange(name, unit, r.low, r.high))
            continue
        info = entry.range_info
        sci = info.diagnostic if predicted_class == 1 else info.normal
        kind = "diagnostic" if predicted_class == 1 else "normal"
        rows.append(
            FeatureRange(
                name, unit, r.low, r.high,
                sci_low=sci[0], sci_high=sci[1], sci_kind=kind,
                overlap=range_overlap((r.low, r.high), sci),
            )
        )
    return FeatureRangeReport(
        predicted_class=predicted_class,
        n_class_samples=n,
        low_confidence=n < MIN_CLASS_SAMPLES,
        features=tuple(rows),
    )
