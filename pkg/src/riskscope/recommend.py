"""Counterfactual plans over actionable features, split into achievable steps.

The search walks per-feature grids toward each feature's healthy direction,
first one feature at a time, then greedy coordinate descent over pairs and
triples. Chosen candidates are decomposed into limit-sized steps, badged
for feasibility from a declarative rule table, and replayed through the
model to locate the step where the prediction flips.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import Dataset, FeatureSchema
from .ranges import percentile

GRID_DIVISIONS = 20
SEARCH_BOUNDS_SPAN = (1.0, 99.0)  # percentile bounds of the search box

BADGE_ORDER = {"easy": 0, "moderate": 1, "hard": 2}


class StepRulesError(ValueError):
    """Step-rule configuration is unusable; raised at load, not per call."""


@dataclass(frozen=True)
class FeatureChange:
    feature: str
    new_value: float


Candidate = tuple[FeatureChange, ...]


@dataclass(frozen=True)
class CandidateSearch:
    status: str  # "found" | "no_change_needed" | "no_feasible_plan"
    candidates: tuple[Candidate, ...] = ()


@dataclass(frozen=True)
class RuleEntry:
    per_step_limit: float
    easy_max: float
    moderate_max: float


@dataclass(frozen=True)
class StepRules:
    by_feature: dict[str, RuleEntry]

    def entry(self, feature: str) -> RuleEntry:
        if feature not in self.by_feature:
            raise StepRulesError(f"no step rule for feature {feature!r}")
        return self.by_feature[feature]


def load_step_rules(path: str | Path, schema: FeatureSchema) -> StepRules:
    """Parse and validate the rule table; every actionable feature must be
    covered and all limits positive."""
    path = Path(path)
    if not path.exists():
        raise StepRulesError(f"step rules file not found: {path}")
    doc = json.loads(path.read_text())
    by_feature: dict[str, RuleEntry] = {}
    for feature, raw in doc.items():
        limit = float(raw["per_step_limit"])
        easy = float(raw["easy_max"])
        moderate = float(raw["moderate_max"])
        if limit <= 0:
            raise StepRulesError(f"{feature}: per_step_limit must be positive, got {limit}")
        if easy <= 0 or moderate < easy:
            raise StepRulesError(f"{feature}: need 0 < easy_max <= moderate_max")
        by_feature[feature] = RuleEntry(limit, easy, moderate)
    missing = [f for f in schema.actionable_names if f not in by_feature]
    if missing:
        raise StepRulesError(f"step rules missing actionable features: {missing}")
    return StepRules(by_feature)


def badge_feasibility(feature: str, delta: float, rules: StepRules) -> str:
    """Boundary values take the easier badge (comparisons are <=)."""
    entry = rules.entry(feature)
    a = abs(delta)
    if a <= entry.easy_max:
        return "easy"
    if a <= entry.moderate_max:
        return "moderate"
    return "hard"


def _grid(dataset: Dataset, schema: FeatureSchema, x: np.ndarray, j: int) -> np.ndarray:
    """Values feature j may take, walking from x toward health, inside the
    dataset's p1..p99 box."""
    spec = schema.features[j]
    if spec.healthy_direction not in ("decrease", "increase"):
        return np.empty(0)
    lo, hi = dataset.range_of(spec.name)
    step = (hi - lo) / GRID_DIVISIONS
    if step <= 0:
        return np.empty(0)
    col = dataset.matrix[:, j]
    p_lo, p_hi = SEARCH_BOUNDS_SPAN
    bound_lo, bound_hi = percentile(col, p_lo), percentile(col, p_hi)
    sign = -1.0 if spec.healthy_direction == "decrease" else 1.0
    vals = x[j] + sign * step * np.arange(1, GRID_DIVISIONS + 1)
    return vals[(vals >= bound_lo) & (vals <= bound_hi)]


def generate_counterfactual(model, dataset: Dataset, x, schema: FeatureSchema | None = None) -> CandidateSearch:
    """Candidate change-sets over actionable features that flip the model
    to the healthy class. Tiers are exhausted in order: single features,
    then pairs, then triples; the first tier with any flip wins."""
    schema = schema or dataset.schema
    x = np.asarray(x, dtype=np.float64).ravel()
    if model.predict(x) == 0:
        return CandidateSearch(status="no_change_needed")
    actionable = [schema.index_of(n) for n in schema.actionable_names]
    grids = {j: _grid(dataset, schema, x, j) for j in actionable}

    singles: list[Candidate] = []
    for j in actionable:
        vals = grids[j]
        if vals.size == 0:
            continue
        trial = np.repeat(x[None, :], vals.size, axis=0)
        trial[:, j] = vals
        flips = np.nonzero(model.predict_batch(trial) == 0)[0]
        if flips.size:
            v = float(vals[flips[0]])
            singles.append((FeatureChange(schema.features[j].name, v),))
    if singles:
        return CandidateSearch(status="found", candidates=tuple(singles))

    for size in (2, 3):
        found: list[Candidate] = []
        for combo in itertools.combinations(actionable, size):
            cand = _greedy_descent(model, x, combo, grids, schema)
            if cand is not None:
                found.append(cand)
        if found:
            return CandidateSearch(status="found", candidates=tuple(found))
    return CandidateSearch(status="no_feasible_plan")


def _greedy_descent(model, x: np.ndarray, combo, grids, schema: FeatureSchema) -> Candidate | None:
    """Advance whichever feature's next grid step lowers the probability
    most (ties to the earliest feature) until the prediction flips or
    every grid is exhausted."""
    state = x.copy()
    pos = {j: 0 for j in combo}  # next grid index per feature
    while True:
        movable = [j for j in combo if pos[j] < grids[j].size]
        if not movable:
            return None
        trials = np.repeat(state[None, :], len(movable), axis=0)
        for row, j in enumerate(movable):
            trials[row, j] = grids[j][pos[j]]
        probs = model.predict_proba_batch(trials)
        best = int(np.argmin(probs))
        j = movable[best]
        state[j] = grids[j][pos[j]]
        pos[j] += 1
        if probs[best] < 0.5:
            return tuple(
                FeatureChange(schema.features[k].name, float(state[k]))
                for k in combo
                if state[k] != x[k]
            )


def filter_immutable(candidates, schema: FeatureSchema):
    """Drop every candidate touching a non-actionable feature. Idempotent."""
    kept = []
    for cand in candidates:
        if all(schema.spec_of(ch.feature).actionable for ch in cand):
            kept.append(tuple(cand))
    return tuple(kept)


def choose_candidate(search: CandidateSearch, dataset: Dataset, x) -> Candidate:
    """Least-effort candidate: total |change| normalized by dataset ranges,
    earliest candidate on ties."""
    if not search.candidates:
        raise ValueError(f"no candidate to choose (status={search.status})")
    x = np.asarray(x, dtype=np.float64).ravel()

    def effort(cand: Candidate) -> float:
        total = 0.0
        for ch in cand:
            j = dataset.schema.index_of(ch.feature)
            lo, hi = dataset.range_of(ch.feature)
            total += abs(ch.new_value - x[j]) / ((hi - lo) or 1.0)
        return total

    best = min(range(len(search.candidates)), key=lambda i: (effort(search.candidates[i]), i))
    return search.candidates[best]


@dataclass(frozen=True)
class RecommendationStep:
    feature: str
    delta: float
    cumulative_value: float
    feasibility: str
    predicted_probability_after: float

    def to_dict(self) -> dict:
        return {
            "feature": self.feature,
            "delta": self.delta,
            "cumulative_value": self.cumulative_value,
            "feasibility": self.feasibility,
            "predicted_probability_after": self.predicted_probability_after,
        }


@dataclass(frozen=True)
class RecommendationPlan:
    patient: int | None
    steps: tuple[RecommendationStep, ...]
    flips_at_step: int
    horizon_note: str

    def to_dict(self) -> dict:
        return {
            "patient": self.patient,
            "steps": [s.to_dict() for s in self.steps],
            "flips_at_step": self.flips_at_step,
            "horizon_note": self.horizon_note,
        }


def split_deltas(delta: float, limit: float) -> list[float]:
    """Chunks of at most `limit`, full-size first, exact float remainder last."""
    if limit <= 0:
        raise StepRulesError(f"per-step limit must be positive, got {limit}")
    if delta == 0.0:
        return []
    n_steps = max(1, math.ceil(abs(delta) / limit - 1e-9))
    signed = math.copysign(limit, delta)
    chunks = [signed] * (n_steps - 1)
    acc = 0.0
    for c in chunks:
        acc += c
    chunks.append(delta - acc)
    return chunks


def decompose_steps(
    model,
    x,
    candidate: Candidate,
    schema: FeatureSchema,
    rules: StepRules,
    patient: int | None = None,
) -> RecommendationPlan:
    """Split each feature change into limit-sized steps and replay them.

    Features are ordered easiest-first by the badge of their largest step
    (schema order breaks ties); a feature's own steps keep their split
    order. Steps after the prediction flip are dropped.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    for ch in candidate:
        if not schema.spec_of(ch.feature).actionable:
            raise ValueError(f"candidate touches immutable feature {ch.feature}")
    full = x.copy()
    for ch in candidate:
        full[schema.index_of(ch.feature)] = ch.new_value
    if model.predict(full) != 0:
        raise ValueError("candidate does not flip the prediction")

    # (badge_rank, schema_idx, name, target, chunks)
    per_feature: list[tuple[int, int, str, float, list[float]]] = []
    for ch in candidate:
        j = schema.index_of(ch.feature)
        delta = float(ch.new_value - x[j])
        chunks = split_deltas(delta, rules.entry(ch.feature).per_step_limit)
        if not chunks:
            continue
        largest = max(chunks, key=abs)
        rank = BADGE_ORDER[badge_feasibility(ch.feature, largest, rules)]
        per_feature.append((rank, j, ch.feature, float(ch.new_value), chunks))
    per_feature.sort(key=lambda t: (t[0], t[1]))

    steps: list[RecommendationStep] = []
    state = x.copy()
    flips_at = None
    for _, j, name, target, chunks in per_feature:
        for i, chunk in enumerate(chunks):
            # Land the final chunk exactly on the candidate's value so the
            # fully replayed state equals the verified flipping state.
            state[j] = target if i == len(chunks) - 1 else state[j] + chunk
            p = model.predict_proba(state)
            steps.append(
                RecommendationStep(
                    feature=name,
                    delta=chunk,
                    cumulative_value=float(state[j]),
                    feasibility=badge_feasibility(name, chunk, rules),
                    predicted_probability_after=p,
                )
            )
            if flips_at is None and p < 0.5:
                flips_at = len(steps)
    if flips_at is None:
        raise RuntimeError("replayed steps failed to flip despite a flipping candidate")
    steps = steps[:flips_at]
    note = (
        f"Prediction reaches the healthy class at step {flips_at} of "
        f"{flips_at}; changes are spaced for successive follow-ups."
    )
    return RecommendationPlan(patient=patient, steps=tuple(steps), flips_at_step=flips_at, horizon_note=note)
