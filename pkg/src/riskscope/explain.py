"""Post-hoc attribution and faithfulness-based explainer selection.

Two explainer families ship: a locally weighted linear surrogate fit to
perturbed predictions (four kernel widths) and exact Shapley values via
full coalition enumeration, tractable at d=8. Candidates are scored by how
much the prediction moves when only their top-ranked features are
perturbed, and the highest scorer explains the patient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .data import Dataset


class ProbabilityModel(Protocol):
    def predict_proba_batch(self, X: np.ndarray) -> np.ndarray: ...


class DegenerateDesignError(RuntimeError):
    """Surrogate design matrix is rank-deficient; refusing to fit."""


class ExplainerSelectionError(RuntimeError):
    """Every candidate explainer failed."""


@dataclass(frozen=True)
class Attribution:
    phi: tuple[float, ...]
    method_id: str
    target: int | None = None
    base_value: float | None = None  # set by the Shapley explainer

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in self.phi):
            raise ValueError("attribution contains non-finite values")


@dataclass(frozen=True)
class FeatureMask:
    m: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(v not in (0, 1) for v in self.m):
            raise ValueError("mask entries must be 0 or 1")

    def as_array(self) -> np.ndarray:
        return np.array(self.m, dtype=np.float64)


@dataclass(frozen=True)
class PerturbationConfig:
    sigma: float = 0.05
    n_samples: int = 1000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")


@dataclass(frozen=True)
class CandidateSpec:
    method_id: str
    kind: str  # "lime" | "kernel_shap"
    params: tuple[tuple[str, float], ...] = ()

    def param(self, name: str, default=None):
        for k, v in self.params:
            if k == name:
                return v
        return default


def default_candidates() -> tuple[CandidateSpec, ...]:
    limes = tuple(
        CandidateSpec(f"lime_w{w:.2f}", "lime", (("kernel_width", w),))
        for w in (0.25, 0.50, 0.75, 1.0)
    )
    return limes + (CandidateSpec("kernel_shap", "kernel_shap"),)


@dataclass(frozen=True)
class SelectionConfig:
    K: int
    delta: float = 0.01
    candidates: tuple[CandidateSpec, ...] = field(default_factory=default_candidates)

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ValueError("K must be at least 1")
        if self.delta < 0:
            raise ValueError("delta must be non-negative")
        if not self.candidates:
            raise ValueError("need at least one candidate explainer")


def fudge_score(
    model: ProbabilityModel,
    x: np.ndarray,
    mask: FeatureMask,
    cfg: PerturbationConfig,
    scales: np.ndarray | None = None,
) -> float:
    """Mean |f(x) - f(x + eps*m)| under N(0, sigma^2) noise on masked features.

    Noise is drawn in standardized units; `scales` maps it back to raw
    feature units before the model is called (defaults to unit scales).
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    m = mask.as_array()
    if m.size != x.size:
        raise ValueError(f"mask length {m.size} does not match d={x.size}")
    if not m.any():
        return 0.0
    scales = np.ones_like(x) if scales is None else np.asarray(scales, dtype=np.float64)
    rng = np.random.default_rng(cfg.seed)
    eps = rng.normal(0.0, cfg.sigma, size=(cfg.n_samples, x.size))
    X_pert = x + eps * m * scales
    f_x = model.predict_proba_batch(x.reshape(1, -1))[0]
    f_pert = model.predict_proba_batch(X_pert)
    return float(np.abs(f_x - f_pert).mean())


def top_k_mask(phi: Attribution | np.ndarray, k: int) -> FeatureMask:
    """Mask of the k largest-magnitude attributions, ties to the lowest index."""
    vals = np.abs(np.asarray(phi.phi if isinstance(phi, Attribution) else phi, dtype=np.float64))
    if not 1 <= k <= vals.size:
        raise ValueError(f"k={k} out of range 1..{vals.size}")
    order = np.argsort(-vals, kind="stable")
    m = np.zeros(vals.size, dtype=int)
    m[order[:k]] = 1
    return FeatureMask(tuple(int(v) for v in m))


def ranking(phi: Attribution | np.ndarray) -> np.ndarray:
    """Rank positions 1..d by descending |phi|, ties to the lowest index."""
    vals = np.abs(np.asarray(phi.phi if isinstance(phi, Attribution) else phi, dtype=np.float64))
    order = np.argsort(-vals, kind="stable")
    ranks = np.empty(vals.size, dtype=np.int64)
    ranks[order] = np.arange(1, vals.size + 1)
    return ranks


def faithfulness(
    model: ProbabilityModel,
    x: np.ndarray,
    phi: Attribution | np.ndarray,
    K: int,
    cfg: PerturbationConfig,
    scales: np.ndarray | None = None,
) -> tuple[float, list[float]]:
    """Sum of fudge scores over the top-k masks for k = 1..K."""
    curve = [fudge_score(model, x, top_k_mask(phi, k), cfg, scales) for k in range(1, K + 1)]
    return float(sum(curve)), curve


def jaccard_rankings(phi_a, phi_b, K: int) -> float:
    a = {i for i, v in enumerate(top_k_mask(phi_a, K).m) if v}
    b = {i for i, v in enumerate(top_k_mask(phi_b, K).m) if v}
    return len(a & b) / len(a | b)


def explain_lime(
    model: ProbabilityModel,
    dataset: Dataset,
    x: np.ndarray,
    kernel_width: float,
    n_samples: int = 1000,
    seed: int = 0,
    target: int | None = None,
) -> Attribution:
    """Weighted ridge surrogate over Gaussian perturbations around x.

    Sampling, distances, and the returned coefficients all live in
    standardized feature space; predictions are taken on the
    de-standardized samples.
    """
    if kernel_width <= 0:
        raise ValueError("kernel_width must be positive")
    x = np.asarray(x, dtype=np.float64).ravel()
    d = x.size
    rng = np.random.default_rng(seed)
    z0 = dataset.standardize(x.reshape(1, -1))[0]
    Z = z0 + rng.standard_normal((n_samples, d))
    y = model.predict_proba_batch(dataset.destandardize(Z))
    dist2 = ((Z - z0) ** 2).sum(axis=1)
    w = np.exp(-dist2 / kernel_width**2)

    sw = np.sqrt(w)
    A = np.column_stack([Z, np.ones(n_samples)])
    Aw = A * sw[:, None]
    sv = np.linalg.svd(Aw, compute_uv=False)
    tol = max(A.shape) * np.finfo(np.float64).eps * (sv[0] if sv.size else 0.0)
    rank = int((sv > tol).sum())
    if rank < d + 1:
        raise DegenerateDesignError("perturbation design is rank-deficient; cannot fit surrogate")
    # Ridge on the slopes only; the intercept stays unpenalized.
    reg = np.diag([1e-6] * d + [0.0])
    beta = np.linalg.solve(Aw.T @ Aw + reg, Aw.T @ (y * sw))
    return Attribution(tuple(float(b) for b in beta[:d]), f"lime_w{kernel_width:.2f}", target)


def default_background(dataset: Dataset, size: int = 100, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    n = len(dataset)
    idx = rng.choice(n, size=min(size, n), replace=False)
    return dataset.matrix[np.sort(idx)]


def explain_kernel_shap(
    model: ProbabilityModel,
    x: np.ndarray,
    background: np.ndarray,
    target: int | None = None,
) -> Attribution:
    """Exact Shapley values of the probability output.

    All 2^d coalitions are enumerated and valued as the mean prediction
    over background compositions, then combined with the closed-form
    subset weights. Local accuracy holds by telescoping: sum(phi) equals
    f(x) minus the base value.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    background = np.asarray(background, dtype=np.float64)
    if background.ndim != 2 or background.shape[0] == 0:
        raise ValueError("background must be a non-empty (n, d) matrix")
    d = x.size
    n_coal = 1 << d
    B = background.shape[0]

    # One batched predict over every coalition/background composition.
    masks = (np.arange(n_coal)[:, None] >> np.arange(d)[None, :]) & 1
    big = np.where(masks[:, None, :].astype(bool), x[None, None, :], background[None, :, :])
    v = model.predict_proba_batch(big.reshape(n_coal * B, d)).reshape(n_coal, B).mean(axis=1)

    fact = [math.factorial(i) for i in range(d + 1)]
    weight = [fact[s] * fact[d - 1 - s] / fact[d] for s in range(d)]
    popcount = np.array([bin(mask).count("1") for mask in range(n_coal)])
    phi = np.zeros(d)
    for i in range(d):
        bit = 1 << i
        without = np.nonzero((np.arange(n_coal) & bit) == 0)[0]
        w = np.array([weight[s] for s in popcount[without]])
        phi[i] = float((w * (v[without | bit] - v[without])).sum())
    return Attribution(tuple(float(p) for p in phi), "kernel_shap", target, base_value=float(v[0]))


@dataclass(frozen=True)
class CandidateResult:
    method_id: str
    score: float
    curve: tuple[float, ...]
    phi: tuple[float, ...]


@dataclass(frozen=True)
class FaithfulnessReport:
    candidates: tuple[CandidateResult, ...]
    selected: str
    tiebreak_used: bool
    K: int
    perturbation: PerturbationConfig
    failures: tuple[tuple[str, str], ...] = ()

    @property
    def selected_result(self) -> CandidateResult:
        for c in self.candidates:
            if c.method_id == self.selected:
                return c
        raise KeyError(self.selected)

    def to_dict(self) -> dict:
        return {
            "selected": self.selected,
            "tiebreak_used": self.tiebreak_used,
            "K": self.K,
            "perturbation": {
                "sigma": self.perturbation.sigma,
                "n_samples": self.perturbation.n_samples,
                "seed": self.perturbation.seed,
            },
            "candidates": [
                {
                    "method_id": c.method_id,
                    "faithfulness": c.score,
                    "fudge_curve": list(c.curve),
                    "phi": list(c.phi),
                }
                for c in self.candidates
            ],
            "failures": [{"method_id": m, "error": e} for m, e in self.failures],
        }


def _run_candidate(
    spec: CandidateSpec,
    model: ProbabilityModel,
    dataset: Dataset,
    x: np.ndarray,
    seed: int,
    target: int | None,
) -> Attribution:
    if spec.kind == "lime":
        return explain_lime(
            model,
            dataset,
            x,
            kernel_width=float(spec.param("kernel_width", 0.75)),
            n_samples=int(spec.param("n_samples", 1000)),
            seed=seed,
            target=target,
        )
    if spec.kind == "kernel_shap":
        bg = default_background(dataset, int(spec.param("background_size", 100)), seed)
        return explain_kernel_shap(model, x, bg, target)
    raise ValueError(f"unknown explainer kind {spec.kind!r}")


def select_explainer(
    model: ProbabilityModel,
    dataset: Dataset,
    x: np.ndarray,
    sel: SelectionConfig,
    cfg: PerturbationConfig,
    target: int | None = None,
) -> FaithfulnessReport:
    """Score every candidate and keep the most faithful one.

    Scores within `delta` of the best trigger the tiebreak: each tied
    candidate's top-K set is compared (Jaccard) against the consensus
    top-K derived from mean feature ranks across all candidates, and
    remaining ties fall back to registration order.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    scales = dataset.stds
    results: list[CandidateResult] = []
    attributions: dict[str, Attribution] = {}
    failures: list[tuple[str, str]] = []
    for spec in sel.candidates:
        try:
            attr = _run_candidate(spec, model, dataset, x, cfg.seed, target)
            score, curve = faithfulness(model, x, attr, sel.K, cfg, scales)
        except Exception as exc:  # noqa: BLE001 - aggregated per contract
            failures.append((spec.method_id, f"{type(exc).__name__}: {exc}"))
            continue
        attributions[spec.method_id] = attr
        results.append(CandidateResult(spec.method_id, score, tuple(curve), attr.phi))
    if not results:
        detail = "; ".join(f"{m}: {e}" for m, e in failures)
        raise ExplainerSelectionError(f"all candidate explainers failed ({detail})")

    best_score = max(r.score for r in results)
    tied = [r for r in results if best_score - r.score < sel.delta]
    tiebreak_used = len(tied) > 1
    if not tiebreak_used:
        winner = tied[0]
    else:
        mean_rank = np.mean([ranking(np.array(r.phi)) for r in results], axis=0)
        # Flip ranks into importances so top_k_mask keeps the smallest mean ranks.
        consensus = (x.size + 1.0) - mean_rank
        winner = tied[0]
        best_jac = jaccard_rankings(np.array(winner.phi), consensus, sel.K)
        for r in tied[1:]:
            jac = jaccard_rankings(np.array(r.phi), consensus, sel.K)
            if jac > best_jac:
                winner, best_jac = r, jac
    return FaithfulnessReport(
        candidates=tuple(results),
        selected=winner.method_id,
        tiebreak_used=tiebreak_used,
        K=sel.K,
        perturbation=cfg,
        failures=tuple(failures),
    )
