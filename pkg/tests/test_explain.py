from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riskscope.data import Dataset
from riskscope.explain import (
    CandidateSpec,
    DegenerateDesignError,
    ExplainerSelectionError,
    FeatureMask,
    PerturbationConfig,
    SelectionConfig,
    default_background,
    default_candidates,
    explain_kernel_shap,
    explain_lime,
    faithfulness,
    fudge_score,
    jaccard_rankings,
    ranking,
    select_explainer,
    top_k_mask,
)

from helpers import LinearProbModel, make_schema

phi_arrays = st.lists(
    st.floats(-10.0, 10.0, allow_nan=False, width=64), min_size=2, max_size=8
).map(np.array)


def test_zero_mask_scores_zero():
    model = LinearProbModel(np.ones(3))
    score = fudge_score(model, np.zeros(3), FeatureMask((0, 0, 0)), PerturbationConfig(seed=1))
    assert score == 0.0


def test_fudge_grows_with_slope():
    cfg = PerturbationConfig(seed=3, n_samples=2000)
    x = np.zeros(2)
    m = FeatureMask((1, 0))
    small = fudge_score(LinearProbModel([0.2, 0.0], scale=1.0), x, m, cfg)
    large = fudge_score(LinearProbModel([0.8, 0.0], scale=1.0), x, m, cfg)
    assert large > small > 0.0


def test_fudge_scales_map_noise_to_raw_units():
    cfg = PerturbationConfig(seed=4, n_samples=4000)
    x = np.zeros(2)
    m = FeatureMask((1, 0))
    base = fudge_score(LinearProbModel([1.0, 0.0], scale=0.1), x, m, cfg)
    doubled = fudge_score(LinearProbModel([1.0, 0.0], scale=0.1), x, m, cfg, scales=np.array([2.0, 1.0]))
    assert doubled == pytest.approx(2.0 * base, rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(phi=phi_arrays)
def test_top_k_masks_are_nested(phi):
    prev = set()
    for k in range(1, phi.size + 1):
        cur = {i for i, v in enumerate(top_k_mask(phi, k).m) if v}
        assert len(cur) == k
        assert prev <= cur
        prev = cur


@settings(max_examples=60, deadline=None)
@given(phi=phi_arrays, c=st.floats(0.001, 1000.0))
def test_ranking_is_scale_invariant(phi, c):
    assert np.array_equal(ranking(phi), ranking(c * phi))


def test_ranking_breaks_ties_by_index():
    assert list(ranking(np.array([0.5, 0.5, 0.1]))) == [1, 2, 3]


def test_faithfulness_sums_its_curve():
    model = LinearProbModel([0.6, 0.3, 0.1])
    total, curve = faithfulness(model, np.zeros(3), np.array([3.0, 2.0, 1.0]), 3, PerturbationConfig(seed=5))
    assert total == pytest.approx(sum(curve))
    assert len(curve) == 3
    assert all(c >= 0.0 for c in curve)


def test_jaccard_rankings():
    a, b = np.array([3.0, 2.0, 1.0, 0.1]), np.array([3.0, 2.0, 0.1, 1.0])
    assert jaccard_rankings(a, a, 2) == 1.0
    assert jaccard_rankings(a, b, 2) == 1.0
    assert jaccard_rankings(a, b, 3) == pytest.approx(2.0 / 4.0)


def test_lime_recovers_linear_slopes():
    rng = np.random.default_rng(0)
    X = rng.normal(0.0, 1.0, size=(300, 4))
    ds = Dataset.from_arrays(make_schema(4), X)
    w = np.array([0.08, -0.05, 0.02, 0.0])
    model = LinearProbModel(w, scale=1.0)
    att = explain_lime(model, ds, X[0], kernel_width=0.75, n_samples=2000, seed=1, target=0)
    # Slopes live in standardized units: w_std = w * std.
    assert np.allclose(np.array(att.phi), w * ds.stds, atol=5e-3)
    assert att.method_id == "lime_w0.75"


def test_lime_degenerate_design_raises():
    X = np.random.default_rng(1).normal(size=(50, 4))
    ds = Dataset.from_arrays(make_schema(4), X)
    with pytest.raises(DegenerateDesignError):
        explain_lime(LinearProbModel(np.ones(4)), ds, X[0], kernel_width=0.5, n_samples=3, seed=0, target=0)


def test_kernel_shap_local_accuracy(dataset, model):
    bg = default_background(dataset, size=16, seed=0)
    x = dataset.matrix[39]
    att = explain_kernel_shap(model, x, bg, target=39)
    lhs = sum(att.phi) + att.base_value
    assert lhs == pytest.approx(model.predict_proba(x), abs=1e-10)


def test_kernel_shap_symmetry():
    class SymmetricModel:
        def predict_proba_batch(self, X):
            X = np.asarray(X, dtype=np.float64)
            return np.clip(0.5 + 0.1 * (X[:, 0] + X[:, 1]), 0.0, 1.0)

    bg = np.zeros((1, 3))
    att = explain_kernel_shap(SymmetricModel(), np.array([1.0, 1.0, 5.0]), bg)
    assert att.phi[0] == pytest.approx(att.phi[1], abs=1e-12)
    assert att.phi[2] == pytest.approx(0.0, abs=1e-12)


def test_kernel_shap_rejects_empty_background():
    with pytest.raises(ValueError, match="background"):
        explain_kernel_shap(LinearProbModel(np.ones(2)), np.zeros(2), np.zeros((0, 2)))


def test_default_candidates_cover_both_families():
    cands = default_candidates()
    kinds = {c.kind for c in cands}
    assert kinds == {"lime", "kernel_shap"}
    widths = sorted(c.param("kernel_width") for c in cands if c.kind == "lime")
    assert widths == [0.25, 0.5, 0.75, 1.0]


def test_selection_reports_candidate_failures(dataset, model):
    cands = default_candidates() + (CandidateSpec("broken", "no_such_kind", ()),)
    report = select_explainer(
        model,
        dataset,
        dataset.matrix[39],
        SelectionConfig(K=4, candidates=cands),
        PerturbationConfig(seed=2, n_samples=200),
        target=39,
    )
    assert [f[0] for f in report.failures] == ["broken"]
    assert report.selected in {c.method_id for c in default_candidates()}


def test_selection_with_no_working_candidate_raises(dataset, model):
    cands = (CandidateSpec("broken", "no_such_kind", ()),)
    with pytest.raises(ExplainerSelectionError):
        select_explainer(
            model,
            dataset,
            dataset.matrix[0],
            SelectionConfig(K=4, candidates=cands),
            PerturbationConfig(seed=2, n_samples=100),
        )


def test_selection_tie_falls_back_to_registration_order(dataset, model):
    twin = (
        CandidateSpec("lime_w0.50", "lime", (("kernel_width", 0.5),)),
        CandidateSpec("lime_twin", "lime", (("kernel_width", 0.5),)),
    )
    report = select_explainer(
        model,
        dataset,
        dataset.matrix[10],
        SelectionConfig(K=4, candidates=twin),
        PerturbationConfig(seed=3, n_samples=200),
        target=10,
    )
    assert report.tiebreak_used
    assert report.selected == "lime_w0.50"


def test_selection_is_deterministic(dataset, model):
    kwargs = dict(
        sel=SelectionConfig(K=4),
        cfg=PerturbationConfig(seed=11, n_samples=300),
        target=39,
    )
    a = select_explainer(model, dataset, dataset.matrix[39], **kwargs)
    b = select_explainer(model, dataset, dataset.matrix[39], **kwargs)
    assert a.to_dict() == b.to_dict()
