import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from millwatch.errors import DimensionError, InsufficientDataError
from millwatch.explain import (
    BIAS, contrast_explanations, fit_surrogate, local_explanation, permutation_importance, to_json,
)
from millwatch.features import FeatureTable
from millwatch.svm import KernelSpec, train_svm, vanilla_hyperparameters
from millwatch.tree import TreeParams, fit_tree


class Threshold:
    """Predicts class 1 when feature ``j`` exceeds ``t``, else class 0."""

    def __init__(self, j, t=0.0):
        self.j, self.t = j, t

    def predict(self, X):
        return (np.asarray(X)[:, self.j] > self.t).astype(int)


class Constant:
    def __init__(self, c):
        self.c = c

    def predict(self, X):
        return np.full(len(X), self.c)


class MeanOf:
    """Thresholds the average of several columns at 0."""

    def __init__(self, cols):
        self.cols = cols

    def predict(self, X):
        return (np.asarray(X)[:, self.cols].mean(axis=1) > 0).astype(int)


def toy_table(rng, n=200, d=3):
    X = rng.normal(size=(n, d))
    return FeatureTable([f"f{i}" for i in range(d)], X, (X[:, 0] > 0).astype(int))


@pytest.fixture(scope="module")
def synthetic_models(prepared):
    train, test = prepared["train"], prepared["test"]
    C, kernel = vanilla_hyperparameters(train.rows)
    vanilla = train_svm(train.rows, train.labels, C, kernel)
    tuned = train_svm(train.rows, train.labels, 300.0, KernelSpec("rbf", gamma=0.5))
    both = FeatureTable(train.feature_names, np.vstack([train.rows, test.rows]),
                        np.concatenate([train.labels, test.labels]))
    return {"vanilla": vanilla, "tuned": tuned, "both": both, "test": test,
            "s_vanilla": fit_surrogate(vanilla, both, classifier_id="vanilla"),
            "s_tuned": fit_surrogate(tuned, both, classifier_id="tuned")}


# --- local explanations -------------------------------------------------------

def test_worked_example_arithmetic():
    # additive identity on a worked local explanation with three-decimal terms
    assert 0.383 + 0.344 + 0.168 + 0.105 == pytest.approx(1.000, abs=1e-9)
    assert 0.168 + (-0.168) == pytest.approx(0.0, abs=1e-9)


def test_additivity_and_bias_on_synthetic_surrogate(synthetic_models, rng):
    bundle = synthetic_models["s_tuned"]
    both = synthetic_models["both"]
    priors = np.bincount(synthetic_models["tuned"].predict(both.rows), minlength=6) / len(both)
    lo, hi = both.rows.min(axis=0), both.rows.max(axis=0)
    for x in rng.uniform(lo, hi, size=(100, both.n_features)):
        e = local_explanation(bundle, x)
        np.testing.assert_allclose(e.bias, priors, atol=1e-12)
        leaf = bundle.tree.predict_proba(x[None, :])[0]
        for c in range(6):
            assert e.total(c) == pytest.approx(leaf[c], abs=1e-9)
            assert sum(w for _, w, _ in e.terms(c)) == pytest.approx(leaf[c], abs=1e-9)


def test_root_only_tree_is_bias_only(rng):
    table = toy_table(rng)
    tree = fit_tree(table.rows, np.zeros(len(table), int), feature_names=table.feature_names)
    e = local_explanation(tree, table.rows[0])
    assert np.all(e.contributions == 0)
    np.testing.assert_allclose(e.bias, tree.priors)
    assert [n for n, _, _ in e.terms(0)] == [BIAS]


def test_single_split_gives_two_terms(rng):
    table = toy_table(rng)
    tree = fit_tree(table.rows, table.labels, TreeParams(max_depth=1), table.feature_names)
    assert tree.n_splits == 1
    x = table.rows[0]
    e = local_explanation(tree, x)
    leaf = tree.predict_proba(x[None, :])[0]
    for c in (0, 1):
        names = [n for n, _, _ in e.terms(c)]
        assert sorted(names) == sorted([BIAS, "f0"])
        assert e.total(c) == pytest.approx(leaf[c], abs=1e-12)


def test_dimension_mismatch(rng):
    table = toy_table(rng)
    tree = fit_tree(table.rows, table.labels, TreeParams(max_depth=2), table.feature_names)
    with pytest.raises(DimensionError):
        local_explanation(tree, np.zeros(5))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), depth=st.integers(1, 6))
def test_additivity_property(seed, depth):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(80, 4))
    y = rng.integers(0, 6, 80)
    tree = fit_tree(X, y, TreeParams(max_depth=depth), [f"f{i}" for i in range(4)])
    x = rng.normal(size=4) * 2
    e = local_explanation(tree, x)
    np.testing.assert_allclose(e.bias, np.bincount(y, minlength=6) / 80, atol=1e-12)
    np.testing.assert_allclose(e.bias + e.contributions.sum(axis=1),
                               tree.predict_proba(x[None, :])[0], atol=1e-9)


def test_render_format(synthetic_models):
    e = local_explanation(synthetic_models["s_tuned"], synthetic_models["test"].rows[0])
    text = e.render([e.predicted])
    assert text.startswith(f"y={e.predicted} (probability ")
    assert "top features" in text and BIAS in text
    assert json.loads(to_json(e))["predicted"] == e.predicted


# --- surrogates ------------------------------------------------------------------

def test_threshold_classifier_reproduced(rng):
    table = toy_table(rng)
    bundle = fit_surrogate(Threshold(1, 0.3), table)
    assert bundle.fidelity == 1.0 and len(bundle.disagreements) == 0
    assert bundle.tree.n_splits == 1 and bundle.tree.feature[0] == 1


def test_constant_classifier_gives_root_only(rng):
    bundle = fit_surrogate(Constant(4), toy_table(rng))
    assert bundle.tree.depth() == 0 and bundle.fidelity == 1.0


def test_surrogate_trained_on_predictions_not_labels(rng):
    table = toy_table(rng)  # labels follow f0
    bundle = fit_surrogate(Threshold(2), table)
    assert bundle.tree.feature[0] == 2


def test_synthetic_fidelity(synthetic_models):
    for key in ("s_vanilla", "s_tuned"):
        b = synthetic_models[key]
        assert 0.9 <= b.fidelity <= 1.0
        both = synthetic_models["both"]
        pred = synthetic_models[key[2:]].predict(both.rows)
        mismatch = np.flatnonzero(b.tree.predict(both.rows) != pred)
        np.testing.assert_array_equal(mismatch, b.disagreements)
        assert b.fidelity == pytest.approx(1 - len(mismatch) / len(both))


# --- contrast view ------------------------------------------------------------------

def test_identical_bundles_flag_nothing(synthetic_models):
    b = synthetic_models["s_tuned"]
    report = contrast_explanations(b, b, synthetic_models["test"].rows[3])
    assert report.n_flagged == 0 and "No contribution sign differences" in report.render()


def test_two_stumps_name_only_their_feature(rng):
    table = toy_table(rng)
    a = fit_surrogate(Threshold(0), table, TreeParams(max_depth=1))
    b = fit_surrogate(Threshold(2), table, TreeParams(max_depth=1))
    report = contrast_explanations(a, b, table.rows[0], ("a", "b"))
    assert {n for n, _, _ in report.first.terms(0)} - {BIAS} == {"f0"}
    assert {n for n, _, _ in report.second.terms(0)} - {BIAS} == {"f2"}
    assert set(report.flipped[0]) == {"f0", "f2"}


def test_disagreement_point_flags_a_feature(synthetic_models):
    test = synthetic_models["test"]
    pv = synthetic_models["vanilla"].predict(test.rows)
    pt = synthetic_models["tuned"].predict(test.rows)
    rows = np.flatnonzero(pv != pt)
    assert len(rows)
    report = contrast_explanations(synthetic_models["s_vanilla"], synthetic_models["s_tuned"],
                                   test.rows[rows[0]], ("vanilla", "tuned"))
    assert report.n_flagged >= 1
    assert "opposite contribution signs" in report.render()


def test_contrast_rejects_different_feature_spaces(rng):
    t1 = toy_table(rng)
    t2 = FeatureTable(["a", "b", "c"], t1.rows, t1.labels)
    with pytest.raises(DimensionError):
        contrast_explanations(fit_surrogate(Threshold(0), t1), fit_surrogate(Threshold(0), t2),
                              t1.rows[0])


# --- permutation importance -----------------------------------------------------------

def test_unused_feature_has_zero_weight(rng):
    table = toy_table(rng)
    report = permutation_importance(Threshold(0), table, n_repeats=5, seed=1)
    assert report.weight_of("f1") == 0.0 and report.weight_of("f2") == 0.0
    assert report.sd_of("f1") == 0.0
    assert report.feature_names[0] == "f0" and report.weight_of("f0") > 0.2
    assert sorted(report.feature_names) == table.feature_names


def test_weights_sorted_and_render(rng):
    report = permutation_importance(Threshold(0), toy_table(rng), n_repeats=3)
    assert np.all(np.diff(report.weights) <= 0)
    lines = report.render().splitlines()
    assert lines[0].startswith("Weight") and " ± " in lines[1]


def test_duplicated_column_splits_weight(rng):
    X = rng.normal(size=(300, 2))
    single = FeatureTable(["a", "noise"], X, (X[:, 0] > 0).astype(int))
    dup = FeatureTable(["a", "a_copy", "noise"], np.column_stack([X[:, 0], X]),
                       single.labels)
    w1 = permutation_importance(MeanOf([0]), single, 10, seed=0).weight_of("a")
    w2 = permutation_importance(MeanOf([0, 1]), dup, 10, seed=0)
    assert w2.weight_of("a") < w1 and w2.weight_of("a_copy") < w1


def test_noise_column_within_two_sd(rng):
    X = rng.normal(size=(300, 2))
    table = FeatureTable(["signal", "noise"], X, (X[:, 0] > 0).astype(int))
    model = train_svm(X, table.labels, 1.0, KernelSpec("rbf", gamma=0.5))
    report = permutation_importance(model, table, n_repeats=10, seed=0)
    assert abs(report.weight_of("noise")) <= 2 * report.sd_of("noise") + 1e-12


def test_permutation_errors(rng):
    table = toy_table(rng)
    with pytest.raises(InsufficientDataError):
        permutation_importance(Threshold(0), table.take([0]))
    with pytest.raises(ValueError):
        permutation_importance(Threshold(0), table, n_repeats=1)


def test_permutation_deterministic(rng):
    table = toy_table(rng)
    a = permutation_importance(MeanOf([0, 1]), table, seed=7)
    b = permutation_importance(MeanOf([0, 1]), table, seed=7)
    assert a.to_dict() == b.to_dict()
