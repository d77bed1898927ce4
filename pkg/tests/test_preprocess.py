import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from millwatch.errors import ConfigError, StratificationError
from millwatch.features import FeatureTable
from millwatch.preprocess import (correlation_matrix, fit_scaler, prune_correlated, rfecv, split,
                                  split_indices, standardize, stratified_kfold)
from millwatch.tree import TreeParams

SELECTED_13 = ["mean", "sd", "variance", "kurtosis", "sum", "skewness", "max", "min", "range", "rms",
            "shape_factor", "k_factor", "std_error"]
RETAINED_10 = ["mean", "sd", "kurtosis", "sum", "skewness", "max", "min", "range", "rms",
            "shape_factor"]


def _table(columns, labels):
    names = list(columns)
    return FeatureTable(names, np.column_stack([columns[n] for n in names]), labels)


def correlated_table(rng, n=300):
    """13 columns mimicking the reported correlation structure: variance is
    SD squared, k-factor and std error track shape factor, everything else
    is independent."""
    cols = {name: rng.normal(size=n) for name in SELECTED_13}
    cols["sd"] = rng.uniform(1, 2, n)
    cols["variance"] = cols["sd"] ** 2
    cols["k_factor"] = cols["shape_factor"] + 0.05 * rng.normal(size=n)
    cols["std_error"] = cols["shape_factor"] + 0.05 * rng.normal(size=n)
    return _table(cols, np.arange(n) % 6)


def test_thirteen_to_ten(rng):
    table = correlated_table(rng)
    pruned, dropped = prune_correlated(table, 0.9)
    assert pruned.feature_names == RETAINED_10
    assert sorted(dropped) == ["k_factor", "std_error", "variance"]


def test_independent_columns_kept(rng):
    t = _table({"a": rng.normal(size=1000), "b": rng.normal(size=1000)}, np.arange(1000) % 6)
    pruned, dropped = prune_correlated(t, 0.9)
    assert dropped == [] and pruned.feature_names == ["a", "b"]


@pytest.mark.parametrize("threshold", [0.5, 0.9, 1.0])
def test_exact_duplicate_dropped(rng, threshold):
    a = rng.normal(size=60)
    t = _table({"rms": a, "zz_copy": a.copy()}, np.arange(60) % 6)
    pruned, dropped = prune_correlated(t, threshold)
    assert pruned.feature_names == ["rms"] and dropped == ["zz_copy"]


def test_variance_dropped_whenever_sd_present(rng):
    t = _table({"sd": rng.normal(size=60), "variance": rng.normal(size=60)}, np.arange(60) % 6)
    assert prune_correlated(t, 0.99)[1] == ["variance"]


def test_bad_threshold(rng):
    with pytest.raises(ConfigError):
        prune_correlated(correlated_table(rng), 0.0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), threshold=st.floats(0.3, 1.0))
def test_prune_idempotent_and_below_threshold(seed, threshold):
    rng = np.random.default_rng(seed)
    base = rng.normal(size=(80, 3))
    mix = base @ rng.normal(size=(3, 6)) + 0.3 * rng.normal(size=(80, 6))
    t = FeatureTable([f"f{i}" for i in range(6)], mix, np.arange(80) % 6)
    pruned, _ = prune_correlated(t, threshold)
    r = correlation_matrix(pruned)
    assert np.all(r[~np.eye(len(r), dtype=bool)] <= threshold)
    assert prune_correlated(pruned, threshold)[1] == []


def test_correlation_matrix_properties(feature_table):
    r = correlation_matrix(feature_table)
    assert np.allclose(r, r.T) and np.all(np.diag(r) == 1)
    assert np.all(np.abs(r) <= 1)


def test_standardize_column_example():
    t = FeatureTable(["a"], [[1.0], [2.0], [3.0]], [0, 1, 2])
    (scaled,), params = standardize(t)
    np.testing.assert_allclose(scaled.rows[:, 0], [-1, 0, 1])
    assert params.sd[0] == 1.0


def test_standardize_moments_and_no_leakage(prepared):
    train, test = prepared["train"], prepared["test"]
    np.testing.assert_allclose(train.rows.mean(axis=0), 0, atol=1e-10)
    np.testing.assert_allclose(train.rows.std(axis=0, ddof=1), 1, atol=1e-10)
    assert not np.allclose(test.rows.mean(axis=0), 0, atol=1e-10)


def test_zero_sd_column_named():
    t = FeatureTable(["ok", "flat"], [[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]], [0, 1, 2])
    with pytest.raises(ValueError, match="flat"):
        fit_scaler(t)


def test_split_250_50(feature_table):
    train, test = split(feature_table, 1 / 6, seed=0)
    assert (len(train), len(test)) == (250, 50)
    counts = np.bincount(test.labels, minlength=6)
    assert counts.min() >= 8 and counts.max() <= 9


def test_split_half_on_tiny():
    labels = np.repeat(np.arange(6), 2)
    tr, te = split_indices(labels, 0.5, seed=3)
    assert np.bincount(labels[tr]).tolist() == [1] * 6 == np.bincount(labels[te]).tolist()


def test_split_deterministic_and_disjoint(feature_table):
    a = split_indices(feature_table.labels, 1 / 6, seed=9)
    b = split_indices(feature_table.labels, 1 / 6, seed=9)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not set(a[0]) & set(a[1]) and len(a[0]) + len(a[1]) == 300


def test_split_empty_stratum_error():
    with pytest.raises(StratificationError):
        split_indices(np.array([0, 0, 0, 1]), 0.3)
    with pytest.raises(ConfigError):
        split_indices(np.arange(12) % 6, 1.0)


@settings(max_examples=30, deadline=None)
@given(counts=st.lists(st.integers(10, 30), min_size=2, max_size=6), k=st.integers(2, 10),
       seed=st.integers(0, 1000))
def test_stratified_folds_balanced(counts, k, seed):
    labels = np.repeat(np.arange(len(counts)), counts)
    folds = stratified_kfold(labels, k, seed)
    sizes = np.bincount(folds, minlength=k)
    assert sizes.max() - sizes.min() <= 1
    for c in range(len(counts)):
        per = np.bincount(folds[labels == c], minlength=k)
        assert per.max() - per.min() <= 1


def test_kfold_too_few_samples():
    with pytest.raises(StratificationError):
        stratified_kfold(np.repeat(np.arange(6), 5), 10)


def _signal_plus_noise(rng, n=300, n_noise=4):
    y = np.arange(n) % 6
    informative = y + 0.1 * rng.random(n)
    cols = {"signal": informative}
    for i in range(n_noise):
        cols[f"noise{i}"] = rng.normal(size=n)
    return _table(cols, y)


def test_rfecv_keeps_informative_feature(rng):
    t = _signal_plus_noise(rng)
    rep = rfecv(t, TreeParams(seed=0), 10, 0)
    assert "signal" in rep.selected
    assert rep.cv_score_by_subset_size[1] >= rep.cv_score_by_subset_size[5] - 0.02
    assert sorted(rep.cv_score_by_subset_size) == [1, 2, 3, 4, 5]
    assert rep.ranking[-1] == "signal" and sorted(rep.ranking) == sorted(t.feature_names)


def test_rfecv_duplicate_pair(rng):
    t = _signal_plus_noise(rng, n_noise=0)
    t = FeatureTable(["a", "b"], np.column_stack([t.rows[:, 0], t.rows[:, 0]]), t.labels)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = rfecv(t, TreeParams(seed=0), 10, 0)
    assert len(rep.ranking) == 2
    assert abs(rep.cv_score_by_subset_size[1] - rep.cv_score_by_subset_size[2]) <= 0.02


def test_rfecv_stratification_error():
    t = FeatureTable(["a", "b"], np.random.default_rng(0).normal(size=(30, 2)),
                     np.repeat(np.arange(6), 5))
    with pytest.raises(StratificationError):
        rfecv(t, k_folds=10)


def test_rfecv_best_size_tie_goes_smaller(prepared):
    rep = prepared["report"]
    best = max(rep.cv_score_by_subset_size.values())
    smallest = min(s for s, v in rep.cv_score_by_subset_size.items() if v == best)
    assert len(rep.selected) == smallest
