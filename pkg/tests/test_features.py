import warnings

import numpy as np
import pytest
from hypothesis import example, given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats

from millwatch.errors import InsufficientDataError, ParseError
from millwatch.features import (FEATURE_NAMES, DegenerateFeatureWarning, FeatureTable,
                                build_feature_table, compute_features, extract_features,
                                histogram_mode)
from millwatch.signals import RawDataset, SignalSample


def test_seventeen_names():
    assert len(FEATURE_NAMES) == 17 == len(set(FEATURE_NAMES))


def test_four_point_values():
    v, notes = compute_features([1, 2, 3, 4])
    assert notes == []
    assert v["mean"] == pytest.approx(2.5, abs=1e-12)
    assert v["sd"] == pytest.approx(1.2909944, abs=1e-7)
    assert v["variance"] == pytest.approx(1.6666667, abs=1e-7)
    assert v["sum"] == 10 and v["range"] == 3
    assert v["rms"] == pytest.approx(2.7386128, abs=1e-7)
    assert v["std_error"] == pytest.approx(0.6454972, abs=1e-7)


def test_moments_against_scipy(rng):
    x = rng.gamma(2.0, size=500)
    v, _ = compute_features(x)
    assert v["kurtosis"] == pytest.approx(stats.kurtosis(x, fisher=False, bias=True), rel=1e-10)
    assert v["skewness"] == pytest.approx(stats.skew(x, bias=True), rel=1e-10)
    assert v["median"] == np.median(x)


def test_constant_signal_flags_degenerate_moments():
    with pytest.warns(DegenerateFeatureWarning):
        fv = extract_features(SignalSample(2, np.full(50, -3.0)))
    v = fv.values
    assert v["mean"] == -3 and v["sd"] == 0 and v["variance"] == 0 and v["range"] == 0
    assert v["rms"] == 3 and v["mode"] == -3
    assert v["kurtosis"] == 0 and v["skewness"] == 0
    assert fv.warnings


def test_alternating_signal():
    x = np.tile([-1.0, 1.0], 1024)
    v, _ = compute_features(x)
    assert v["mean"] == 0 and v["rms"] == 1 and v["shape_factor"] == 1
    assert v["max"] == 1 and v["min"] == -1
    assert v["crest_factor"] == 1 and v["impulse_factor"] == 1


def test_all_zero_signal_is_finite():
    v, notes = compute_features(np.zeros(10))
    assert all(np.isfinite(list(v.values())))
    assert notes


def test_too_short():
    with pytest.raises(InsufficientDataError):
        compute_features([1.0])


def test_histogram_mode_ties_go_to_lowest_bin():
    # two equally dense clusters: lowest bin wins
    x = np.array([0.0, 0.0, 10.0, 10.0])
    assert histogram_mode(x, bins=4) == pytest.approx(1.25)


SCALED = ("mean", "median", "sd", "max", "min", "range", "rms", "sum", "std_error")
INVARIANT = ("shape_factor", "crest_factor", "impulse_factor", "skewness", "kurtosis")

signals = arrays(np.float64, st.integers(8, 64),
                 elements=st.floats(-100, 100, allow_nan=False)).filter(lambda a: a.std() > 1e-3)


@settings(max_examples=60, deadline=None)
@given(x=signals, k=st.floats(0.01, 100))
def test_scale_equivariance(x, k):
    a, _ = compute_features(x)
    b, _ = compute_features(k * x)
    for name in SCALED:
        assert b[name] == pytest.approx(k * a[name], rel=1e-9, abs=1e-9 * k * np.abs(x).max())
    assert b["variance"] == pytest.approx(k * k * a["variance"], rel=1e-9)
    for name in INVARIANT:
        assert b[name] == pytest.approx(a[name], rel=1e-7, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(x=arrays(np.float64, st.integers(2, 64), elements=st.floats(-1e3, 1e3, allow_nan=False)))
@example(x=np.array([1.43501611e-87, 0.0]))
def test_identities_and_finiteness(x):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        v, _ = compute_features(x)
    assert all(np.isfinite(list(v.values())))
    assert v["variance"] == pytest.approx(v["sd"] ** 2, rel=1e-12, abs=0)
    assert v["range"] == v["max"] - v["min"]
    assert v["std_error"] == pytest.approx(v["sd"] / np.sqrt(len(x)), rel=1e-12, abs=0)


def test_table_shape_and_order(default_dataset, feature_table):
    assert feature_table.rows.shape == (300, 17)
    assert feature_table.feature_names == list(FEATURE_NAMES)
    perm = np.random.default_rng(0).permutation(len(default_dataset))
    shuffled = RawDataset(default_dataset.signals[perm], default_dataset.labels[perm])
    np.testing.assert_array_equal(build_feature_table(shuffled).rows, feature_table.rows[perm])


def test_empty_dataset():
    with pytest.raises(InsufficientDataError):
        build_feature_table(RawDataset(np.empty((0, 10)), []))


def test_table_rejects_nan_and_bad_labels():
    with pytest.raises(ValueError):
        FeatureTable(["a"], [[np.nan]], [0])
    with pytest.raises(ValueError):
        FeatureTable(["a"], [[1.0]], [6])


def test_csv_round_trip(tmp_path, feature_table):
    p = tmp_path / "f.csv"
    feature_table.to_csv(p)
    assert p.read_text().splitlines()[0] == ",".join(FEATURE_NAMES) + ",label"
    back = FeatureTable.from_csv(p)
    np.testing.assert_array_equal(back.rows, feature_table.rows)
    np.testing.assert_array_equal(back.labels, feature_table.labels)


def test_csv_bad_header(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ParseError):
        FeatureTable.from_csv(p)
