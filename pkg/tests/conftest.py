import warnings

import numpy as np
import pytest

from millwatch.features import build_feature_table
from millwatch.preprocess import prune_correlated, rfecv, split, standardize
from millwatch.signals import GeneratorConfig, generate_synthetic_dataset


@pytest.fixture(scope="session")
def default_dataset():
    return generate_synthetic_dataset(GeneratorConfig())


@pytest.fixture(scope="session")
def feature_table(default_dataset):
    return build_feature_table(default_dataset)


@pytest.fixture(scope="session")
def prepared(feature_table):
    """RFECV -> pruning -> 250/50 split -> standardization, seed 0."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        report = rfecv(feature_table, seed=0)
    pruned, dropped = prune_correlated(feature_table.select(report.selected))
    train, test = split(pruned, 50 / 300, seed=0)
    (train_s, test_s), scaler = standardize(train, test)
    return {"report": report, "pruned": pruned, "dropped": dropped, "train_raw": train,
            "train": train_s, "test": test_s, "scaler": scaler}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# -- acceptance summary ------------------------------------------------------

_CRITERIA = {}


@pytest.fixture
def record_criterion():
    """``record(n, ok, detail)`` stores one acceptance verdict for the summary."""
    def record(n, ok, detail=""):
        _CRITERIA[n] = (bool(ok), detail)
        print(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
