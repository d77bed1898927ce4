"""
Feature selection and scaling: RFECV with a tree estimator, correlation
pruning, z-score standardization and stratified splitting.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InsufficientDataError, StratificationError
from .tree import TreeParams, feature_importances, fit_tree

# Keep-priority for correlation pruning: these first, in order, then everything
# else alphabetically.
KEEP_PRIORITY = ("mean", "sd", "kurtosis", "sum", "skewness", "max", "min", "range", "rms",
                 "shape_factor")
CORRELATION_THRESHOLD = 0.9


def stratified_kfold(labels, k, seed=0):
    """Fold id per row. Each class is shuffled, then classes are laid end to
    end and dealt round-robin, so fold sizes differ by at most one and every
    class is spread as evenly as possible."""
    labels = np.asarray(labels, dtype=int)
    if k < 2:
        raise ConfigError("k must be >= 2")
    classes, counts = np.unique(labels, return_counts=True)
    if counts.min() < k:
        raise StratificationError(
            f"class {classes[np.argmin(counts)]} has {counts.min()} samples, fewer than k={k}")
    rng = np.random.default_rng(seed)
    order = np.concatenate([rng.permutation(np.flatnonzero(labels == c)) for c in classes])
    folds = np.empty(len(labels), dtype=int)
    folds[order] = np.arange(len(order)) % k
    return folds


def split_indices(labels, test_fraction, seed=0):
    """Stratified train/test row indices.

    The test size is ``round(n * test_fraction)``, shared across classes by
    largest remainder; remainder ties are broken by a seeded shuffle.
    """
    labels = np.asarray(labels, dtype=int)
    if not 0 < test_fraction < 1:
        raise ConfigError("test_fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    classes, counts = np.unique(labels, return_counts=True)
    n_test = int(round(len(labels) * test_fraction))
    quota = counts * test_fraction
    alloc = np.floor(quota).astype(int)
    remainder = quota - alloc
    tiebreak = rng.permutation(len(classes))
    # sort by remainder descending, then by the random tiebreak
    order = np.lexsort((tiebreak, -remainder))
    for c in order[: max(n_test - alloc.sum(), 0)]:
        alloc[c] += 1
    if np.any(alloc == 0) or np.any(alloc == counts):
        raise StratificationError("test fraction leaves a class without train or test samples")
    train, test = [], []
    for c, n_c in zip(classes, alloc):
        idx = rng.permutation(np.flatnonzero(labels == c))
        test.append(idx[:n_c])
        train.append(idx[n_c:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def split(table, test_fraction, seed=0):
    train, test = split_indices(table.labels, test_fraction, seed)
    return table.take(train), table.take(test)


@dataclass
class ScalerParams:
    feature_names: list
    mean: np.ndarray
    sd: np.ndarray

    def transform(self, table):
        if list(table.feature_names) != list(self.feature_names):
            raise ConfigError("feature names differ from the fitted scaler")
        return table.with_rows((table.rows - self.mean) / self.sd)

    def to_dict(self):
        return {"feature_names": list(self.feature_names), "mean": self.mean.tolist(),
                "sd": self.sd.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["feature_names"], np.array(d["mean"]), np.array(d["sd"]))


def fit_scaler(train):
    if len(train) < 2:
        raise InsufficientDataError("need at least 2 training rows to standardize")
    mean = train.rows.mean(axis=0)
    sd = train.rows.std(axis=0, ddof=1)
    zero = [n for n, s in zip(train.feature_names, sd) if not s > 0]
    if zero:
        raise ValueError(f"zero standard deviation in column(s): {', '.join(zero)}")
    return ScalerParams(list(train.feature_names), mean, sd)


def standardize(train, *apply_to):
    """Z-score every table with statistics of ``train`` (sample SD, n-1)."""
    params = fit_scaler(train)
    scaled = [params.transform(train)] + [params.transform(t) for t in apply_to]
    return scaled, params


def correlation_matrix(table):
    """Pearson correlations between columns; constant columns get r = 0 off-diagonal."""
    X = table.rows - table.rows.mean(axis=0)
    norm = np.sqrt((X ** 2).sum(axis=0))
    safe = np.where(norm > 0, norm, 1.0)
    r = (X.T @ X) / np.outer(safe, safe)
    r = np.clip((r + r.T) / 2, -1.0, 1.0)
    np.fill_diagonal(r, 1.0)
    return r


def correlation_csv(table):
    r = correlation_matrix(table)
    lines = ["," + ",".join(table.feature_names)]
    for name, row in zip(table.feature_names, r):
        lines.append(name + "," + ",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def _priority(name):
    if name in KEEP_PRIORITY:
        return (0, KEEP_PRIORITY.index(name), "")
    return (1, 0, name)


def prune_correlated(table, threshold=CORRELATION_THRESHOLD):
    """Drop features with a high positive correlation to a higher-priority one.

    Features are visited in keep-priority order; a feature is kept unless its
    Pearson r with an already-kept feature exceeds ``threshold``.
    ``variance`` is always dropped when ``sd`` is present. Column order of the
    result follows the input table. Returns ``(pruned_table, dropped_names)``.
    """
    if not 0 < threshold <= 1:
        raise ConfigError("threshold must be in (0, 1]")
    names = list(table.feature_names)
    r = correlation_matrix(table)
    kept, dropped = [], []
    for name in sorted(names, key=_priority):
        i = names.index(name)
        if name == "variance" and "sd" in names:
            dropped.append(name)
            continue
        # exact duplicates have r == 1 and must go even at threshold 1
        if any(r[i, names.index(k)] > threshold
               or np.array_equal(table.rows[:, i], table.column(k)) for k in kept):
            dropped.append(name)
        else:
            kept.append(name)
    kept_in_order = [n for n in names if n in kept]
    return table.select(kept_in_order), dropped


@dataclass
class RfecvReport:
    ranking: list                 # eliminated first ... survivor last
    cv_score_by_subset_size: dict
    selected: list
    fold_scores: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "ranking": list(self.ranking),
            "cv_score_by_subset_size": {str(k): v for k, v in
                                        sorted(self.cv_score_by_subset_size.items(), reverse=True)},
            "selected": list(self.selected),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["ranking"], {int(k): v for k, v in d["cv_score_by_subset_size"].items()},
                   d["selected"])


def tree_cv_accuracy(X, y, params, k=10, seed=0, folds=None):
    """Mean stratified k-fold accuracy of the tree estimator."""
    if folds is None:
        folds = stratified_kfold(y, k, seed)
    scores = []
    for f in range(k):
        tr, te = folds != f, folds == f
        model = fit_tree(X[tr], y[tr], params)
        scores.append(np.mean(model.predict(X[te]) == y[te]))
    return float(np.mean(scores)), scores


def rfecv(table, tree_params=None, k_folds=10, seed=0):
    """Recursive feature elimination, step 1, scored by stratified k-fold CV.

    At every subset size the tree is refit on all rows and the feature with
    the lowest importance is removed (ties: earliest column). The subset size
    with the best mean CV accuracy wins; ties go to the smaller size. Fold
    assignment is shared by all sizes.
    """
    if tree_params is None:
        tree_params = TreeParams(seed=seed)
    if table.n_features < 2:
        raise InsufficientDataError("RFECV needs at least 2 features")
    X, y = table.rows, table.labels
    folds = stratified_kfold(y, k_folds, seed)

    current = list(range(table.n_features))
    scores, fold_scores, ranking, subsets = {}, {}, [], {}
    while current:
        size = len(current)
        mean, per_fold = tree_cv_accuracy(X[:, current], y, tree_params, k_folds, folds=folds)
        scores[size] = mean
        fold_scores[size] = per_fold
        subsets[size] = [table.feature_names[i] for i in current]
        if size == 1:
            ranking.append(table.feature_names[current[0]])
            break
        model = fit_tree(X[:, current], y, tree_params)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            imp = feature_importances(model)
        worst = int(np.argmin(imp))
        ranking.append(table.feature_names[current[worst]])
        del current[worst]

    best_score = max(scores.values())
    best_size = min(s for s, v in scores.items() if v >= best_score - 1e-12)
    return RfecvReport(ranking, scores, subsets[best_size], fold_scores)
