"""
Axis-aligned decision tree grown by entropy information gain.

Used as the RFECV estimator, the raw-feature usefulness probe and the
white-box surrogate of trained SVMs. Nodes live in flat arrays indexed in
preorder; node 0 is the root.
"""

import json
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError, DimensionError, InsufficientDataError
from .signals import CLASS_NAMES, N_CLASSES

_GAIN_EPS = 1e-12


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 8
    min_samples_split: int = 2
    criterion: str = "entropy"
    seed: int = 0

    def __post_init__(self):
        if self.max_depth < 1:
            raise ConfigError("max_depth must be >= 1")
        if self.min_samples_split < 2:
            raise ConfigError("min_samples_split must be >= 2")
        if self.criterion != "entropy":
            raise ConfigError("only the entropy criterion is supported")


class NoSplitWarning(UserWarning):
    pass


def entropy(counts):
    """Shannon entropy in bits of count vectors along the last axis."""
    counts = np.asarray(counts, dtype=float)
    total = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(total > 0, counts / total, 0.0)
        terms = np.where(p > 0, p * np.log2(p), 0.0)
    return -terms.sum(axis=-1)


def best_split_on_feature(x, onehot):
    """Best threshold for one feature.

    Returns ``(gain, threshold)`` or ``None`` if the feature is constant.
    Candidate thresholds are midpoints between consecutive distinct sorted
    values; among equal gains the lowest threshold wins.
    """
    order = np.argsort(x, kind="stable")
    xs = x[order]
    valid = xs[:-1] < xs[1:]
    if not valid.any():
        return None
    cum = np.cumsum(onehot[order], axis=0)
    total = cum[-1]
    left = cum[:-1]
    right = total - left
    n = len(x)
    n_left = np.arange(1, n)
    child = (n_left * entropy(left) + (n - n_left) * entropy(right)) / n
    gain = entropy(total) - child
    gain = np.where(valid, gain, -np.inf)
    k = int(np.argmax(gain))
    return float(gain[k]), 0.5 * (xs[k] + xs[k + 1])


@dataclass
class DecisionTreeModel:
    feature: np.ndarray      # -1 marks a leaf
    threshold: np.ndarray    # go left when x[feature] <= threshold
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray       # (n_nodes, n_classes) training class counts
    gain: np.ndarray         # information gain of the split, 0 at leaves
    feature_names: list
    params: TreeParams = TreeParams()

    @property
    def n_nodes(self):
        return len(self.feature)

    @property
    def n_features(self):
        return len(self.feature_names)

    @property
    def n_classes(self):
        return self.counts.shape[1]

    @property
    def priors(self):
        return self.counts[0] / self.counts[0].sum()

    @property
    def n_splits(self):
        return int(np.sum(self.feature >= 0))

    def depth(self):
        def rec(node):
            if self.feature[node] < 0:
                return 0
            return 1 + max(rec(self.left[node]), rec(self.right[node]))
        return rec(0)

    def node_proba(self, node):
        c = self.counts[node]
        return c / c.sum()

    def apply(self, X):
        """Leaf index reached by each row."""
        X = self._check(X)
        node = np.zeros(len(X), dtype=int)
        active = self.feature[node] >= 0
        while active.any():
            idx = np.flatnonzero(active)
            f = self.feature[node[idx]]
            go_left = X[idx, f] <= self.threshold[node[idx]]
            node[idx] = np.where(go_left, self.left[node[idx]], self.right[node[idx]])
            active = self.feature[node] >= 0
        return node

    def decision_path(self, x):
        """Node ids from root to leaf for a single row."""
        x = self._check(np.atleast_2d(x))[0]
        path = [0]
        node = 0
        while self.feature[node] >= 0:
            node = self.left[node] if x[self.feature[node]] <= self.threshold[node] else self.right[node]
            path.append(int(node))
        return path

    def predict_proba(self, X):
        leaves = self.apply(X)
        c = self.counts[leaves]
        return c / c.sum(axis=1, keepdims=True)

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)

    def _check(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionError(f"expected {self.n_features} features, got shape {X.shape}")
        return X

    # -- serialization ---------------------------------------------------

    def to_dict(self):
        def rec(node):
            d = {"counts": [int(c) for c in self.counts[node]]}
            if self.feature[node] >= 0:
                d.update(feature=self.feature_names[self.feature[node]],
                         threshold=float(self.threshold[node]),
                         gain=float(self.gain[node]),
                         left=rec(self.left[node]), right=rec(self.right[node]))
            return d
        return {"feature_names": list(self.feature_names), "params": asdict(self.params),
                "root": rec(0)}

    @classmethod
    def from_dict(cls, d):
        names = list(d["feature_names"])
        feature, threshold, left, right, counts, gain = [], [], [], [], [], []

        def rec(node):
            i = len(feature)
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            counts.append(node["counts"])
            gain.append(0.0)
            if "feature" in node:
                feature[i] = names.index(node["feature"])
                threshold[i] = node["threshold"]
                gain[i] = node.get("gain", 0.0)
                left[i] = rec(node["left"])
                right[i] = rec(node["right"])
            return i

        rec(d["root"])
        return cls(np.array(feature), np.array(threshold, dtype=float), np.array(left),
                   np.array(right), np.array(counts, dtype=float), np.array(gain, dtype=float),
                   names, TreeParams(**d.get("params", {})))

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def export_text(self, class_names=CLASS_NAMES, decimals=3):
        """Indented if/else rules, one line per node."""
        lines = []

        def label(node):
            k = int(np.argmax(self.counts[node]))
            name = class_names[k] if k < len(class_names) else str(k)
            counts = ", ".join(str(int(c)) for c in self.counts[node])
            return f"class: {k} ({name})  [{counts}]"

        def rec(node, depth):
            pad = "|   " * depth
            if self.feature[node] < 0:
                lines.append(f"{pad}|--- {label(node)}")
                return
            name = self.feature_names[self.feature[node]]
            thr = f"{self.threshold[node]:.{decimals}f}"
            lines.append(f"{pad}|--- {name} <= {thr}")
            rec(self.left[node], depth + 1)
            lines.append(f"{pad}|--- {name} >  {thr}")
            rec(self.right[node], depth + 1)

        rec(0, 0)
        return "\n".join(lines) + "\n"


def fit_tree(X, y, params: TreeParams = TreeParams(), feature_names=None, n_classes=N_CLASSES):
    """Greedy top-down induction.

    At each node the features are visited in a seeded random order; a
    candidate replaces the incumbent only when its gain is strictly larger,
    so ties go to the feature visited first and then to the lower threshold.
    Zero-gain splits are allowed while a node is impure.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or len(X) == 0 or X.shape[1] == 0:
        raise InsufficientDataError("empty table")
    if len(X) < 2:
        raise InsufficientDataError("need at least 2 samples")
    if len(y) != len(X):
        raise DimensionError("X and y lengths differ")
    if feature_names is None:
        feature_names = [f"x{i}" for i in range(X.shape[1])]
    n_classes = max(n_classes, int(y.max()) + 1)
    onehot = np.eye(n_classes)[y]
    rng = np.random.default_rng(params.seed)

    feature, threshold, left, right, counts, gain = [], [], [], [], [], []

    def grow(idx, depth):
        node = len(feature)
        node_counts = onehot[idx].sum(axis=0)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(node_counts)
        gain.append(0.0)

        if (depth >= params.max_depth or len(idx) < params.min_samples_split
                or np.count_nonzero(node_counts) <= 1):
            return node
        best = None
        for f in rng.permutation(X.shape[1]):
            res = best_split_on_feature(X[idx, f], onehot[idx])
            if res is None:
                continue
            if best is None or res[0] > best[0] + _GAIN_EPS:
                best = (res[0], res[1], int(f))
        if best is None:
            return node
        g, thr, f = best
        go_left = X[idx, f] <= thr
        feature[node] = f
        threshold[node] = thr
        gain[node] = max(g, 0.0)
        left[node] = grow(idx[go_left], depth + 1)
        right[node] = grow(idx[~go_left], depth + 1)
        return node

    grow(np.arange(len(X)), 0)
    return DecisionTreeModel(np.array(feature), np.array(threshold), np.array(left),
                             np.array(right), np.array(counts), np.array(gain),
                             list(feature_names), params)


def fit_tree_table(table, params: TreeParams = TreeParams()):
    return fit_tree(table.rows, table.labels, params, table.feature_names)


def predict_tree(model: DecisionTreeModel, x):
    """Label and class-probability vector for one row."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != model.n_features:
        raise DimensionError(f"expected {model.n_features} features, got shape {x.shape}")
    proba = model.predict_proba(x[None, :])[0]
    return int(np.argmax(proba)), proba


def feature_importances(model: DecisionTreeModel):
    """Normalized impurity-decrease importance; all zeros (with a warning) if nothing was split."""
    imp = np.zeros(model.n_features)
    n_total = model.counts[0].sum()
    for node in np.flatnonzero(model.feature >= 0):
        imp[model.feature[node]] += model.counts[node].sum() / n_total * model.gain[node]
    total = imp.sum()
    if total <= 0:
        warnings.warn("tree has no informative split; importances are all zero", NoSplitWarning,
                      stacklevel=2)
        return imp
    return imp / total
