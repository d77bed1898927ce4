"""
White-box views of a trained classifier: permutation importance, a
decision-tree surrogate fitted to the classifier's own predictions, and
additive decision-path contributions read off that surrogate.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InsufficientDataError
from .features import DISPLAY_NAMES
from .signals import CLASS_NAMES
from .tree import DecisionTreeModel, TreeParams, fit_tree

BIAS = "<BIAS>"


def _display(name):
    return DISPLAY_NAMES.get(name, name)


@dataclass
class PermutationReport:
    feature_names: list   # sorted by weight, descending
    weights: np.ndarray
    sds: np.ndarray
    baseline: float
    n_repeats: int

    def weight_of(self, name):
        return float(self.weights[self.feature_names.index(name)])

    def sd_of(self, name):
        return float(self.sds[self.feature_names.index(name)])

    def to_dict(self):
        return {
            "baseline_accuracy": self.baseline,
            "n_repeats": self.n_repeats,
            "features": [{"feature": n, "weight": float(w), "sd": float(s)}
                         for n, w, s in zip(self.feature_names, self.weights, self.sds)],
        }

    def render(self):
        lines = [f"{'Weight':<18}Feature"]
        for n, w, s in zip(self.feature_names, self.weights, self.sds):
            lines.append(f"{f'{w:.4f} ± {s:.4f}':<18}{_display(n)}")
        return "\n".join(lines) + "\n"


def _accuracy(classifier, X, y):
    return float(np.mean(np.asarray(classifier.predict(X)) == y))


def _non_identity_permutation(rng, n):
    while True:
        perm = rng.permutation(n)
        if not np.array_equal(perm, np.arange(n)):
            return perm


def permutation_importance(classifier, table, n_repeats=5, seed=0) -> PermutationReport:
    """Mean and SD (ddof=0) of the accuracy drop when one column is shuffled.

    Every repeat draws a fresh permutation; the identity permutation is
    redrawn so each repeat genuinely moves values.
    """
    if len(table) < 2:
        raise InsufficientDataError("permutation importance needs at least 2 rows")
    if n_repeats < 2:
        raise ValueError("n_repeats must be >= 2")
    X, y = table.rows, table.labels
    rng = np.random.default_rng(seed)
    baseline = _accuracy(classifier, X, y)
    drops = np.empty((table.n_features, n_repeats))
    for j in range(table.n_features):
        for r in range(n_repeats):
            Xp = X.copy()
            Xp[:, j] = X[_non_identity_permutation(rng, len(X)), j]
            drops[j, r] = baseline - _accuracy(classifier, Xp, y)
    weights, sds = drops.mean(axis=1), drops.std(axis=1)
    order = np.argsort(-weights, kind="stable")
    return PermutationReport([table.feature_names[i] for i in order], weights[order], sds[order],
                             baseline, n_repeats)


@dataclass
class SurrogateBundle:
    tree: DecisionTreeModel
    classifier_id: str
    fidelity: float
    disagreements: np.ndarray   # row indices where tree and classifier differ

    def to_dict(self):
        return {"classifier_id": self.classifier_id, "fidelity": self.fidelity,
                "disagreements": self.disagreements.tolist(), "tree": self.tree.to_dict()}


def fit_surrogate(classifier, table, tree_params: TreeParams = TreeParams(),
                  classifier_id="classifier") -> SurrogateBundle:
    """Fit a tree to the classifier's predictions on ``table`` and measure agreement."""
    X = table.rows
    target = np.asarray(classifier.predict(X), dtype=int)
    tree = fit_tree(X, target, tree_params, table.feature_names)
    agree = tree.predict(X) == target
    return SurrogateBundle(tree, classifier_id, float(agree.mean()), np.flatnonzero(~agree))


@dataclass
class LocalExplanation:
    feature_names: list
    values: np.ndarray          # the explained row
    bias: np.ndarray            # (n_classes,) root class distribution
    contributions: np.ndarray   # (n_classes, n_features)
    probabilities: np.ndarray   # (n_classes,) leaf distribution
    class_names: tuple = CLASS_NAMES

    @property
    def predicted(self):
        return int(np.argmax(self.probabilities))

    def terms(self, cls):
        """Nonzero (name, contribution, value) terms for one class, BIAS
        included, sorted by contribution descending."""
        rows = [(BIAS, float(self.bias[cls]), 1.0)]
        rows += [(n, float(c), float(v)) for n, c, v in
                 zip(self.feature_names, self.contributions[cls], self.values) if c != 0]
        return sorted(rows, key=lambda r: -r[1])

    def total(self, cls):
        return float(self.bias[cls] + self.contributions[cls].sum())

    def to_dict(self):
        return {
            "predicted": self.predicted,
            "classes": [{"class": c, "name": self.class_names[c],
                         "probability": float(self.probabilities[c]),
                         "terms": [{"feature": n, "contribution": w, "value": v}
                                   for n, w, v in self.terms(c)]}
                        for c in range(len(self.bias))],
        }

    def render(self, classes=None, top=None):
        classes = range(len(self.bias)) if classes is None else classes
        blocks = []
        for c in classes:
            lines = [f"y={c} (probability {self.probabilities[c]:.3f}) top features",
                     f"{'Contribution':<14}{'Feature':<16}Value"]
            for n, w, v in self.terms(c)[:top]:
                lines.append(f"{w:<+14.3f}{_display(n) if n != BIAS else n:<16}{v:.3f}")
            blocks.append("\n".join(lines))
        return "\n\n".join(blocks) + "\n"


def local_explanation(bundle, x) -> LocalExplanation:
    """Decision-path contributions: each split on the path credits its
    feature with (child distribution - parent distribution)."""
    tree = bundle.tree if isinstance(bundle, SurrogateBundle) else bundle
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) != tree.n_features:
        raise DimensionError(f"expected {tree.n_features} features, got shape {x.shape}")
    path = tree.decision_path(x)
    contrib = np.zeros((tree.n_classes, tree.n_features))
    for parent, child in zip(path[:-1], path[1:]):
        contrib[:, tree.feature[parent]] += tree.node_proba(child) - tree.node_proba(parent)
    return LocalExplanation(list(tree.feature_names), x, tree.node_proba(0), contrib,
                            tree.node_proba(path[-1]))


@dataclass
class ContrastReport:
    first: LocalExplanation
    second: LocalExplanation
    labels: tuple
    flipped: dict        # class id -> feature names whose contribution signs differ

    @property
    def n_flagged(self):
        return sum(len(v) for v in self.flipped.values())

    def to_dict(self):
        return {"labels": list(self.labels),
                self.labels[0]: self.first.to_dict(), self.labels[1]: self.second.to_dict(),
                "sign_differences": {str(c): names for c, names in self.flipped.items()}}

    def render(self, top=None):
        out = []
        for label, e in zip(self.labels, (self.first, self.second)):
            c = e.predicted
            out.append(f"== {label}: predicts {e.class_names[c]} (y={c}) ==")
            out.append(e.render([c], top))
        if self.flipped:
            out.append("Features with opposite contribution signs:")
            for c, names in self.flipped.items():
                out.append(f"  y={c}: {', '.join(_display(n) for n in names)}")
        else:
            out.append("No contribution sign differences.")
        return "\n".join(out) + "\n"


def contrast_explanations(bundle_a, bundle_b, x, labels=("first", "second")) -> ContrastReport:
    """Explain ``x`` under two surrogates and flag features whose
    contribution sign differs for some class (np.sign comparison)."""
    tree_a = bundle_a.tree if isinstance(bundle_a, SurrogateBundle) else bundle_a
    tree_b = bundle_b.tree if isinstance(bundle_b, SurrogateBundle) else bundle_b
    if list(tree_a.feature_names) != list(tree_b.feature_names):
        raise DimensionError("surrogates use different feature spaces")
    a, b = local_explanation(tree_a, x), local_explanation(tree_b, x)
    flipped = {}
    for c in range(len(a.bias)):
        diff = np.sign(a.contributions[c]) != np.sign(b.contributions[c])
        if diff.any():
            flipped[c] = [a.feature_names[i] for i in np.flatnonzero(diff)]
    return ContrastReport(a, b, tuple(labels), flipped)


def to_json(obj):
    return json.dumps(obj.to_dict(), sort_keys=True, indent=2)
