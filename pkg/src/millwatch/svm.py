"""
Multiclass soft-margin SVM: one-vs-one machines trained by SMO.

Class pairs (a, b) with a < b give one binary machine each, with class a
mapped to +1. Prediction is by majority vote; vote ties go to the tied
class with the largest summed |decision value|, then to the lowest class id.
"""

import itertools
import json
from dataclasses import asdict, dataclass

import numpy as np

from ._smo import smo_solve
from .errors import ConfigError, DimensionError, InsufficientDataError
from .preprocess import stratified_kfold
from .signals import CLASS_NAMES, N_CLASSES

KERNELS = ("linear", "polynomial", "sigmoid", "rbf")


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbf"
    gamma: float = 1.0
    degree: int = 3
    coef0: float = 0.0

    def __post_init__(self):
        if self.kind not in KERNELS:
            raise ConfigError(f"unknown kernel {self.kind!r}; expected one of {KERNELS}")
        if self.kind != "linear" and not self.gamma > 0:
            raise ConfigError("gamma must be positive")
        if self.degree < 1:
            raise ConfigError("degree must be >= 1")

    def from_gram(self, gram=None, sqdist=None):
        """Kernel values from precomputed inner products or squared distances."""
        if self.kind == "rbf":
            return np.exp(-self.gamma * sqdist)
        if self.kind == "linear":
            return gram.copy()
        if self.kind == "polynomial":
            return (self.gamma * gram + self.coef0) ** self.degree
        return np.tanh(self.gamma * gram + self.coef0)


def sq_distances(A, B):
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    d = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    return np.maximum(d, 0.0)


def kernel_matrix(A, B, spec: KernelSpec):
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if spec.kind == "rbf":
        return spec.from_gram(sqdist=sq_distances(A, B))
    return spec.from_gram(gram=A @ B.T)


@dataclass(frozen=True)
class SmoSettings:
    tol: float = 1e-3
    max_iter: int = 200_000
    max_stall: int = 10


@dataclass
class BinaryMachine:
    positive: int
    negative: int
    support_vectors: np.ndarray
    dual_coef: np.ndarray    # alpha_i * y_i for each support vector
    bias: float
    n_iter: int = 0
    gap: float = 0.0

    def decision(self, X, kernel: KernelSpec):
        if len(self.dual_coef) == 0:
            return np.full(len(X), self.bias)
        return kernel_matrix(X, self.support_vectors, kernel) @ self.dual_coef + self.bias


@dataclass
class SvmModel:
    C: float
    kernel: KernelSpec
    classes: list
    machines: list
    n_features: int
    n_train: int = 0

    def decision_function(self, X):
        """``(n_samples, n_machines)`` binary decision values."""
        X = self._check(X)
        return np.column_stack([m.decision(X, self.kernel) for m in self.machines])

    def predict(self, X):
        X = self._check(X)
        return _vote(self.decision_function(X), self.machines, self.classes)

    def _check(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise DimensionError(f"expected {self.n_features} features, got {X.shape[1]}")
        return X

    @property
    def n_support(self):
        return sum(len(m.dual_coef) for m in self.machines)

    def to_dict(self):
        return {
            "C": float(self.C),
            "kernel": asdict(self.kernel),
            "classes": [int(c) for c in self.classes],
            "n_features": self.n_features,
            "n_train": self.n_train,
            "machines": [
                {"classes": [m.positive, m.negative],
                 "support_vectors": m.support_vectors.tolist(),
                 "dual_coef": m.dual_coef.tolist(),
                 "bias": float(m.bias)}
                for m in self.machines
            ],
        }

    @classmethod
    def from_dict(cls, d):
        machines = [
            BinaryMachine(m["classes"][0], m["classes"][1],
                          np.array(m["support_vectors"], dtype=float).reshape(-1, d["n_features"]),
                          np.array(m["dual_coef"], dtype=float), m["bias"])
            for m in d["machines"]
        ]
        return cls(d["C"], KernelSpec(**d["kernel"]), d["classes"], machines,
                   d["n_features"], d.get("n_train", 0))

    def to_json(self):
        return json.dumps(self.to_dict())


def _vote(dec, machines, classes):
    pos = {c: i for i, c in enumerate(classes)}
    n = dec.shape[0]
    votes = np.zeros((n, len(classes)))
    strength = np.zeros((n, len(classes)))
    for k, m in enumerate(machines):
        f = dec[:, k]
        winner = np.where(f > 0, pos[m.positive], pos[m.negative])
        np.add.at(votes, (np.arange(n), winner), 1)
        np.add.at(strength, (np.arange(n), winner), np.abs(f))
    top = votes == votes.max(axis=1, keepdims=True)
    score = np.where(top, strength, -np.inf)
    # argmax returns the first (lowest class id) among equal strengths
    return np.asarray(classes)[np.argmax(score, axis=1)]


def _check_training_data(X, y, C):
    if not C > 0:
        raise ConfigError("C must be positive")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or len(X) != len(y) or len(X) == 0:
        raise DimensionError("X must be 2-D with one row per label")
    if not np.all(np.isfinite(X)):
        raise ValueError("non-finite feature values")
    classes = sorted(int(c) for c in np.unique(y))
    if len(classes) < 2:
        raise InsufficientDataError("need at least two classes to train an SVM")
    return X, y, classes


def fit_ovo_from_kernel(K, y, classes, C, settings: SmoSettings = SmoSettings()):
    """Train all pairwise machines on a precomputed kernel matrix.

    Returns a list of ``(positive, negative, index, alpha, y_pm, bias, n_iter, gap)``
    where ``index`` addresses rows of ``K`` and only support vectors are kept.
    """
    out = []
    for a, b in itertools.combinations(classes, 2):
        idx = np.flatnonzero((y == a) | (y == b))
        y_pm = np.where(y[idx] == a, 1.0, -1.0)
        Ksub = np.ascontiguousarray(K[np.ix_(idx, idx)])
        alpha, bias, n_iter, gap = smo_solve(Ksub, y_pm, float(C), settings.tol,
                                             settings.max_iter, settings.max_stall)
        sv = alpha > 0
        out.append((a, b, idx[sv], alpha[sv], y_pm[sv], bias, n_iter, gap))
    return out


def train_svm(X, y, C, kernel: KernelSpec, settings: SmoSettings = SmoSettings()):
    """Fit a one-vs-one SVM. SMO here is deterministic; no seed is needed."""
    X, y, classes = _check_training_data(X, y, C)
    K = kernel_matrix(X, X, kernel)
    machines = []
    for a, b, idx, alpha, y_pm, bias, n_iter, gap in fit_ovo_from_kernel(K, y, classes, C, settings):
        machines.append(BinaryMachine(a, b, X[idx].copy(), alpha * y_pm, float(bias), int(n_iter),
                                      float(gap)))
    return SvmModel(float(C), kernel, classes, machines, X.shape[1], len(X))


def train_svm_table(table, C, kernel: KernelSpec, settings: SmoSettings = SmoSettings()):
    return train_svm(table.rows, table.labels, C, kernel, settings)


def predict(model: SvmModel, x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != model.n_features:
        raise DimensionError(f"expected {model.n_features} features, got shape {x.shape}")
    return int(model.predict(x[None, :])[0])


def vanilla_hyperparameters(X):
    """Default settings: C=1, RBF with gamma = 1 / (n_features * Var(X))."""
    X = np.asarray(X, dtype=float)
    var = X.var()
    gamma = 1.0 / (X.shape[1] * var) if var > 0 else 1.0
    return 1.0, KernelSpec("rbf", gamma=gamma)


class CrossValidator:
    """Stratified k-fold CV with per-table precomputation.

    Inner products and squared distances of the whole table are computed
    once, so scoring a new (C, kernel) only costs one elementwise kernel
    transform plus the SMO runs. Fold assignment is fixed by ``seed``.
    """

    def __init__(self, X, y, k=10, seed=0, settings: SmoSettings = SmoSettings()):
        self.X = np.asarray(X, dtype=float)
        self.y = np.asarray(y, dtype=int)
        self.k = k
        self.seed = seed
        self.settings = settings
        self.folds = stratified_kfold(self.y, k, seed)
        self._gram = self.X @ self.X.T
        self._sqdist = sq_distances(self.X, self.X)

    def kernel(self, spec: KernelSpec):
        return spec.from_gram(gram=self._gram, sqdist=self._sqdist)

    def predictions(self, C, kernel: KernelSpec):
        """Out-of-fold predicted label for every row."""
        K = self.kernel(kernel)
        pred = np.empty_like(self.y)
        for fold in range(self.k):
            test = np.flatnonzero(self.folds == fold)
            train = np.flatnonzero(self.folds != fold)
            ytr = self.y[train]
            _, _, classes = _check_training_data(self.X[train], ytr, C)
            Ktr = K[np.ix_(train, train)]
            fitted = fit_ovo_from_kernel(Ktr, ytr, classes, C, self.settings)
            dec = np.empty((len(test), len(fitted)))
            machines = []
            for m, (a, b, idx, alpha, y_pm, bias, _, _) in enumerate(fitted):
                dec[:, m] = K[np.ix_(test, train[idx])] @ (alpha * y_pm) + bias
                machines.append(BinaryMachine(a, b, np.empty((0, 0)), np.empty(0), bias))
            pred[test] = _vote(dec, machines, classes)
        return pred

    def fold_accuracies(self, C, kernel: KernelSpec):
        pred = self.predictions(C, kernel)
        hit = pred == self.y
        return np.array([hit[self.folds == f].mean() for f in range(self.k)])

    def accuracy(self, C, kernel: KernelSpec):
        return float(self.fold_accuracies(C, kernel).mean())


def kfold_cv_accuracy(X, y, C, kernel: KernelSpec, k=10, seed=0,
                      settings: SmoSettings = SmoSettings()):
    """Mean stratified k-fold accuracy; this is the optimizers' fitness."""
    return CrossValidator(X, y, k, seed, settings).accuracy(C, kernel)


@dataclass
class ConfusionMatrix:
    counts: np.ndarray   # rows = true class, columns = predicted class
    class_names: tuple = CLASS_NAMES

    @property
    def total(self):
        return int(self.counts.sum())

    @property
    def accuracy(self):
        return float(np.trace(self.counts) / self.counts.sum())

    @property
    def row_sums(self):
        return self.counts.sum(axis=1)

    def to_csv(self):
        lines = ["true\\predicted," + ",".join(self.class_names)]
        for name, row in zip(self.class_names, self.counts):
            lines.append(name + "," + ",".join(str(int(v)) for v in row))
        return "\n".join(lines) + "\n"

    def to_dict(self):
        return {"class_names": list(self.class_names), "counts": self.counts.astype(int).tolist(),
                "accuracy": self.accuracy}


def confusion_from_predictions(y_true, y_pred, n_classes=N_CLASSES):
    counts = np.zeros((n_classes, n_classes), dtype=int)
    np.add.at(counts, (np.asarray(y_true, dtype=int), np.asarray(y_pred, dtype=int)), 1)
    return ConfusionMatrix(counts)


def confusion_matrix(model, X, y):
    X = np.asarray(X, dtype=float)
    if len(X) == 0:
        raise InsufficientDataError("empty table")
    return confusion_from_predictions(y, model.predict(X))


def cv_confusion_matrix(X, y, C, kernel: KernelSpec, k=10, seed=0,
                        settings: SmoSettings = SmoSettings()):
    """Out-of-fold confusion matrix aggregated over all k folds."""
    pred = CrossValidator(X, y, k, seed, settings).predictions(C, kernel)
    return confusion_from_predictions(y, pred)


def kkt_violations(model: SvmModel, X, y, tol=1e-3):
    """Count KKT violations per machine on the training set.

    Requires the model to have been trained on ``(X, y)``; multipliers are
    recovered by matching support vectors to training rows.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    report = []
    for m in model.machines:
        idx = np.flatnonzero((y == m.positive) | (y == m.negative))
        y_pm = np.where(y[idx] == m.positive, 1.0, -1.0)
        alpha = np.zeros(len(idx))
        lookup = {tuple(r): k for k, r in enumerate(X[idx])}
        for sv, coef in zip(m.support_vectors, m.dual_coef):
            alpha[lookup[tuple(sv)]] = abs(coef)
        margin = y_pm * m.decision(X[idx], model.kernel)
        at_zero = alpha <= 0
        at_c = alpha >= model.C
        free = ~at_zero & ~at_c
        bad = ((at_zero & (margin < 1 - tol)) | (free & (np.abs(margin - 1) > tol))
               | (at_c & (margin > 1 + tol)))
        report.append({"classes": (m.positive, m.negative), "violations": int(bad.sum()),
                       "equality_residual": float(abs(np.sum(alpha * y_pm))),
                       "max_alpha": float(alpha.max(initial=0.0)), "n_iter": m.n_iter})
    return report
