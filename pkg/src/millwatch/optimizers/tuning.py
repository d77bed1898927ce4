"""RBF-SVM hyperparameter tuning driven by k-fold CV accuracy."""

import csv
import io
import json

import numpy as np

from ..svm import CrossValidator, KernelSpec, SmoSettings, train_svm
from . import optimize
from .base import SVM_SPACE, OptimizationResult, OptimizerConfig, SearchSpace

COMPARISON_COLUMNS = ("Sr. No.", "Metaheuristic algorithm", "Common parameters",
                      "Algorithm specific parameters", "C", "γ", "10-fold CV accuracy",
                      "Training accuracy", "Testing accuracy")
DISPLAY = {"eho": "EHO", "mbo": "MBO", "hho": "HHO", "sma": "SMA", "msa": "MSA",
           "grid": "Grid Search CV", "random": "Random Search"}


def svm_fitness(validator: CrossValidator):
    """Position ``(C, gamma)`` -> mean CV accuracy of an RBF SVM."""
    def fitness(x):
        return validator.accuracy(float(x[0]), KernelSpec("rbf", gamma=float(x[1])))
    return fitness


def tune_svm(train, test, config, seed=0, space: SearchSpace = SVM_SPACE, k=10, cv_seed=0,
             settings: SmoSettings = SmoSettings(), n_jobs=1, validator=None) -> OptimizationResult:
    """Search (C, gamma), refit on all of ``train`` and score ``test``.

    ``train`` and ``test`` are standardized FeatureTables. Passing a shared
    ``validator`` avoids recomputing the Gram matrix across tuners.
    """
    if isinstance(config, str):
        config = OptimizerConfig(config)
    if validator is None:
        validator = CrossValidator(train.rows, train.labels, k, cv_seed, settings)
    result = optimize(svm_fitness(validator), space, config, seed=seed, n_jobs=n_jobs)
    C, gamma = result.best_position
    model = train_svm(train.rows, train.labels, C, KernelSpec("rbf", gamma=gamma), settings)
    result.cv_accuracy = float(result.best_fitness)
    result.train_accuracy = float(np.mean(model.predict(train.rows) == train.labels))
    result.test_accuracy = float(np.mean(model.predict(test.rows) == test.labels))
    return result


def _fmt(v):
    return f"{v:g}" if isinstance(v, float) else str(v)


def comparison_row(index, result: OptimizationResult):
    cfg = dict(result.config)
    algorithm = cfg.pop("algorithm")
    common = []
    if "N" in cfg:
        common.append(f"N = {cfg.pop('N')}")
    if "T" in cfg:
        common.append(f"T = {cfg.pop('T')}")
    if algorithm == "grid":
        common.append(f"{cfg['grid_per_dim'] ** len(result.best_position)} candidates")
    elif algorithm == "random":
        common.append(f"{cfg['n_candidates']} candidates")
    specific = ", ".join(f"{k} = {_fmt(v)}" for k, v in cfg.items())
    pct = lambda v: "" if v is None else f"{100 * v:.1f}"
    return {
        "Sr. No.": index,
        "Metaheuristic algorithm": DISPLAY[algorithm],
        "Common parameters": " ".join(common),
        "Algorithm specific parameters": specific,
        "C": f"{result.best_position[0]:.8f}",
        "γ": f"{result.best_position[1]:.8f}",
        "10-fold CV accuracy": pct(result.cv_accuracy),
        "Training accuracy": pct(result.train_accuracy),
        "Testing accuracy": pct(result.test_accuracy),
    }


def comparison_csv(results):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, COMPARISON_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for i, r in enumerate(results, start=1):
        writer.writerow(comparison_row(i, r))
    return buf.getvalue()


def comparison_markdown(results):
    lines = ["| " + " | ".join(COMPARISON_COLUMNS) + " |",
             "|" + "---|" * len(COMPARISON_COLUMNS)]
    for i, r in enumerate(results, start=1):
        row = comparison_row(i, r)
        lines.append("| " + " | ".join(str(row[c]) for c in COMPARISON_COLUMNS) + " |")
    return "\n".join(lines) + "\n"


def write_jsonl(results, path):
    with open(path, "w") as fh:
        for r in results:
            fh.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")


def read_jsonl(path):
    with open(path) as fh:
        return [OptimizationResult.from_dict(json.loads(line)) for line in fh if line.strip()]
