"""
Staged, file-based pipeline: every stage reads its inputs from the run
directory and writes its outputs back, so any stage can be rerun alone.

JSON artifacts carry the manifest hash and seed and never a timestamp, so
identical manifests give byte-identical JSON.
"""

import hashlib
import json
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, MillwatchError, MissingArtifactError, StageError
from .explain import contrast_explanations, fit_surrogate, permutation_importance
from .features import FeatureTable, build_feature_table
from .optimizers import OptimizerConfig, tune_svm, write_jsonl
from .preprocess import (correlation_csv, prune_correlated, rfecv, split_indices, standardize)
from .signals import GeneratorConfig, generate_synthetic_dataset, load_signals, write_signals
from .svm import (CrossValidator, KernelSpec, SmoSettings, SvmModel, confusion_from_predictions,
                  confusion_matrix, train_svm, vanilla_hyperparameters)
from .tree import TreeParams

STAGES = ("generate", "features", "select", "train", "tune", "explain", "report")


def _default_optimizers():
    return [
        {"algorithm": "eho", "N": 10, "T": 10, "n_clans": 5},
        {"algorithm": "mbo", "N": 10, "T": 10},
        {"algorithm": "hho", "N": 10, "T": 10},
        {"algorithm": "sma", "N": 10, "T": 10},
        {"algorithm": "msa", "N": 10, "T": 10},
        {"algorithm": "grid", "grid_per_dim": 8},
        {"algorithm": "random", "n_candidates": 10},
    ]


@dataclass
class RunManifest:
    """Everything a run depends on. ``n_jobs`` only changes speed and is
    left out of the hash."""

    seed: int = 0
    generator: dict = field(default_factory=dict)
    input_signals: str = None
    preprocess: dict = field(default_factory=lambda: {
        "rfecv_folds": 10, "tree_max_depth": 8, "correlation_threshold": 0.9,
        "test_fraction": 50 / 300})
    svm: dict = field(default_factory=lambda: {"cv_folds": 10, "tol": 1e-3, "max_iter": 200_000})
    optimizers: list = field(default_factory=_default_optimizers)
    explain: dict = field(default_factory=lambda: {"n_repeats": 5, "surrogate_max_depth": 8})
    n_jobs: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        self.generator_config()
        for cfg in self.optimizers:
            OptimizerConfig.from_dict(cfg)
        if self.n_jobs < 1:
            raise ConfigError("n_jobs must be >= 1")

    def generator_config(self):
        return GeneratorConfig.from_dict({**self.generator, "seed": self.seed})

    def optimizer_configs(self):
        return [OptimizerConfig.from_dict(c) for c in self.optimizers]

    def smo_settings(self):
        return SmoSettings(tol=self.svm["tol"], max_iter=self.svm["max_iter"])

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown manifest fields: {sorted(unknown)}")
        base = cls()
        merged = {}
        for k, v in d.items():
            default = getattr(base, k)
            merged[k] = {**default, **v} if isinstance(default, dict) and k != "generator" else v
        return cls(**merged)

    @property
    def hash(self):
        d = self.to_dict()
        d.pop("n_jobs")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


def load_manifest(path=None, run_dir=None, seed=None):
    """Manifest from ``path``, else the run directory's copy, else defaults."""
    d = {}
    if path is not None:
        with open(path) as fh:
            d = json.load(fh)
    elif run_dir is not None and (Path(run_dir) / "manifest.json").exists():
        with open(Path(run_dir) / "manifest.json") as fh:
            d = json.load(fh)
            d.pop("manifest_hash", None)
    if seed is not None:
        d["seed"] = int(seed)
    return RunManifest.from_dict(d)


# -- artifact helpers -----------------------------------------------------

class Run:
    def __init__(self, run_dir, manifest: RunManifest):
        self.dir = Path(run_dir)
        self.manifest = manifest
        self.dir.mkdir(parents=True, exist_ok=True)

    def path(self, name):
        return self.dir / name

    def need(self, name):
        p = self.path(name)
        if not p.exists():
            raise MissingArtifactError(name, self.dir)
        return p

    def write_json(self, name, payload):
        body = {"manifest_hash": self.manifest.hash, "seed": self.manifest.seed, **payload}
        self.path(name).write_text(json.dumps(body, sort_keys=True, indent=2) + "\n")

    def read_json(self, name):
        return json.loads(self.need(name).read_text())

    def write_text(self, name, text):
        self.path(name).write_text(text)

    def write_manifest(self):
        d = self.manifest.to_dict()
        d.pop("n_jobs")   # execution detail, not a run input
        self.write_json("manifest.json", d)


# -- stages ---------------------------------------------------------------

def stage_generate(run: Run):
    m = run.manifest
    if m.input_signals:
        dataset = load_signals(m.input_signals)
        source = {"source": "file", "path": str(m.input_signals)}
    else:
        dataset = generate_synthetic_dataset(m.generator_config())
        source = {"source": "synthetic", "generator": m.generator_config().to_dict()}
    write_signals(dataset, run.path("signals.csv"))
    run.write_json("signals.json", {**source, "n_samples": len(dataset),
                                    "sample_length": dataset.sample_length,
                                    "class_counts": np.bincount(dataset.labels, minlength=6).tolist()})


def stage_features(run: Run):
    dataset = load_signals(run.need("signals.csv"))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        table = build_feature_table(dataset)
    table.to_csv(run.path("features.csv"))
    run.write_json("features.json", {"feature_names": table.feature_names, "n_rows": len(table),
                                     "warnings": [str(w.message) for w in caught]})


def stage_select(run: Run):
    m, pp = run.manifest, run.manifest.preprocess
    table = FeatureTable.from_csv(run.need("features.csv"))
    report = rfecv(table, TreeParams(max_depth=pp["tree_max_depth"], seed=m.seed),
                   pp["rfecv_folds"], m.seed)
    chosen = table.select(report.selected)
    run.write_text("correlation_selected.csv", correlation_csv(chosen))
    pruned, dropped = prune_correlated(chosen, pp["correlation_threshold"])
    run.write_text("correlation_final.csv", correlation_csv(pruned))
    train_idx, test_idx = split_indices(pruned.labels, pp["test_fraction"], m.seed)
    (train, test), scaler = standardize(pruned.take(train_idx), pruned.take(test_idx))
    train.to_csv(run.path("train.csv"))
    test.to_csv(run.path("test.csv"))
    run.write_json("rfecv.json", report.to_dict())
    run.write_json("selection.json", {"rfecv_selected": report.selected, "dropped": dropped,
                                      "final_features": pruned.feature_names,
                                      "train_rows": train_idx.tolist(),
                                      "test_rows": test_idx.tolist()})
    run.write_json("scaler.json", scaler.to_dict())


def _load_split(run):
    return FeatureTable.from_csv(run.need("train.csv")), FeatureTable.from_csv(run.need("test.csv"))


def _validator(run, train):
    m = run.manifest
    return CrossValidator(train.rows, train.labels, m.svm["cv_folds"], m.seed, m.smo_settings())


def _model_reports(run, prefix, model, validator, train, test):
    """Out-of-fold and test confusion matrices plus accuracies for one (C, gamma)."""
    cv_pred = validator.predictions(model.C, model.kernel)
    cv_cm = confusion_from_predictions(train.labels, cv_pred)
    test_cm = confusion_matrix(model, test.rows, test.labels)
    run.write_text(f"{prefix}_cv_confusion.csv", cv_cm.to_csv())
    run.write_text(f"{prefix}_test_confusion.csv", test_cm.to_csv())
    run.write_json(f"{prefix}_model.json", model.to_dict())
    train_acc = float(np.mean(model.predict(train.rows) == train.labels))
    run.write_json(f"{prefix}.json", {
        "C": model.C, "gamma": model.kernel.gamma,
        "cv_accuracy": float(validator.fold_accuracies(model.C, model.kernel).mean()),
        "train_accuracy": train_acc, "test_accuracy": test_cm.accuracy,
        "cv_confusion": cv_cm.to_dict(), "test_confusion": test_cm.to_dict()})


def stage_train(run: Run):
    train, test = _load_split(run)
    C, kernel = vanilla_hyperparameters(train.rows)
    model = train_svm(train.rows, train.labels, C, kernel, run.manifest.smo_settings())
    _model_reports(run, "vanilla", model, _validator(run, train), train, test)


def stage_tune(run: Run, algorithm=None):
    m = run.manifest
    configs = m.optimizer_configs()
    if algorithm is not None:
        configs = [c for c in configs if c.algorithm == algorithm] or [OptimizerConfig(algorithm)]
    if not configs:
        return
    train, test = _load_split(run)
    validator = _validator(run, train)
    results = [tune_svm(train, test, cfg, seed=m.seed, k=m.svm["cv_folds"], cv_seed=m.seed,
                        settings=m.smo_settings(), n_jobs=m.n_jobs, validator=validator)
               for cfg in configs]
    write_jsonl(results, run.path("results.jsonl"))
    run.write_json("results.json", {"results": [r.to_dict() for r in results]})
    best = max(results, key=lambda r: r.cv_accuracy)   # first wins ties
    C, gamma = best.best_position
    model = train_svm(train.rows, train.labels, C, KernelSpec("rbf", gamma=gamma), m.smo_settings())
    _model_reports(run, "best", model, validator, train, test)
    run.write_json("best_choice.json", {"algorithm": best.algorithm, "config": best.config})


def _disagreement_row(best, vanilla, test):
    """Prefer a test row the tuned model gets right and the vanilla model
    gets wrong, then any disagreement, then row 0."""
    pb, pv = best.predict(test.rows), vanilla.predict(test.rows)
    y = test.labels
    for mask, kind in (((pb == y) & (pv != y), "optimized correct, vanilla wrong"),
                       (pb != pv, "models disagree"),
                       (np.ones(len(y), bool), "no disagreement found")):
        hits = np.flatnonzero(mask)
        if len(hits):
            return int(hits[0]), kind


def stage_explain(run: Run):
    m, ex = run.manifest, run.manifest.explain
    train, test = _load_split(run)
    vanilla = SvmModel.from_dict(run.read_json("vanilla_model.json"))
    best = SvmModel.from_dict(run.read_json("best_model.json"))
    both = FeatureTable(train.feature_names, np.vstack([train.rows, test.rows]),
                        np.concatenate([train.labels, test.labels]))
    params = TreeParams(max_depth=ex["surrogate_max_depth"], seed=m.seed)
    bundles = {}
    for name, model in (("vanilla", vanilla), ("best", best)):
        perm = permutation_importance(model, test, ex["n_repeats"], m.seed)
        run.write_json(f"permutation_{name}.json", perm.to_dict())
        run.write_text(f"permutation_{name}.txt", perm.render())
        bundle = fit_surrogate(model, both, params, classifier_id=name)
        bundles[name] = bundle
        run.write_json(f"surrogate_{name}.json", bundle.to_dict())
        run.write_text(f"surrogate_{name}.txt", bundle.tree.export_text())
    row, kind = _disagreement_row(best, vanilla, test)
    x = test.rows[row]
    contrast = contrast_explanations(bundles["best"], bundles["vanilla"], x,
                                     labels=("optimized", "vanilla"))
    run.write_json("local_explanation.json", {
        "test_row": row, "selection": kind, "true_label": int(test.labels[row]),
        "svm_prediction": {"optimized": int(best.predict(x)[0]),
                           "vanilla": int(vanilla.predict(x)[0])},
        **contrast.to_dict()})
    run.write_text("local_explanation.txt", contrast.render())


def stage_report(run: Run, fmt="all"):
    from . import report
    report.render_run(run.dir, fmt)


def run_stage(name, run_dir, manifest: RunManifest, **kwargs):
    """Run one stage, wrapping any failure with the stage name."""
    fn = {"generate": stage_generate, "features": stage_features, "select": stage_select,
          "train": stage_train, "tune": stage_tune, "explain": stage_explain,
          "report": stage_report}[name]
    run = Run(run_dir, manifest)
    try:
        run.write_manifest()
        fn(run, **kwargs)
    except StageError:
        raise
    except (MillwatchError, OSError, ValueError, KeyError) as exc:
        raise StageError(name, exc) from exc


def run_pipeline(manifest: RunManifest, run_dir):
    """All stages in order; with no optimizers the run ends after the
    vanilla SVM reports."""
    for name in STAGES:
        if name in ("tune", "explain", "report") and not manifest.optimizers:
            break
        run_stage(name, run_dir, manifest)
    return Path(run_dir)
