"""Static tables and plots rendered from a finished run directory."""

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import MissingArtifactError  # noqa: E402
from .features import FeatureTable  # noqa: E402
from .optimizers import ALGORITHMS, comparison_csv, comparison_markdown, read_jsonl  # noqa: E402
from .signals import CLASS_NAMES  # noqa: E402

FORMATS = ("csv", "md", "all")
# no timestamps or version strings in the PNG metadata
_PNG_META = {"Software": None}


def _need(run_dir, name):
    p = Path(run_dir) / name
    if not p.exists():
        raise MissingArtifactError(name, run_dir)
    return p


def ordered_results(run_dir):
    """Results sorted by algorithm (canonical order), then by row index."""
    results = read_jsonl(_need(run_dir, "results.jsonl"))
    keyed = sorted(enumerate(results), key=lambda p: (ALGORITHMS.index(p[1].algorithm), p[0]))
    return [r for _, r in keyed]


def trace_series(results):
    """Label -> per-generation best-fitness trace, exactly as stored."""
    series = {}
    for i, r in enumerate(results, start=1):
        series[f"{i}. {r.algorithm.upper()}"] = list(r.trace)
    return series


def plot_traces(series, path):
    fig, ax = plt.subplots(figsize=(7, 4))
    for label, trace in series.items():
        ax.plot(np.arange(1, len(trace) + 1), trace, marker=".", label=label)
    ax.set_xlabel("generation / evaluation")
    ax.set_ylabel("best 10-fold CV accuracy")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)


def plot_projection(table: FeatureTable, path):
    """Scatter of the first two standardized features, one colour per class."""
    fig, ax = plt.subplots(figsize=(6, 5))
    for c, name in enumerate(CLASS_NAMES):
        pts = table.rows[table.labels == c]
        ax.scatter(pts[:, 0], pts[:, 1], s=12, label=name)
    ax.set_xlabel(table.feature_names[0])
    ax.set_ylabel(table.feature_names[1] if table.n_features > 1 else "")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)


def read_confusion_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0][1:], np.array([[int(v) for v in r[1:]] for r in rows[1:]])


def plot_confusion(path_csv, path_png, title):
    names, counts = read_confusion_csv(path_csv)
    fig, ax = plt.subplots(figsize=(5, 4.5))
    ax.imshow(counts, cmap="Blues")
    for i in range(counts.shape[0]):
        for j in range(counts.shape[1]):
            ax.text(j, i, str(counts[i, j]), ha="center", va="center", fontsize=8)
    ax.set_xticks(range(len(names)), names, fontsize=8)
    ax.set_yticks(range(len(names)), names, fontsize=8)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path_png, metadata=_PNG_META)
    plt.close(fig)


def render_run(run_dir, fmt="all"):
    """Write comparison tables, trace/projection/confusion plots. Returns written paths."""
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    run_dir = Path(run_dir)
    results = ordered_results(run_dir)
    written = []
    if fmt in ("csv", "all"):
        (run_dir / "comparison.csv").write_text(comparison_csv(results))
        written.append(run_dir / "comparison.csv")
    if fmt in ("md", "all"):
        (run_dir / "comparison.md").write_text(comparison_markdown(results))
        written.append(run_dir / "comparison.md")
    series = trace_series(results)
    (run_dir / "traces.json").write_text(json.dumps(series, sort_keys=True, indent=2) + "\n")
    plot_traces(series, run_dir / "traces.png")
    train = FeatureTable.from_csv(_need(run_dir, "train.csv"))
    plot_projection(train, run_dir / "projection.png")
    written += [run_dir / "traces.json", run_dir / "traces.png", run_dir / "projection.png"]
    for name in sorted(p.name for p in run_dir.glob("*_confusion.csv")):
        png = run_dir / name.replace(".csv", ".png")
        plot_confusion(run_dir / name, png, name[:-4].replace("_", " "))
        written.append(png)
    return written
