"""
Time-domain statistical features for vibration samples.

Seventeen features are computed per sample: fifteen classic
condition-monitoring statistics plus two peak ratios, ``crest_factor`` and
``impulse_factor``, added to round out the set.
"""

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, ParseError
from .signals import N_CLASSES, RawDataset, SignalSample

FEATURE_NAMES = (
    "mean", "median", "mode", "sd", "variance", "kurtosis", "skewness",
    "max", "min", "range", "sum", "rms", "shape_factor", "k_factor",
    "std_error", "crest_factor", "impulse_factor",
)

# Labels used in rendered reports.
DISPLAY_NAMES = {
    "mean": "Mean", "median": "Median", "mode": "Mode", "sd": "SD",
    "variance": "Variance", "kurtosis": "Kurtosis", "skewness": "Skewness",
    "max": "max", "min": "min", "range": "range", "sum": "sum", "rms": "RMS",
    "shape_factor": "Shape factor", "k_factor": "k factor",
    "std_error": "Std error", "crest_factor": "Crest factor",
    "impulse_factor": "Impulse factor",
}

MODE_BINS = 64


class DegenerateFeatureWarning(UserWarning):
    pass


@dataclass
class FeatureVector:
    values: dict
    label: int
    warnings: list = field(default_factory=list)

    def as_array(self):
        return np.array([self.values[name] for name in FEATURE_NAMES])


def histogram_mode(x, bins=MODE_BINS):
    """Center of the densest of ``bins`` equal-width bins over [min, max]."""
    lo, hi = float(np.min(x)), float(np.max(x))
    if hi == lo:
        return lo
    counts, edges = np.histogram(x, bins=bins, range=(lo, hi))
    k = int(np.argmax(counts))  # first maximum = lowest bin index
    return 0.5 * (edges[k] + edges[k + 1])


def _safe_ratio(num, den):
    return num / den if den > 0 else 0.0


def compute_features(x):
    """Return ``(values, notes)`` for a 1-D signal with at least two points."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 2:
        raise InsufficientDataError(f"need at least 2 points, got {n}")
    notes = []

    mean = x.mean()
    sd = x.std(ddof=1)
    centered = x - mean
    m2 = np.mean(centered ** 2)
    if sd == 0 or m2 == 0:
        kurtosis = skewness = 0.0
        notes.append("zero standard deviation: kurtosis and skewness set to 0")
    else:
        # scale-free ratios; normalize first so tiny signals do not underflow
        c = centered / np.max(np.abs(centered))
        c2 = np.mean(c ** 2)
        kurtosis = np.mean(c ** 4) / c2 ** 2
        skewness = np.mean(c ** 3) / c2 ** 1.5

    abs_x = np.abs(x)
    peak = abs_x.max()
    mean_abs = abs_x.mean()
    rms = np.sqrt(np.mean(x ** 2))
    if mean_abs == 0:
        notes.append("all-zero signal: ratio features set to 0")
    mx, mn = x.max(), x.min()

    values = {
        "mean": mean,
        "median": np.median(x),
        "mode": histogram_mode(x),
        "sd": sd,
        "variance": sd ** 2,
        "kurtosis": kurtosis,
        "skewness": skewness,
        "max": mx,
        "min": mn,
        "range": mx - mn,
        "sum": x.sum(),
        "rms": rms,
        "shape_factor": _safe_ratio(rms, mean_abs),
        "k_factor": peak * rms,
        "std_error": sd / np.sqrt(n),
        "crest_factor": _safe_ratio(peak, rms),
        "impulse_factor": _safe_ratio(peak, mean_abs),
    }
    return {k: float(v) for k, v in values.items()}, notes


def extract_features(sample: SignalSample) -> FeatureVector:
    values, notes = compute_features(sample.amplitude)
    for note in notes:
        warnings.warn(note, DegenerateFeatureWarning, stacklevel=2)
    return FeatureVector(values, int(sample.label), notes)


@dataclass
class FeatureTable:
    feature_names: list
    rows: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.feature_names = list(self.feature_names)
        self.rows = np.asarray(self.rows, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        if self.rows.ndim != 2 or self.rows.shape[1] != len(self.feature_names):
            raise ValueError("rows must be (n_samples, n_features)")
        if len(self.rows) != len(self.labels):
            raise ValueError("one label per row required")
        if not np.all(np.isfinite(self.rows)):
            raise ValueError("feature table contains NaN or Inf")
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= N_CLASSES):
            raise ValueError("labels must be in 0..5")

    def __len__(self):
        return len(self.labels)

    @property
    def n_features(self):
        return len(self.feature_names)

    def select(self, names):
        idx = [self.feature_names.index(n) for n in names]
        return FeatureTable(list(names), self.rows[:, idx], self.labels)

    def take(self, index):
        index = np.asarray(index)
        return FeatureTable(self.feature_names, self.rows[index], self.labels[index])

    def column(self, name):
        return self.rows[:, self.feature_names.index(name)]

    def with_rows(self, rows):
        return FeatureTable(self.feature_names, rows, self.labels)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.feature_names + ["label"])
            for row, label in zip(self.rows, self.labels):
                w.writerow([repr(float(v)) for v in row] + [int(label)])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ParseError(f"{path}: empty feature table") from None
            if not header or header[-1] != "label":
                raise ParseError("last header column must be 'label'", row=0)
            rows, labels = [], []
            for i, rec in enumerate(reader, start=1):
                if not rec:
                    continue
                if len(rec) != len(header):
                    raise ParseError(f"expected {len(header)} columns, got {len(rec)}", row=i)
                try:
                    rows.append([float(v) for v in rec[:-1]])
                    labels.append(int(rec[-1]))
                except ValueError as exc:
                    raise ParseError(str(exc), row=i) from None
        return cls(header[:-1], np.array(rows).reshape(len(rows), len(header) - 1), labels)


def build_feature_table(dataset: RawDataset) -> FeatureTable:
    if len(dataset) == 0:
        raise InsufficientDataError("empty dataset")
    rows = np.empty((len(dataset), len(FEATURE_NAMES)))
    for i, sample in enumerate(dataset):
        try:
            values, notes = compute_features(sample.amplitude)
        except InsufficientDataError as exc:
            raise InsufficientDataError(f"sample {i}: {exc}") from exc
        for note in notes:
            warnings.warn(f"sample {i}: {note}", DegenerateFeatureWarning, stacklevel=2)
        rows[i] = [values[name] for name in FEATURE_NAMES]
    return FeatureTable(list(FEATURE_NAMES), rows, dataset.labels.copy())
