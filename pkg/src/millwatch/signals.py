"""
Synthetic six-class spindle vibration data and CSV ingestion.

The generator emulates the qualitative time-domain picture of a milling
cutter: a healthy tool gives a low-amplitude, uniform response while each
insert fault adds a periodic train of impacts with its own period, width
and depth. Every sample draws from its own child RNG stream, so the result
does not depend on generation order.
"""

import csv
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import ConfigError, ParseError

CLASS_NAMES = ("NRML", "WNR", "WNT", "WFF", "WCRT", "WEGF")
N_CLASSES = len(CLASS_NAMES)


@dataclass(frozen=True)
class ClassSignature:
    """Fault signature of one tool condition.

    The base tone is amplitude-modulated by ``modulation_depth`` at
    ``modulation_hz``; a burst train of Gaussian-windowed ringing at
    ``burst_carrier_hz`` repeats every ``burst_period_s``. A zero
    ``burst_amplitude`` disables the bursts.
    """

    modulation_depth: float = 0.0
    modulation_hz: float = 10.0
    burst_period_s: float = 0.02
    burst_width_s: float = 0.001
    burst_amplitude: float = 0.0
    burst_carrier_hz: float = 3000.0


DEFAULT_SIGNATURES = (
    ClassSignature(modulation_depth=0.05, modulation_hz=8.0),
    ClassSignature(0.10, 12.0, 0.0200, 0.0006, 2.0, 2800.0),
    ClassSignature(0.10, 12.0, 0.0100, 0.0005, 1.2, 3400.0),
    ClassSignature(0.15, 9.0, 0.0250, 0.0020, 0.8, 2500.0),
    ClassSignature(0.15, 9.0, 0.0125, 0.0012, 1.0, 2600.0),
    ClassSignature(0.10, 15.0, 0.0300, 0.0003, 3.0, 3600.0),
)


@dataclass(frozen=True)
class GeneratorConfig:
    samples_per_class: int = 50
    sample_length: int = 2048
    seed: int = 0
    sampling_frequency_hz: float = 20_000.0
    base_frequency_hz: float = 150.0
    base_amplitude: float = 1.0
    noise_sigma: float = 0.15
    # per-sample multiplicative spread on burst amplitude
    severity_jitter: float = 0.15
    classes: tuple = field(default=DEFAULT_SIGNATURES)

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(
            c if isinstance(c, ClassSignature) else ClassSignature(**c)
            for c in self.classes))
        self.validate()

    def validate(self):
        if self.samples_per_class < 1:
            raise ConfigError("samples_per_class must be >= 1")
        if self.sample_length < 64:
            raise ConfigError("sample_length must be >= 64")
        if self.sampling_frequency_hz <= 0 or self.base_frequency_hz <= 0:
            raise ConfigError("frequencies must be positive")
        if self.noise_sigma < 0 or not 0 <= self.severity_jitter < 1:
            raise ConfigError("noise_sigma must be >= 0 and severity_jitter in [0, 1)")
        if len(self.classes) != N_CLASSES:
            raise ConfigError(f"expected {N_CLASSES} class signatures, got {len(self.classes)}")
        if len(set(self.classes)) != N_CLASSES:
            raise ConfigError("class signatures must be pairwise distinct")
        for sig in self.classes:
            if sig.burst_period_s <= 0 or sig.burst_width_s <= 0:
                raise ConfigError("burst period and width must be positive")

    def to_dict(self):
        d = asdict(self)
        d["classes"] = [asdict(c) for c in self.classes]
        return d

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown generator config fields: {sorted(unknown)}")
        return cls(**d)


def load_generator_config(path):
    with open(path) as fh:
        return GeneratorConfig.from_dict(json.load(fh))


@dataclass(frozen=True)
class SignalSample:
    label: int
    amplitude: np.ndarray


@dataclass
class RawDataset:
    """Labeled vibration samples stored as one ``(n_samples, sample_length)`` array."""

    signals: np.ndarray
    labels: np.ndarray
    sampling_frequency_hz: float = 20_000.0
    class_names: tuple = CLASS_NAMES

    def __post_init__(self):
        self.signals = np.asarray(self.signals, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        if self.signals.ndim != 2 or len(self.signals) != len(self.labels):
            raise ValueError("signals must be 2-D with one row per label")
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= N_CLASSES):
            raise ValueError("labels must be in 0..5")

    @property
    def sample_length(self):
        return self.signals.shape[1]

    def __len__(self):
        return len(self.labels)

    def __iter__(self) -> Iterator[SignalSample]:
        for label, amp in zip(self.labels, self.signals):
            yield SignalSample(int(label), amp)

    @property
    def samples(self):
        return list(self)


def _generate_one(config: GeneratorConfig, label: int, rng: np.random.Generator):
    fs = config.sampling_frequency_hz
    t = np.arange(config.sample_length) / fs
    sig = config.classes[label]

    envelope = 1.0
    if sig.modulation_depth > 0:
        phase = rng.uniform(0, 2 * np.pi)
        envelope = 1.0 + sig.modulation_depth * np.sin(2 * np.pi * sig.modulation_hz * t + phase)
    x = config.base_amplitude * envelope * np.sin(2 * np.pi * config.base_frequency_hz * t)

    if sig.burst_amplitude > 0:
        offset = rng.uniform(0, sig.burst_period_s)
        severity = rng.uniform(1 - config.severity_jitter, 1 + config.severity_jitter)
        # include one burst before t=0 so the ringing tail enters the window
        centers = offset + sig.burst_period_s * np.arange(-1, int(t[-1] / sig.burst_period_s) + 2)
        bursts = np.zeros_like(t)
        for c in centers:
            bursts += np.exp(-0.5 * ((t - c) / sig.burst_width_s) ** 2)
        carrier = np.sin(2 * np.pi * sig.burst_carrier_hz * t + rng.uniform(0, 2 * np.pi))
        x = x + sig.burst_amplitude * severity * bursts * carrier

    if config.noise_sigma > 0:
        x = x + rng.normal(0.0, config.noise_sigma, size=t.shape)
    return x


def generate_synthetic_dataset(config: GeneratorConfig) -> RawDataset:
    """Generate ``samples_per_class`` samples for each of the six classes.

    Samples are ordered by class, then by index within the class. Sample
    ``i`` uses child stream ``i`` of ``SeedSequence(config.seed)``.
    """
    config.validate()
    labels = np.repeat(np.arange(N_CLASSES), config.samples_per_class)
    streams = np.random.SeedSequence(config.seed).spawn(len(labels))
    signals = np.empty((len(labels), config.sample_length))
    for i, (label, ss) in enumerate(zip(labels, streams)):
        signals[i] = _generate_one(config, int(label), np.random.default_rng(ss))
    return RawDataset(signals, labels, config.sampling_frequency_hz)


def write_signals(dataset: RawDataset, path):
    """Write ``label,a_0,...,a_{L-1}`` rows, no header, full float precision."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        for label, amp in zip(dataset.labels, dataset.signals):
            fh.write(str(int(label)))
            fh.write(",")
            fh.write(",".join(repr(float(v)) for v in amp))
            fh.write("\n")


def load_signals(path, sample_length=None, sampling_frequency_hz=20_000.0) -> RawDataset:
    """Read a signal CSV. ``sample_length=None`` takes the length of the first row."""
    labels, rows = [], []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                label = int(row[0])
            except ValueError:
                raise ParseError(f"label {row[0]!r} is not an integer", row=i) from None
            if not 0 <= label < N_CLASSES:
                raise ParseError(f"unknown label {label}", row=i)
            values = row[1:]
            if sample_length is None:
                sample_length = len(values)
            if len(values) != sample_length:
                raise ParseError(f"expected {sample_length} values, got {len(values)}", row=i)
            try:
                rows.append(np.array(values, dtype=float))
            except ValueError as exc:
                raise ParseError(f"non-numeric amplitude ({exc})", row=i) from None
            labels.append(label)
    if not rows:
        raise ParseError(f"{path}: no samples")
    return RawDataset(np.vstack(rows), np.array(labels), sampling_frequency_hz)


def class_std_means(dataset: RawDataset) -> np.ndarray:
    """Mean per-sample standard deviation for each class present."""
    sds = dataset.signals.std(axis=1, ddof=1)
    return np.array([sds[dataset.labels == c].mean() for c in range(N_CLASSES)])


def subset(dataset: RawDataset, index: Sequence[int]) -> RawDataset:
    index = np.asarray(index)
    return RawDataset(dataset.signals[index], dataset.labels[index],
                      dataset.sampling_frequency_hz, dataset.class_names)
