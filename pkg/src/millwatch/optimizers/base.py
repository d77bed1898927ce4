"""Shared types for the black-box maximizers."""

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, MillwatchError

GOLDEN_RATIO = (1 + math.sqrt(5)) / 2

# Default population, generations and operator settings per algorithm.
ALGORITHM_DEFAULTS = {
    "eho": {"N": 30, "T": 50, "n_clans": 6, "alpha": 0.5, "beta": 0.5},
    "mbo": {"N": 16, "T": 50, "p": 5 / 12, "peri": 1.2, "BAR": 7 / 12, "S_max": 10.0,
            "levy_beta": 1.5},
    "hho": {"N": 50, "T": 50, "levy_beta": 1.5},
    "sma": {"N": 50, "T": 50, "z": 0.03},
    "msa": {"N": 50, "T": 50, "S_max": 0.1, "phi": GOLDEN_RATIO, "levy_beta": 1.5},
    "grid": {"grid_per_dim": 8},
    "random": {"n_candidates": 10},
}
SWARM_ALGORITHMS = ("eho", "mbo", "hho", "sma", "msa")
ALGORITHMS = tuple(ALGORITHM_DEFAULTS)


class BoundsViolation(MillwatchError):
    pass


@dataclass(frozen=True)
class SearchSpace:
    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.ndim != 1 or lo.shape != hi.shape or lo.size < 1:
            raise ConfigError("lower and upper must be 1-D of equal length")
        if not np.all(lo < hi):
            raise ConfigError("lower bound must be below upper bound in every dimension")
        object.__setattr__(self, "lower", tuple(float(v) for v in lo))
        object.__setattr__(self, "upper", tuple(float(v) for v in hi))

    @property
    def dim(self):
        return len(self.lower)

    @property
    def lb(self):
        return np.array(self.lower)

    @property
    def ub(self):
        return np.array(self.upper)

    def clip(self, X):
        return np.clip(X, self.lb, self.ub)

    def sample(self, rng, n):
        return self.lb + rng.random((n, self.dim)) * (self.ub - self.lb)

    def contains(self, X):
        X = np.atleast_2d(X)
        return bool(np.all(X >= self.lb) and np.all(X <= self.ub))


# C in [0.1, 300], gamma in [0.001, 1]
SVM_SPACE = SearchSpace((0.1, 0.001), (300.0, 1.0))


@dataclass
class OptimizerConfig:
    algorithm: str
    N: int = None
    T: int = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.algorithm not in ALGORITHM_DEFAULTS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        defaults = dict(ALGORITHM_DEFAULTS[self.algorithm])
        self.N = defaults.pop("N", None) if self.N is None else int(self.N)
        self.T = defaults.pop("T", None) if self.T is None else int(self.T)
        defaults.pop("N", None)
        defaults.pop("T", None)
        unknown = set(self.params) - set(defaults)
        if unknown:
            raise ConfigError(f"unknown {self.algorithm} parameters: {sorted(unknown)}")
        self.params = {**defaults, **self.params}
        self.validate()

    def __getitem__(self, key):
        return self.params[key]

    def validate(self):
        a, p = self.algorithm, self.params
        if a in SWARM_ALGORITHMS:
            if self.N < 2:
                raise ConfigError("population size N must be >= 2")
            if self.T < 1:
                raise ConfigError("generations T must be >= 1")
        if a == "eho":
            if p["n_clans"] < 1 or self.N % p["n_clans"]:
                raise ConfigError(f"N={self.N} is not divisible into {p['n_clans']} equal clans")
            if self.N // p["n_clans"] < 1:
                raise ConfigError("every clan needs at least one elephant")
        elif a == "mbo":
            if not (0 < p["p"] < 1 and 0 < p["BAR"] < 1):
                raise ConfigError("MBO p and BAR must lie in (0, 1)")
            if p["peri"] <= 0 or p["S_max"] <= 0:
                raise ConfigError("MBO peri and S_max must be positive")
        elif a == "sma":
            if not 0 <= p["z"] <= 0.1:
                raise ConfigError("SMA z must lie in [0, 0.1]")
        elif a == "msa":
            if p["S_max"] <= 0:
                raise ConfigError("MSA S_max must be positive")
        elif a == "grid":
            if p["grid_per_dim"] < 2:
                raise ConfigError("grid_per_dim must be >= 2")
        elif a == "random":
            if p["n_candidates"] < 1:
                raise ConfigError("n_candidates must be >= 1")
        for key in ("levy_beta",):
            if key in p and not 0 < p[key] <= 2:
                raise ConfigError("Levy beta must lie in (0, 2]")

    def to_dict(self):
        d = {"algorithm": self.algorithm}
        if self.N is not None:
            d["N"] = self.N
        if self.T is not None:
            d["T"] = self.T
        d.update(self.params)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        algorithm = d.pop("algorithm")
        return cls(algorithm, d.pop("N", None), d.pop("T", None), d)

    def max_evaluations(self, dim=2):
        """Analytic upper bound on fitness calls for this configuration."""
        N, T = self.N, self.T
        return {
            "eho": lambda: N * (T + 1),
            "mbo": lambda: N * (T + 1),
            "hho": lambda: N + 2 * N * T,
            "sma": lambda: N * (T + 1),
            "msa": lambda: N * (T + 1),
            "grid": lambda: self.params["grid_per_dim"] ** dim,
            "random": lambda: self.params["n_candidates"],
        }[self.algorithm]()


@dataclass
class OptimizationResult:
    algorithm: str
    config: dict
    seed: int
    best_position: list
    best_fitness: float
    trace: list
    n_evaluations: int
    cv_accuracy: float = None
    train_accuracy: float = None
    test_accuracy: float = None

    def to_dict(self):
        return {
            "algorithm": self.algorithm,
            "config": self.config,
            "seed": self.seed,
            "best_position": [float(v) for v in self.best_position],
            "best_fitness": float(self.best_fitness),
            "trace": [float(v) for v in self.trace],
            "n_evaluations": int(self.n_evaluations),
            "cv_accuracy": self.cv_accuracy,
            "train_accuracy": self.train_accuracy,
            "test_accuracy": self.test_accuracy,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: d.get(k) for k in cls.__dataclass_fields__})

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


class Evaluator:
    """Batch fitness evaluation with bound auditing and call counting.

    Rows are evaluated in order; with ``n_jobs > 1`` a thread pool maps the
    batch but results keep the row order, so parallel runs are identical
    to sequential ones.
    """

    def __init__(self, fitness, space: SearchSpace, n_jobs=1):
        self.fitness = fitness
        self.space = space
        self.n_jobs = n_jobs
        self.count = 0

    def __call__(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if not self.space.contains(X):
            raise BoundsViolation("candidate outside [LB, UB]")
        self.count += len(X)
        if self.n_jobs > 1 and len(X) > 1:
            with ThreadPoolExecutor(self.n_jobs) as pool:
                values = list(pool.map(self.fitness, X))
        else:
            values = [self.fitness(x) for x in X]
        return np.array(values, dtype=float)


class Elite:
    """Best-so-far memory; only a strictly better candidate replaces it."""

    def __init__(self):
        self.position = None
        self.fitness = -np.inf

    def update(self, X, F):
        k = int(np.argmax(F))
        if F[k] > self.fitness:
            self.fitness = float(F[k])
            self.position = np.array(X[k], dtype=float)
        return self


def finish(config: OptimizerConfig, seed, elite: Elite, trace, evaluator: Evaluator):
    return OptimizationResult(config.algorithm, config.to_dict(), seed,
                              elite.position.tolist(), elite.fitness, list(trace), evaluator.count)
