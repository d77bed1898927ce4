"""Exhaustive grid and random search baselines."""

import itertools

import numpy as np

from .base import Elite, Evaluator, OptimizerConfig, SearchSpace, finish


def _axis(lo, hi, n):
    return np.geomspace(lo, hi, n) if lo > 0 else np.linspace(lo, hi, n)


def grid_points(space: SearchSpace, per_dim):
    """Cartesian grid in lexicographic order, log-spaced on positive axes."""
    axes = [_axis(lo, hi, per_dim) for lo, hi in zip(space.lower, space.upper)]
    return np.array(list(itertools.product(*axes)))


def _running_best(F):
    return np.maximum.accumulate(F).tolist()


def grid_search(fitness, space: SearchSpace, config: OptimizerConfig, seed=0, n_jobs=1):
    evaluate = Evaluator(fitness, space, n_jobs)
    P = grid_points(space, config.params["grid_per_dim"])
    F = evaluate(P)
    # ties go to the lexicographically smallest position
    top = np.flatnonzero(F == F.max())
    k = top[np.lexsort(P[top].T[::-1])[0]]
    elite = Elite().update(P[k:k + 1], F[k:k + 1])
    return finish(config, seed, elite, _running_best(F), evaluate)


def random_search(fitness, space: SearchSpace, config: OptimizerConfig, seed=0, n_jobs=1):
    rng = np.random.default_rng(seed)
    n = config.params["n_candidates"]
    lo, hi = space.lb, space.ub
    positive = lo > 0
    u = rng.random((n, space.dim))
    P = np.where(positive, np.exp(np.log(np.where(positive, lo, 1))
                                  + u * (np.log(np.where(positive, hi, 1))
                                         - np.log(np.where(positive, lo, 1)))),
                 lo + u * (hi - lo))
    P = space.clip(P)
    evaluate = Evaluator(fitness, space, n_jobs)
    F = evaluate(P)
    elite = Elite().update(P, F)
    return finish(config, seed, elite, _running_best(F), evaluate)
