"""Monarch butterfly optimization."""

import math

import numpy as np

from .base import Elite, Evaluator, OptimizerConfig, SearchSpace, finish
from .levy import levy_sample


def subpopulation_sizes(N, p):
    np1 = min(max(math.ceil(p * N), 1), N - 1)
    return np1, N - np1


def walk_scale(S_max, t):
    """Step weight S_max / t**2 of the adjusting operator (t starts at 1)."""
    return S_max / t ** 2


def migrate_from_land1(r, p):
    """True when the migration gate picks a donor from subpopulation 1."""
    return r <= p


def mbo(fitness, space: SearchSpace, config: OptimizerConfig, seed=0, n_jobs=1):
    rng = np.random.default_rng(seed)
    N, T, prm = config.N, config.T, config.params
    p, peri, bar = prm["p"], prm["peri"], prm["BAR"]
    dim = space.dim
    evaluate = Evaluator(fitness, space, n_jobs)
    X = space.sample(rng, N)
    F = evaluate(X)
    elite = Elite().update(X, F)
    np1, np2 = subpopulation_sizes(N, p)
    trace = []
    for t in range(1, T + 1):
        order = np.argsort(-F, kind="stable")
        X, F = X[order], F[order]
        land1, land2 = X[:np1], X[np1:]
        alpha = walk_scale(prm["S_max"], t)
        new = np.empty_like(X)
        for i in range(np1):
            for k in range(dim):
                if migrate_from_land1(rng.random() * peri, p):
                    new[i, k] = land1[rng.integers(np1), k]
                else:
                    new[i, k] = land2[rng.integers(np2), k]
        for i in range(np1, N):
            dx = levy_sample(prm["levy_beta"], rng, dim)
            for k in range(dim):
                if rng.random() <= p:
                    new[i, k] = elite.position[k]
                else:
                    new[i, k] = land2[rng.integers(np2), k]
                    if rng.random() > bar:
                        new[i, k] += alpha * (dx[k] - 0.5)
        new = space.clip(new)
        Fn = evaluate(new)
        better = Fn > F
        X[better], F[better] = new[better], Fn[better]
        elite.update(X, F)
        trace.append(elite.fitness)
    return finish(config, seed, elite, trace, evaluate)
