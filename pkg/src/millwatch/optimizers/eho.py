"""Elephant herding optimization."""

import numpy as np

from .base import Elite, Evaluator, OptimizerConfig, SearchSpace, finish


def clan_update(x, matriarch, alpha, r):
    """Move an elephant toward its clan matriarch by ``alpha * r``."""
    return x + alpha * (matriarch - x) * r


def matriarch_update(center, beta):
    return beta * np.asarray(center)


def separate(space: SearchSpace, r):
    """Replacement for the worst elephant of a clan (before clamping)."""
    return space.lb + (space.ub - space.lb + 1) * r


def clans(N, n_clans):
    """Fixed contiguous index chunks of equal size."""
    if N % n_clans:
        raise ValueError(f"N={N} is not divisible into {n_clans} clans")
    return np.arange(N).reshape(n_clans, N // n_clans)


def eho(fitness, space: SearchSpace, config: OptimizerConfig, seed=0, n_jobs=1):
    rng = np.random.default_rng(seed)
    N, T, p = config.N, config.T, config.params
    evaluate = Evaluator(fitness, space, n_jobs)
    X = space.sample(rng, N)
    F = evaluate(X)
    elite = Elite().update(X, F)
    trace = []
    groups = clans(N, p["n_clans"])
    for _ in range(T):
        new = X.copy()
        for members in groups:
            order = members[np.argsort(-F[members], kind="stable")]
            head, worst = order[0], order[-1]
            for j in order[1:]:
                new[j] = clan_update(X[j], X[head], p["alpha"], rng.random(space.dim))
            new[head] = matriarch_update(X[members].mean(axis=0), p["beta"])
            new[worst] = separate(space, rng.random(space.dim))
        X = space.clip(new)
        F = evaluate(X)
        elite.update(X, F)
        trace.append(elite.fitness)
    return finish(config, seed, elite, trace, evaluate)
