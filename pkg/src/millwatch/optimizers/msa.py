"""Moth search algorithm."""

import math

import numpy as np

from .base import Elite, Evaluator, OptimizerConfig, SearchSpace, finish
from .levy import levy_sample


def flight_scale(S_max, t):
    return S_max / t ** 2


def straight_flight(y, best, lam, scale):
    """``lam * (y + scale * (best - y))``, scale is phi or 1/phi."""
    y = np.asarray(y, dtype=float)
    return lam * (y + scale * (np.asarray(best) - y))


def msa(fitness, space: SearchSpace, config: OptimizerConfig, seed=0, n_jobs=1):
    """The better half flies Levy steps, the worse half flies toward the best
    moth. The best moth found so far replaces the worst of each generation
    when the population has lost it."""
    rng = np.random.default_rng(seed)
    N, T, prm = config.N, config.T, config.params
    phi, dim = prm["phi"], space.dim
    evaluate = Evaluator(fitness, space, n_jobs)
    X = space.sample(rng, N)
    F = evaluate(X)
    elite = Elite().update(X, F)
    n1 = math.ceil(N / 2)
    trace = []
    for t in range(1, T + 1):
        order = np.argsort(-F, kind="stable")
        X, F = X[order], F[order]
        scale = flight_scale(prm["S_max"], t)
        new = np.empty_like(X)
        new[:n1] = X[:n1] + scale * levy_sample(prm["levy_beta"], rng, (n1, dim))
        for i in range(n1, N):
            lam = rng.random()
            s = phi if rng.random() < 0.5 else 1 / phi
            new[i] = straight_flight(X[i], elite.position, lam, s)
        X = space.clip(new)
        F = evaluate(X)
        if F.max() < elite.fitness:
            worst = int(np.argmin(F))
            X[worst], F[worst] = elite.position, elite.fitness
        elite.update(X, F)
        trace.append(elite.fitness)
    return finish(config, seed, elite, trace, evaluate)
