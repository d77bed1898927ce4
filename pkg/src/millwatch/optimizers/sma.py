"""Slime mould algorithm."""

import numpy as np

from .base import Elite, Evaluator, OptimizerConfig, SearchSpace, finish


def oscillation_limit(t, T):
    """a = arctanh(1 - t/T), argument clamped below 1 so t = 0 stays finite."""
    return float(np.arctanh(min(1 - t / T, 1 - 1e-12)))


def contraction(t, T):
    """Linear decay from 1 at t = 1 to 0 at t = T."""
    return 1.0 - (t - 1) / (T - 1) if T > 1 else 1.0


def approach_probability(fitness, best_so_far):
    return np.tanh(np.abs(np.asarray(fitness) - best_so_far))


def weights(F, r):
    """Per-candidate weight rows, ``r`` has shape ``(N, dim)``.

    Candidates are ranked by fitness; the better half gets
    ``1 + r*log10(...)``, the rest ``1 - r*log10(...)``.
    """
    F = np.asarray(F, dtype=float)
    N = len(F)
    order = np.argsort(-F, kind="stable")
    bF, wF = F[order[0]], F[order[-1]]
    spread = bF - wF
    ratio = (bF - F) / spread if spread > 0 else np.zeros(N)
    term = np.log10(ratio + 1)[:, None] * r
    rank = np.empty(N, dtype=int)
    rank[order] = np.arange(N)
    upper = (rank + 1 <= N / 2)[:, None]
    return np.where(upper, 1 + term, 1 - term)


def sma(fitness, space: SearchSpace, config: OptimizerConfig, seed=0, n_jobs=1):
    rng = np.random.default_rng(seed)
    N, T, z = config.N, config.T, config.params["z"]
    dim = space.dim
    evaluate = Evaluator(fitness, space, n_jobs)
    X = space.sample(rng, N)
    F = evaluate(X)
    elite = Elite().update(X, F)
    trace = []
    for t in range(1, T + 1):
        W = weights(F, rng.random((N, dim)))
        a = oscillation_limit(t, T)
        vc = contraction(t, T)
        p = approach_probability(F, elite.fitness)
        new = np.empty_like(X)
        for i in range(N):
            if rng.random() < z:
                new[i] = space.sample(rng, 1)[0]
                continue
            A, B = rng.integers(N, size=2)
            vb = rng.uniform(-a, a, dim)
            r = rng.random(dim)
            new[i] = np.where(r < p[i], elite.position + vb * (W[i] * X[A] - X[B]), vc * X[i])
        X = space.clip(new)
        F = evaluate(X)
        elite.update(X, F)
        trace.append(elite.fitness)
    return finish(config, seed, elite, trace, evaluate)
