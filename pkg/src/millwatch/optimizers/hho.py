"""Harris hawks optimization."""

import numpy as np

from .base import Elite, Evaluator, OptimizerConfig, SearchSpace, finish
from .levy import levy_sample


def escaping_energy(E0, t, T):
    return 2 * E0 * (1 - t / T)


def jump_strength(r):
    return 2 * (1 - r)


def population_mean(X):
    return np.asarray(X).mean(axis=0)


def soft_besiege(x, rabbit, E, J):
    return (rabbit - x) - E * np.abs(J * rabbit - x)


def hard_besiege(x, rabbit, E):
    return rabbit - E * np.abs(rabbit - x)


def hho(fitness, space: SearchSpace, config: OptimizerConfig, seed=0, n_jobs=1):
    """Each generation draws all random numbers first, then evaluates the
    moves and the rapid-dive candidates in one batch. A dive replaces the
    hawk only on strict improvement, trying Y before Z."""
    rng = np.random.default_rng(seed)
    N, T = config.N, config.T
    beta = config.params["levy_beta"]
    dim, lb, ub = space.dim, space.lb, space.ub
    evaluate = Evaluator(fitness, space, n_jobs)
    X = space.sample(rng, N)
    F = evaluate(X)
    elite = Elite().update(X, F)
    trace = []
    for t in range(T):
        rabbit = elite.position
        Xm = population_mean(X)
        moves, dives = {}, {}
        for i in range(N):
            E = escaping_energy(2 * rng.random() - 1, t, T)
            J = jump_strength(rng.random())
            if abs(E) >= 1:
                if rng.random() >= 0.5:
                    xr = X[rng.integers(N)]
                    r1, r2 = rng.random(2)
                    moves[i] = xr - r1 * np.abs(xr - 2 * r2 * X[i])
                else:
                    r3, r4 = rng.random(2)
                    moves[i] = (rabbit - Xm) - r3 * (lb + r4 * (ub - lb))
            elif rng.random() >= 0.5:
                if abs(E) >= 0.5:
                    moves[i] = soft_besiege(X[i], rabbit, E, J)
                else:
                    moves[i] = hard_besiege(X[i], rabbit, E)
            else:
                ref = X[i] if abs(E) >= 0.5 else Xm
                Y = rabbit - E * np.abs(J * rabbit - ref)
                Z = Y + rng.random(dim) * levy_sample(beta, rng, dim)
                dives[i] = (space.clip(Y), space.clip(Z))
        rows = [space.clip(moves[i]) for i in sorted(moves)]
        for i in sorted(dives):
            rows.extend(dives[i])
        values = evaluate(np.array(rows)) if rows else np.empty(0)
        for n, i in enumerate(sorted(moves)):
            X[i], F[i] = rows[n], values[n]
        base = len(moves)
        for n, i in enumerate(sorted(dives)):
            (Y, Z), fy, fz = dives[i], values[base + 2 * n], values[base + 2 * n + 1]
            if fy > F[i]:
                X[i], F[i] = Y, fy
            elif fz > F[i]:
                X[i], F[i] = Z, fz
        elite.update(X, F)
        trace.append(elite.fitness)
    return finish(config, seed, elite, trace, evaluate)
