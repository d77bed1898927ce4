"""Black-box maximizers over a box: five swarm methods plus grid and random search."""

from .base import (ALGORITHM_DEFAULTS, ALGORITHMS, GOLDEN_RATIO, SVM_SPACE, SWARM_ALGORITHMS,
                   BoundsViolation, Evaluator, OptimizationResult, OptimizerConfig, SearchSpace)
from .eho import eho
from .hho import hho
from .levy import levy_sample, levy_step, mantegna_sigma
from .mbo import mbo
from .msa import msa
from .search import grid_points, grid_search, random_search
from .sma import sma

RUNNERS = {"eho": eho, "mbo": mbo, "hho": hho, "sma": sma, "msa": msa,
           "grid": grid_search, "random": random_search}


def optimize(fitness, space, config, seed=0, n_jobs=1) -> OptimizationResult:
    """Maximize ``fitness`` over ``space`` with ``config.algorithm``."""
    if isinstance(config, str):
        config = OptimizerConfig(config)
    return RUNNERS[config.algorithm](fitness, space, config, seed=seed, n_jobs=n_jobs)


from .tuning import (COMPARISON_COLUMNS, comparison_csv, comparison_markdown,  # noqa: E402
                     comparison_row, read_jsonl, svm_fitness, tune_svm, write_jsonl)
