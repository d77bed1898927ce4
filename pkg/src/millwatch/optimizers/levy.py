"""Mantegna Levy-flight steps shared by MBO, HHO and MSA."""

import math

import numpy as np


def mantegna_sigma(beta):
    num = math.gamma(1 + beta) * math.sin(math.pi * beta / 2)
    den = math.gamma((1 + beta) / 2) * beta * 2 ** ((beta - 1) / 2)
    return (num / den) ** (1 / beta)


def levy_step(u, v, beta=1.5):
    """0.01 * u * sigma / |v|**(1/beta) for given draws ``u`` and ``v``."""
    return 0.01 * np.asarray(u) * mantegna_sigma(beta) / np.abs(v) ** (1 / beta)


def levy_sample(beta, rng, size=None):
    """Levy step(s) with standard-normal ``u`` and ``v``."""
    if not 0 < beta <= 2:
        raise ValueError("beta must lie in (0, 2]")
    u = rng.standard_normal(size)
    v = rng.standard_normal(size)
    return levy_step(u, v, beta)
