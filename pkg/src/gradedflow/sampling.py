"""Deterministic sample points for pointwise comparisons."""

from functools import lru_cache

import numpy as np
from scipy.stats import qmc


@lru_cache(maxsize=256)
def _halton(dim, n, seed):
    if dim == 0:
        return np.zeros((n, 0))
    return qmc.Halton(d=dim, scramble=True, seed=seed).random(n)


def unit_samples(dim, n, seed=0):
    """``n`` low-discrepancy points in the unit cube of dimension ``dim``."""
    return _halton(int(dim), int(n), int(seed)).copy()


def box_samples(dim, n, low, high, seed=0):
    return low + (high - low) * unit_samples(dim, n, seed)


def base_points(names, config, n=None):
    """Sample assignments ``{name: value}`` for coefficient comparisons."""
    names = list(names)
    n = config.n_zero_samples if n is None else n
    pts = box_samples(len(names), n, config.sample_low, config.sample_high, config.seed)
    return [dict(zip(names, map(float, row))) for row in pts]
