"""Slow, independent oracles for testing the Shapley engine.

These sum over player orderings instead of coalitions and share nothing
with :mod:`shapsri.shapley` except the coalition value function itself.
"""

from itertools import permutations
from math import factorial

import numpy as np

from .shapley import coalition_value

MAX_ORACLE_FEATURES = 8


def shapley_by_permutations(model, x, bg):
    """Average marginal contribution of each feature over all n! orderings."""
    n = model.n_features
    if n > MAX_ORACLE_FEATURES:
        raise ValueError(f"permutation oracle supports at most {MAX_ORACLE_FEATURES} features, got {n}")
    cache = {}

    def value(mask):
        if mask not in cache:
            cache[mask] = coalition_value(model, x, mask, bg)
        return cache[mask]

    totals = [0.0] * n
    for order in permutations(range(n)):
        mask = 0
        for i in order:
            before = value(mask)
            mask |= 1 << i
            totals[i] += value(mask) - before
    return np.array(totals) / factorial(n)


def linear_shap_closed_form(coefficients, intercept, x, bg):
    """phi_i = c_i (x_i - mean of background column i) for f = c.x + b."""
    c = np.asarray(coefficients, dtype=float)
    B = np.asarray(getattr(bg, "values", bg), dtype=float)
    return c * (np.asarray(x, dtype=float) - B.mean(axis=0))
