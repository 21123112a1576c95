"""Exact Shapley values and SHAP interaction values by enumerating all 2^n
coalitions of features.

A coalition is an integer bit mask: bit ``i`` (0-based) set means feature
``x{i+1}`` is present.  The value of a coalition for an observation ``x`` is
the interventional expectation

    f_x(S) = mean over background rows b of f(x_S, b_{not S}),

i.e. features in ``S`` are taken from ``x`` and all others from whole
background rows.  The full coalition is ``f(x)`` and the empty coalition is
the background mean of ``f``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np
from joblib import Parallel, delayed

from .expr import ModelDomainError, evaluate_batch, to_text

HARD_FEATURE_LIMIT = 20
# observations per work unit; fixed so results do not depend on worker count
CHUNK_SIZE = 32


class FeatureLimitError(ValueError):
    pass


class CoalitionDomainError(ModelDomainError):
    """A model domain error raised while filling coalition values."""

    def __init__(self, cause, observation, background_row):
        self.observation = observation
        self.background_row = background_row
        self.cause = cause
        where = "full coalition" if background_row is None else f"background row {background_row}"
        self.detail = f"{where}: {cause.reason} in `{to_text(cause.node)}`"
        ArithmeticError.__init__(self, f"observation {observation}, {self.detail}")
        self.node, self.reason, self.row = cause.node, cause.reason, cause.row


class ExplanationError(ArithmeticError):
    """One or more observations could not be explained."""

    def __init__(self, failures):
        self.failures = failures  # list of (observation index, message)
        shown = "; ".join(f"row {u}: {msg}" for u, msg in failures[:5])
        more = f" (+{len(failures) - 5} more)" if len(failures) > 5 else ""
        super().__init__(f"{len(failures)} observation(s) failed: {shown}{more}")


@dataclass(frozen=True, eq=False)
class Explanation:
    """Per-observation attributions for a whole dataset.

    ``shap_values[u, i]`` is phi_i for observation u, so column i is the
    SHAP vector of feature i.  ``interaction_values[u, i, j]`` is phi_ij, with
    the main effects phi_ii on the diagonal.
    """

    shap_values: np.ndarray
    interaction_values: np.ndarray
    predictions: np.ndarray
    base_value: float

    @property
    def n_observations(self):
        return self.shap_values.shape[0]

    @property
    def n_features(self):
        return self.shap_values.shape[1]

    @property
    def output_scale(self):
        """Largest absolute model output seen, a yardstick for numerical zero."""
        return float(max(np.abs(self.predictions).max(), abs(self.base_value)))


def _matrix(obj):
    return np.asarray(getattr(obj, "values", obj), dtype=float)


def check_feature_limit(n, max_features=HARD_FEATURE_LIMIT):
    if max_features > HARD_FEATURE_LIMIT:
        raise FeatureLimitError(
            f"max_features may only be lowered below {HARD_FEATURE_LIMIT}, got {max_features}"
        )
    if n > max_features:
        raise FeatureLimitError(
            f"{n} features exceed the exact-enumeration limit of {max_features}"
        )


def mask_bits(mask, n):
    return np.array([(mask >> i) & 1 for i in range(n)], dtype=bool)


def shapley_weights(n):
    """w[s] = s! (n-s-1)! / n! for coalition sizes s = 0..n-1."""
    return np.array(
        [float(Fraction(factorial(s) * factorial(n - s - 1), factorial(n))) for s in range(n)]
    )


def interaction_weights(n):
    """w[s] = s! (n-s-2)! / (2 (n-1)!) for coalition sizes s = 0..n-2."""
    if n < 2:
        return np.zeros(0)
    return np.array(
        [
            float(Fraction(factorial(s) * factorial(n - s - 2), 2 * factorial(n - 1)))
            for s in range(n - 1)
        ]
    )


def _row_means(vals):
    """Row means of a 2-D array, shifted by each row's first entry.

    Exact when a row is constant, which keeps dummy features at exactly zero.
    """
    first = vals[:, :1]
    return first[:, 0] + (vals - first).mean(axis=1)


def _popcounts(n):
    return np.array([bin(s).count("1") for s in range(1 << n)])


def coalition_table(model, X, bg):
    """Fill the (m, 2^n) table of coalition values for the rows of ``X``.

    Column ``S`` holds f_x(S) for every observation.  Each row is computed
    independently of the others.
    """
    X = _matrix(X)
    B = _matrix(bg)
    m, n = X.shape
    k = B.shape[0]
    if B.ndim != 2 or B.shape[1] != n or n != model.n_features:
        raise ValueError(
            f"dimension mismatch: data {X.shape}, background {B.shape}, "
            f"model expects {model.n_features} features"
        )
    full = (1 << n) - 1
    V = np.empty((m, 1 << n))

    try:
        f_bg = evaluate_batch(model, B)
    except ModelDomainError as exc:
        raise CoalitionDomainError(exc, 0, exc.row) from exc
    V[:, 0] = _row_means(f_bg[None, :])[0]

    for mask in range(1, full):
        sel = mask_bits(mask, n)
        Z = np.where(sel, X[:, None, :], B[None, :, :]).reshape(m * k, n)
        try:
            vals = evaluate_batch(model, Z)
        except ModelDomainError as exc:
            raise CoalitionDomainError(exc, exc.row // k, exc.row % k) from exc
        V[:, mask] = _row_means(vals.reshape(m, k))

    try:
        V[:, full] = evaluate_batch(model, X)
    except ModelDomainError as exc:
        raise CoalitionDomainError(exc, exc.row, None) from exc
    return V


def coalition_value(model, x, S, bg):
    """Interventional value f_x(S) of coalition mask ``S`` for one point."""
    x = np.asarray(x, dtype=float)
    B = _matrix(bg)
    n = model.n_features
    if x.shape != (n,) or B.ndim != 2 or B.shape[1] != n:
        raise ValueError(f"dimension mismatch: x {x.shape}, background {B.shape}, n={n}")
    if not 0 <= S < (1 << n):
        raise ValueError(f"coalition mask {S} out of range for {n} features")
    full = (1 << n) - 1
    try:
        if S == full:
            return float(evaluate_batch(model, x[None, :])[0])
        Z = np.where(mask_bits(S, n), x[None, :], B)
        return float(_row_means(evaluate_batch(model, Z)[None, :])[0])
    except ModelDomainError as exc:
        raise CoalitionDomainError(exc, 0, None if S == full else exc.row) from exc


def shap_from_table(V, n):
    """Shapley values (m, n) from a coalition table, masks summed in increasing order."""
    m = V.shape[0]
    w = shapley_weights(n)
    sizes = _popcounts(n)
    masks = np.arange(1 << n)
    phi = np.empty((m, n))
    for i in range(n):
        bit = 1 << i
        without = masks[(masks & bit) == 0]
        delta = V[:, without | bit] - V[:, without]
        phi[:, i] = (delta * w[sizes[without]]).sum(axis=1)
    return phi


def interactions_from_table(V, n, phi):
    """SHAP interaction values (m, n, n); the diagonal holds the main effects.

    Off-diagonal values are computed once per unordered pair and mirrored,
    so the result is exactly symmetric.
    """
    m = V.shape[0]
    out = np.zeros((m, n, n))
    if n >= 2:
        w = interaction_weights(n)
        sizes = _popcounts(n)
        masks = np.arange(1 << n)
        for i in range(n):
            for j in range(i + 1, n):
                bi, bj = 1 << i, 1 << j
                S = masks[(masks & (bi | bj)) == 0]
                d = (V[:, S | bi | bj] - V[:, S | bi]) - (V[:, S | bj] - V[:, S])
                val = (d * w[sizes[S]]).sum(axis=1)
                out[:, i, j] = val
                out[:, j, i] = val
    for i in range(n):
        main = phi[:, i].copy()
        for j in range(n):
            if j != i:
                main -= out[:, i, j]
        out[:, i, i] = main
    return out


def shap_values(model, x, bg, max_features=HARD_FEATURE_LIMIT):
    """Exact SHAP values of one observation, length n."""
    n = model.n_features
    check_feature_limit(n, max_features)
    x = np.asarray(x, dtype=float)
    V = coalition_table(model, x[None, :], bg)
    return shap_from_table(V, n)[0]


def interaction_values(model, x, bg, max_features=HARD_FEATURE_LIMIT):
    """Exact SHAP interaction matrix of one observation, n x n."""
    n = model.n_features
    check_feature_limit(n, max_features)
    x = np.asarray(x, dtype=float)
    V = coalition_table(model, x[None, :], bg)
    phi = shap_from_table(V, n)
    return interactions_from_table(V, n, phi)[0]


def _explain_chunk(model, X, B, start):
    n = X.shape[1]
    try:
        V = coalition_table(model, X, B)
    except CoalitionDomainError:
        # locate every failing observation in this chunk
        failures = []
        for u in range(X.shape[0]):
            try:
                coalition_table(model, X[u : u + 1], B)
            except CoalitionDomainError as exc:
                failures.append((start + u, exc.detail))
        return start, None, failures
    bad = ~np.isfinite(V).all(axis=1)
    if bad.any():
        return start, None, [(start + int(u), "non-finite model output") for u in np.flatnonzero(bad)]
    phi = shap_from_table(V, n)
    inter = interactions_from_table(V, n, phi)
    return start, (phi, inter, V[:, -1].copy(), V[0, 0]), []


def explain_dataset(model, data, bg, n_jobs=1, max_features=HARD_FEATURE_LIMIT):
    """SHAP values and interaction values for every row of ``data``.

    Observations are processed in fixed-size chunks that are independent of
    each other, so the output is bit-identical for any ``n_jobs``.
    """
    X = _matrix(data)
    B = _matrix(bg)
    m, n = X.shape
    check_feature_limit(n, max_features)
    if n != model.n_features or B.ndim != 2 or B.shape[1] != n:
        raise ValueError(
            f"dimension mismatch: data {X.shape}, background {B.shape}, "
            f"model expects {model.n_features} features"
        )
    starts = range(0, m, CHUNK_SIZE)
    jobs = (delayed(_explain_chunk)(model, X[s : s + CHUNK_SIZE], B, s) for s in starts)
    results = Parallel(n_jobs=n_jobs, prefer="threads")(jobs)

    failures = [f for _, _, fs in results for f in fs]
    if failures:
        raise ExplanationError(sorted(failures))

    phi = np.empty((m, n))
    inter = np.empty((m, n, n))
    preds = np.empty(m)
    base = None
    for start, (p, it, f, b), _ in results:
        stop = start + p.shape[0]
        phi[start:stop] = p
        inter[start:stop] = it
        preds[start:stop] = f
        base = b
    return Explanation(phi, inter, preds, float(base))
