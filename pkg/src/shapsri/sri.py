"""Synergy / redundancy / independence decomposition of SHAP vectors.

Every vector here lives in sample space: one entry per observation.  Inner
products are uncentered (no mean subtraction), so "variance" below means
squared norm and "covariance" means dot product.

For an ordered pair (i, j):

* the interaction vector phi_ij is first made orthogonal to both main-effect
  vectors phi_ii and phi_jj;
* synergy ``syn`` is the projection of phi_i onto that corrected vector and
  autonomy ``aut = phi_i - syn``;
* redundancy ``red`` is the projection of ``aut`` onto the autonomy vector of
  the reverse pair (j, i), and independence ``ind = aut - red``.

S, R and I are the squared norms of syn, red and ind relative to phi_i.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# a vector counts as zero when its norm is below ZERO_RTOL times the largest
# SHAP-vector norm (or output scale) of the decomposition
ZERO_RTOL = 1e-9
# scalars may stray this far outside [0, 1] from rounding before we object
RANGE_ATOL = 1e-12


class DecompositionError(ArithmeticError):
    pass


def _vec(v):
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"sample vectors must be 1-D, got shape {v.shape}")
    return v


def _same_length(*vs):
    lengths = {len(v) for v in vs}
    if len(lengths) > 1:
        raise ValueError(f"sample vectors differ in length: {sorted(lengths)}")


def dot(v, w):
    """Uncentered inner product sum_u v_u w_u."""
    v, w = _vec(v), _vec(w)
    _same_length(v, w)
    return float(v @ w)


def project(v, w, zero_tol=0.0):
    """Projection of ``v`` onto the line spanned by ``w``.

    Returns the zero vector when ``w`` has norm <= ``zero_tol``.
    """
    ww = dot(w, w)
    if ww == 0.0 or np.sqrt(ww) <= zero_tol:
        return np.zeros_like(v, dtype=float)
    return (dot(v, w) / ww) * w


def orthogonalize_interaction(phi_ij, phi_ii, phi_jj):
    """Remove the main-effect directions from an interaction vector.

    Returns ``(corrected, alpha, beta)`` with
    ``corrected = phi_ij - alpha * phi_ii - beta * phi_jj`` orthogonal to both
    main effects.  When the main effects are collinear (or zero) the
    minimum-norm least-squares coefficients are used.
    """
    p, a, b = _vec(phi_ij), _vec(phi_ii), _vec(phi_jj)
    _same_length(p, a, b)
    A = np.column_stack([a, b])
    if not A.any():
        return p.copy(), 0.0, 0.0
    coef = np.linalg.lstsq(A, p, rcond=None)[0]
    resid = p - A @ coef
    # one refinement pass tightens orthogonality when A is ill-conditioned
    fix = np.linalg.lstsq(A, resid, rcond=None)[0]
    coef = coef + fix
    resid = resid - A @ fix
    return resid, float(coef[0]), float(coef[1])


@dataclass(frozen=True, eq=False)
class PairDecomposition:
    """Decomposition of phi_i relative to feature j.

    ``syn + red + ind`` reconstructs phi_i; the three parts are mutually
    orthogonal.
    """

    syn: np.ndarray
    aut: np.ndarray
    red: np.ndarray
    ind: np.ndarray
    corrected_interaction: np.ndarray
    i: int = -1
    j: int = -1
    alpha: float = 0.0
    beta: float = 0.0


def autonomy(phi_i, phi_ij_corrected, zero_tol=0.0):
    """phi_i minus its projection onto the corrected interaction vector."""
    return _vec(phi_i) - project(phi_i, _vec(phi_ij_corrected), zero_tol)


def decompose_pair(
    phi_i, phi_j, phi_ij_corrected, aut_j_given_i, *, i=-1, j=-1, alpha=0.0, beta=0.0, zero_tol=0.0
):
    """Split phi_i into synergy, redundancy and independence relative to j.

    ``aut_j_given_i`` is the autonomy vector of the reverse pair, i.e.
    phi_j minus its projection onto the same corrected interaction vector.
    Projections onto vectors with norm <= ``zero_tol`` are taken as zero.
    """
    phi_i, phi_j = _vec(phi_i), _vec(phi_j)
    inter, aut_j = _vec(phi_ij_corrected), _vec(aut_j_given_i)
    _same_length(phi_i, phi_j, inter, aut_j)
    syn = project(phi_i, inter, zero_tol)
    aut = phi_i - syn
    red = project(aut, aut_j, zero_tol)
    ind = aut - red
    return PairDecomposition(syn, aut, red, ind, inter, i, j, alpha, beta)


def _check_unit(value, name):
    if not -RANGE_ATOL <= value <= 1 + RANGE_ATOL:
        raise DecompositionError(f"{name} = {value!r} lies outside [0, 1]")
    return min(max(value, 0.0), 1.0)


def sri_scalars(d, phi_i, zero_tol=0.0):
    """(S, R, I) for one pair, or ``None`` when phi_i is a zero vector."""
    phi_i = _vec(phi_i)
    norm2 = dot(phi_i, phi_i)
    if norm2 == 0.0 or np.sqrt(norm2) <= zero_tol:
        return None
    s = _check_unit(dot(d.syn, d.syn) / norm2, "S")
    r = _check_unit(dot(d.red, d.red) / norm2, "R")
    i = _check_unit(dot(d.ind, d.ind) / norm2, "I")
    return s, r, i


def _sq_corr(v, w):
    vv, ww = dot(v, v), dot(w, w)
    if vv == 0.0 or ww == 0.0:
        return 0.0
    return dot(v, w) ** 2 / (vv * ww)


def characterizations(d, phi_i, aut_j_given_i):
    """Three equivalent forms of each of S, R, I as a 3x3 array.

    Rows are S, R, I.  Columns are the projection form <v, phi_i>/|phi_i|^2,
    the squared-norm ratio |v|^2/|phi_i|^2, and the squared uncentered
    correlation form (for R: (1 - S) corr^2(aut_ij, aut_ji); for I: 1 - S - R).
    Zero-direction conventions match :func:`decompose_pair`: a synergy or
    redundancy projection onto a zero vector contributes zero.
    """
    phi_i = _vec(phi_i)
    norm2 = dot(phi_i, phi_i)
    out = np.empty((3, 3))
    for row, v in enumerate((d.syn, d.red, d.ind)):
        out[row, 0] = dot(v, phi_i) / norm2
        out[row, 1] = dot(v, v) / norm2
    s3 = _sq_corr(phi_i, d.corrected_interaction) if d.syn.any() else 0.0
    r3 = (1 - s3) * _sq_corr(d.aut, aut_j_given_i) if d.red.any() else 0.0
    out[:, 2] = (s3, r3, 1 - s3 - r3)
    return out


@dataclass(frozen=True, eq=False)
class SriResult:
    """S, R and I matrices indexed [i, j] = value of feature i relative to j.

    The diagonal and undefined pairs are NaN in memory; serializers write them
    as empty cells / nulls.
    """

    S: np.ndarray
    R: np.ndarray
    I: np.ndarray
    undefined_pairs: list = field(default_factory=list)
    pairs: dict = field(default_factory=dict, repr=False)

    @property
    def n_features(self):
        return self.S.shape[0]

    def defined_mask(self):
        return ~np.isnan(self.S)


def decompose_all(shap, inter, *, output_scale=None, rtol=ZERO_RTOL, keep_pairs=False):
    """S-R-I decomposition of every ordered feature pair.

    ``shap`` is (m, n) and ``inter`` is (m, n, n) with the main effects on the
    diagonal.  ``output_scale`` (e.g. the largest absolute model output) sets
    the floor below which a vector counts as zero; without it only the largest
    SHAP-vector norm is used.  Pairs whose SHAP vector phi_i is zero are listed
    in ``undefined_pairs`` as 0-based (i, j) tuples.
    """
    shap = np.asarray(shap, dtype=float)
    inter = np.asarray(inter, dtype=float)
    if shap.ndim != 2 or inter.ndim != 3:
        raise ValueError(f"expected (m, n) and (m, n, n) arrays, got {shap.shape} and {inter.shape}")
    m, n = shap.shape
    if inter.shape != (m, n, n):
        raise ValueError(f"interaction tensor shape {inter.shape} does not match SHAP matrix {shap.shape}")
    if not (np.isfinite(shap).all() and np.isfinite(inter).all()):
        raise ValueError("SHAP inputs contain non-finite values")

    scale = float(np.sqrt((shap**2).sum(axis=0)).max()) if m else 0.0
    if output_scale is not None:
        scale = max(scale, abs(float(output_scale)) * np.sqrt(m))
    zero_tol = rtol * scale

    S = np.full((n, n), np.nan)
    R = np.full((n, n), np.nan)
    I = np.full((n, n), np.nan)
    undefined = []
    pairs = {}
    for i in range(n):
        for j in range(i + 1, n):
            corrected, alpha, beta = orthogonalize_interaction(
                inter[:, i, j], inter[:, i, i], inter[:, j, j]
            )
            # both autonomy vectors come from the same corrected direction
            aut_i = autonomy(shap[:, i], corrected, zero_tol)
            aut_j = autonomy(shap[:, j], corrected, zero_tol)
            for a, b, aut_b, coefs in ((i, j, aut_j, (alpha, beta)), (j, i, aut_i, (beta, alpha))):
                d = decompose_pair(
                    shap[:, a], shap[:, b], corrected, aut_b,
                    i=a, j=b, alpha=coefs[0], beta=coefs[1], zero_tol=zero_tol,
                )
                if keep_pairs:
                    pairs[(a, b)] = (d, aut_b)
                values = sri_scalars(d, shap[:, a], zero_tol)
                if values is None:
                    undefined.append((a, b))
                else:
                    S[a, b], R[a, b], I[a, b] = values
    return SriResult(S, R, I, sorted(undefined), pairs)
