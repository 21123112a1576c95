"""scikit-learn style wrappers around the exact explainer and the S-R-I
decomposition, so they slot into pipelines and ``get_params``/``set_params``
tooling."""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .dataset import Dataset, check_seed, default_feature_names, sample_background
from .expr import ModelExpr, parse_model
from .shapley import HARD_FEATURE_LIMIT, check_feature_limit, explain_dataset
from .sri import decompose_all


def _resolve_model(model, n_features):
    if isinstance(model, ModelExpr):
        if model.n_features != n_features:
            raise ValueError(
                f"model declared for {model.n_features} features, data has {n_features}"
            )
        return model
    if isinstance(model, str):
        return parse_model(model, n_features)
    raise TypeError(f"model must be an expression string or ModelExpr, got {type(model).__name__}")


class ExactShapExplainer(TransformerMixin, BaseEstimator):
    """Exact interventional SHAP values for an expression model.

    ``fit`` draws the background set; ``transform`` maps observations to
    their (m, n) SHAP values.

    Parameters
    ----------
    model : str or ModelExpr
        Model expression over ``x1 .. xn``.
    background_size : int or None
        Rows drawn (without replacement) from the fit data as background.
        ``None`` uses all of it.
    random_state : int
        Seed for background sampling.
    n_jobs : int
        Worker threads; results do not depend on it.
    max_features : int
        Enumeration limit, at most 20.
    """

    def __init__(self, model, background_size=None, random_state=0, n_jobs=1,
                 max_features=HARD_FEATURE_LIMIT):
        self.model = model
        self.background_size = background_size
        self.random_state = random_state
        self.n_jobs = n_jobs
        self.max_features = max_features

    def fit(self, X, y=None):
        names = getattr(X, "columns", None)
        X = check_array(X, dtype=float)
        n = X.shape[1]
        check_feature_limit(n, self.max_features)
        self.model_ = _resolve_model(self.model, n)
        data = Dataset(X, default_feature_names(n) if names is None else names)
        k = data.n_observations if self.background_size is None else self.background_size
        self.background_ = sample_background(data, k, check_seed(self.random_state))
        self.n_features_in_ = n
        return self

    def explain(self, X):
        """Full :class:`~shapsri.shapley.Explanation` for the rows of ``X``."""
        check_is_fitted(self, "background_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return explain_dataset(
            self.model_, X, self.background_, n_jobs=self.n_jobs, max_features=self.max_features
        )

    def transform(self, X):
        return self.explain(X).shap_values

    def shap_interaction_values(self, X):
        return self.explain(X).interaction_values


class SRIDecomposition(BaseEstimator):
    """Pairwise synergy, redundancy and independence of model features.

    After ``fit(X)``, ``synergy_[i, j]`` is the share of feature i's SHAP
    vector that is synergistic with feature j (similarly ``redundancy_`` and
    ``independence_``).  The diagonal and undefined pairs are NaN.
    """

    def __init__(self, model, background_size=None, random_state=0, n_jobs=1,
                 max_features=HARD_FEATURE_LIMIT):
        self.model = model
        self.background_size = background_size
        self.random_state = random_state
        self.n_jobs = n_jobs
        self.max_features = max_features

    def fit(self, X, y=None):
        explainer = ExactShapExplainer(
            self.model, self.background_size, self.random_state, self.n_jobs, self.max_features
        ).fit(X)
        explanation = explainer.explain(X)
        result = decompose_all(
            explanation.shap_values,
            explanation.interaction_values,
            output_scale=explanation.output_scale,
        )
        self.explainer_ = explainer
        self.explanation_ = explanation
        self.result_ = result
        self.synergy_ = result.S
        self.redundancy_ = result.R
        self.independence_ = result.I
        self.undefined_pairs_ = result.undefined_pairs
        self.n_features_in_ = explainer.n_features_in_
        return self
