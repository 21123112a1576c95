import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

from shapsri import ExactShapExplainer, SRIDecomposition, parse_model
from shapsri.reference import linear_shap_closed_form


def test_get_params_and_clone():
    est = SRIDecomposition("x1 + x2", background_size=10, random_state=3, n_jobs=2)
    params = est.get_params()
    assert params["background_size"] == 10 and params["model"] == "x1 + x2"
    again = clone(est)
    assert again.get_params() == params


def test_transform_matches_closed_form():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 3))
    explainer = ExactShapExplainer("2*x1 - x3").fit(X)
    phi = explainer.transform(X)
    expected = np.array([linear_shap_closed_form([2, 0, -1], 0, x, X) for x in X])
    np.testing.assert_allclose(phi, expected, atol=1e-12)
    assert explainer.shap_interaction_values(X).shape == (40, 3, 3)


def test_background_subsample():
    X = np.random.default_rng(1).random((50, 2))
    explainer = ExactShapExplainer("x1*x2", background_size=7, random_state=4).fit(X)
    assert explainer.background_.shape == (7, 2)


def test_not_fitted():
    with pytest.raises(NotFittedError):
        ExactShapExplainer("x1").transform(np.zeros((2, 1)))


def test_feature_mismatch():
    explainer = ExactShapExplainer("x1").fit(np.zeros((3, 1)) + 1)
    with pytest.raises(ValueError):
        explainer.transform(np.zeros((3, 2)))
    with pytest.raises(ValueError):
        ExactShapExplainer(parse_model("x1", 2)).fit(np.zeros((3, 3)))


def test_in_pipeline():
    X = np.random.default_rng(2).normal(size=(30, 2))
    pipe = make_pipeline(StandardScaler(), ExactShapExplainer("x1 * x2"))
    phi = pipe.fit_transform(X)
    assert phi.shape == (30, 2)


def test_sri_decomposition_attributes():
    X = np.random.default_rng(3).random((200, 3))
    X[:, 2] = X[:, 1]
    est = SRIDecomposition("x1 + x2 + x3").fit(X)
    assert est.synergy_[0, 1] == 0.0
    assert est.redundancy_[1, 2] == pytest.approx(1.0, abs=1e-9)
    assert est.independence_[0, 1] > 0.9
    assert est.undefined_pairs_ == []
    assert np.isnan(est.synergy_[0, 0])
