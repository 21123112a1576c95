import numpy as np
import pytest

from shapsri.dataset import BENCHMARK_MODEL, generate_benchmark_dataset
from shapsri.expr import parse_model
from shapsri.reference import linear_shap_closed_form, shapley_by_permutations
from shapsri.shapley import explain_dataset, shap_values

BG2 = np.array([[0.0, 0.0], [1.0, 1.0]])


def test_permutations_product_example():
    np.testing.assert_allclose(
        shapley_by_permutations(parse_model("x1*x2", 2), [1.0, 1.0], BG2), [0.25, 0.25]
    )


def test_permutations_dummy():
    phi = shapley_by_permutations(parse_model("x2", 2), [0.3, 0.9], BG2)
    assert phi[0] == 0.0


def test_permutations_benchmark_model_matches_engine():
    data = generate_benchmark_dataset(50, 11)
    model = parse_model(BENCHMARK_MODEL, 5)
    rows = [0, 17, 42]
    exp = explain_dataset(model, data.values[rows], data)
    for k, u in enumerate(rows):
        np.testing.assert_allclose(
            exp.shap_values[k], shapley_by_permutations(model, data.values[u], data), atol=1e-9
        )


def test_permutations_size_limit():
    model = parse_model("x1", 9)
    with pytest.raises(ValueError):
        shapley_by_permutations(model, np.zeros(9), np.zeros((1, 9)))


@pytest.mark.parametrize(
    "coef, x, bg, expected",
    [
        ([1, 1], [1, 1], BG2, [0.5, 0.5]),
        ([0, 0, 0], [3, 1, 2], np.ones((2, 3)), [0, 0, 0]),
        ([2, 0], [3, 9], np.array([[0.0, 5.0], [2.0, 1.0]]), [4, 0]),
    ],
)
def test_linear_closed_form(coef, x, bg, expected):
    np.testing.assert_allclose(linear_shap_closed_form(coef, 0.0, x, bg), expected)


def test_linear_closed_form_matches_engine():
    rng = np.random.default_rng(0)
    c = rng.normal(size=4)
    model = parse_model(" + ".join(f"({float(v)!r}) * x{i + 1}" for i, v in enumerate(c)) + " + 3", 4)
    x, bg = rng.normal(size=4), rng.normal(size=(6, 4))
    np.testing.assert_allclose(shap_values(model, x, bg), linear_shap_closed_form(c, 3.0, x, bg), atol=1e-12)
