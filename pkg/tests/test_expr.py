import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shapsri.dataset import BENCHMARK_MODEL
from shapsri.expr import (
    BinOp,
    Call,
    Const,
    ExprSyntaxError,
    Feature,
    FeatureIndexError,
    ModelDomainError,
    Neg,
    Pi,
    UnknownIdentifierError,
    evaluate,
    evaluate_batch,
    parse_model,
    to_text,
)


def test_parse_simple_sum():
    assert parse_model("x1 + x2", 2).root == BinOp("+", Feature(1), Feature(2))


def test_parse_benchmark_model():
    root = parse_model(BENCHMARK_MODEL, 5).root
    two_pi_x = lambda k: BinOp("*", BinOp("*", Const(2.0), Pi()), k)  # noqa: E731
    first = Call("sin", two_pi_x(Feature(1)))
    second = Call("sin", BinOp("/", two_pi_x(BinOp("+", Feature(2), Feature(3))), Const(2.0)))
    expected = BinOp("+", BinOp("+", BinOp("*", first, second), Feature(4)), Feature(5))
    assert root == expected


def test_feature_out_of_range():
    with pytest.raises(FeatureIndexError) as err:
        parse_model("x1 + x3", 2)
    assert err.value.offset == 5


@pytest.mark.parametrize(
    "text, offset",
    [("x1 +", 4), ("(x1", 3), ("x1 $ x2", 3), ("x1 x2", 3), ("sin x1", 4), ("", 0)],
)
def test_syntax_errors_carry_offset(text, offset):
    with pytest.raises(ExprSyntaxError) as err:
        parse_model(text, 2)
    assert err.value.offset == offset


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError):
        parse_model("tan(x1)", 1)
    with pytest.raises(UnknownIdentifierError):
        parse_model("y1", 1)


def test_byte_offset_after_non_ascii():
    with pytest.raises(ExprSyntaxError) as err:
        parse_model("x1 + é", 1)
    assert err.value.offset == 5


@pytest.mark.parametrize(
    "text, expected",
    [
        ("-x1^2", Neg(BinOp("^", Feature(1), Const(2.0)))),
        ("x1 - x2 - x1", BinOp("-", BinOp("-", Feature(1), Feature(2)), Feature(1))),
        ("x1 / x2 * x1", BinOp("*", BinOp("/", Feature(1), Feature(2)), Feature(1))),
        ("2^3^2", BinOp("^", BinOp("^", Const(2.0), Const(3.0)), Const(2.0))),
        ("x1 + x2 * x1", BinOp("+", Feature(1), BinOp("*", Feature(2), Feature(1)))),
        ("x1^-1", BinOp("^", Feature(1), Neg(Const(1.0)))),
        ("-x1 * x2", BinOp("*", Neg(Feature(1)), Feature(2))),
    ],
)
def test_precedence_and_associativity(text, expected):
    assert parse_model(text, 2).root == expected


def test_whitespace_is_insignificant():
    assert parse_model(" x1*(x2 +1 ) ", 2) == parse_model("x1 * (x2 + 1)", 2)


def test_evaluate_examples():
    assert evaluate(parse_model("x1 + x2", 2), [0.25, 0.5]) == 0.75
    bench = parse_model(BENCHMARK_MODEL, 5)
    assert evaluate(bench, [0.25, 0.25, 0.25, 0, 0]) == pytest.approx(1.0, abs=1e-15)
    assert abs(evaluate(parse_model("sin(2*pi*x1)", 1), [0.5])) < 1e-12


def test_functions():
    m = parse_model("exp(x1) + log(x2) + sqrt(x2) + abs(-x1) + cos(x1)", 2)
    x1, x2 = 0.3, 4.0
    want = math.exp(x1) + math.log(x2) + 2.0 + x1 + math.cos(x1)
    assert evaluate(m, [x1, x2]) == pytest.approx(want, rel=1e-15)


@pytest.mark.parametrize(
    "text, point, fragment",
    [
        ("log(x1)", [-1.0], "log"),
        ("log(x1)", [0.0], "log"),
        ("sqrt(x1 - 1)", [0.5], "sqrt"),
        ("x1 / x2", [1.0, 0.0], "division by zero"),
        ("x1 ^ 0.5", [-4.0], "power"),
    ],
)
def test_domain_errors(text, point, fragment):
    model = parse_model(text, len(point))
    with pytest.raises(ModelDomainError) as err:
        evaluate(model, point)
    assert fragment in str(err.value)


def test_domain_error_reports_first_bad_row():
    model = parse_model("sqrt(x1)", 1)
    with pytest.raises(ModelDomainError) as err:
        evaluate_batch(model, [[1.0], [4.0], [-1.0], [-2.0]])
    assert err.value.row == 2
    assert to_text(err.value.node) == "sqrt(x1)"


def test_point_length_checked():
    with pytest.raises(ValueError):
        evaluate(parse_model("x1", 2), [1.0])


def test_batch_matches_pointwise():
    model = parse_model(BENCHMARK_MODEL, 5)
    X = np.random.default_rng(0).random((50, 5))
    batch = evaluate_batch(model, X)
    assert all(batch[u] == evaluate(model, X[u]) for u in range(50))


def test_evaluate_is_pure():
    model = parse_model("exp(sin(x1) * x2) / (1 + x2^2)", 2)
    assert evaluate(model, [0.7, -1.3]) == evaluate(model, [0.7, -1.3])


def test_features_used():
    assert parse_model("x4 * sin(x2) + 1", 5).features_used() == [2, 4]


# -- round trip over grammar-generated texts ------------------------------------

N_FEATURES = 4

number = st.one_of(
    st.integers(0, 1000).map(str),
    st.floats(0, 1e6, allow_nan=False, allow_infinity=False).map(repr),
    st.sampled_from(["0.5", ".25", "1e3", "2.5E-2", "3."]),
)
atom = st.one_of(
    number,
    st.just("pi"),
    st.integers(1, N_FEATURES).map(lambda k: f"x{k}"),
)


def _extend(inner):
    return st.one_of(
        st.tuples(inner, st.sampled_from(["+", "-", "*", "/", "^"]), inner).map(
            lambda t: f"{t[0]} {t[1]} {t[2]}"
        ),
        inner.map(lambda s: f"({s})"),
        inner.map(lambda s: f"-{s}"),
        st.tuples(st.sampled_from(["sin", "cos", "exp", "log", "sqrt", "abs"]), inner).map(
            lambda t: f"{t[0]}({t[1]})"
        ),
    )


grammar_text = st.recursive(atom, _extend, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(grammar_text)
def test_pretty_print_round_trip(text):
    model = parse_model(text, N_FEATURES)
    again = parse_model(to_text(model), N_FEATURES)
    assert again.root == model.root
    assert to_text(again) == to_text(model)
