import pytest

from shapsri.dataset import BENCHMARK_MODEL, generate_benchmark_dataset
from shapsri.expr import parse_model
from shapsri.shapley import explain_dataset
from shapsri.sri import decompose_all


def random_model_text(rng, n, depth=3):
    """Random smooth expression over x1..xn that is defined everywhere."""

    def build(d):
        if d == 0 or rng.random() < 0.25:
            if rng.random() < 0.75:
                return f"x{rng.integers(1, n + 1)}"
            return f"{rng.uniform(0.1, 2.0):.3f}"
        kind = rng.integers(0, 6)
        a = build(d - 1)
        if kind == 0:
            return f"({a} + {build(d - 1)})"
        if kind == 1:
            return f"({a} - {build(d - 1)})"
        if kind == 2:
            return f"({a} * {build(d - 1)})"
        if kind == 3:
            return f"{rng.choice(['sin', 'cos'])}({a})"
        if kind == 4:
            return f"exp(-({a})^2)"
        return f"{a} / (1 + ({build(d - 1)})^2)"

    return build(depth)


@pytest.fixture(scope="session")
def demo_run():
    """The duplicated-feature experiment at m=1000, seed 42, full background."""
    data = generate_benchmark_dataset(1000, 42)
    model = parse_model(BENCHMARK_MODEL, 5)
    explanation = explain_dataset(model, data, data)
    result = decompose_all(
        explanation.shap_values,
        explanation.interaction_values,
        output_scale=explanation.output_scale,
        keep_pairs=True,
    )
    return {"data": data, "model": model, "explanation": explanation, "result": result}


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
