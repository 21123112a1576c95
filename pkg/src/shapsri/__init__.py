"""Exact SHAP values and synergy / redundancy / independence decomposition
of pairwise feature relationships."""

from .dataset import Dataset, generate_benchmark_dataset, load_csv, sample_background
from .estimators import ExactShapExplainer, SRIDecomposition
from .expr import ModelExpr, evaluate, parse_model
from .shapley import Explanation, explain_dataset, interaction_values, shap_values
from .sri import SriResult, decompose_all

__all__ = [
    "Dataset",
    "ExactShapExplainer",
    "Explanation",
    "ModelExpr",
    "SRIDecomposition",
    "SriResult",
    "decompose_all",
    "evaluate",
    "explain_dataset",
    "generate_benchmark_dataset",
    "interaction_values",
    "load_csv",
    "parse_model",
    "sample_background",
    "shap_values",
]

__version__ = "0.1.0"
