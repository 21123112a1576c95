"""``sri`` command line: demo, compute and decompose.

Exit codes: 0 success, 2 usage/configuration/input error, 3 numerical failure.
Set ``SRI_LOG`` to error, warn, info or debug to control log output.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .dataset import (
    BENCHMARK_MODEL,
    DataError,
    check_seed,
    generate_benchmark_dataset,
    load_csv,
    sample_background,
)
from .expr import ModelDomainError, ModelParseError, parse_model
from .formats import (
    format_table,
    heatmap_svg,
    read_interactions_csv,
    read_shap_csv,
    report_document,
    write_interactions_csv,
    write_matrix_csv,
    write_report_json,
    write_shap_csv,
)
from .shapley import HARD_FEATURE_LIMIT, ExplanationError, FeatureLimitError, explain_dataset
from .sri import DecompositionError, decompose_all

log = logging.getLogger("shapsri")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3
DEFAULT_SEED = 42
DEFAULT_M = 1000
FORMATS = ("csv", "json", "svg")
# below this many observations the sample-space geometry is too thin to trust
LOW_SAMPLE_M = 30

_LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING,
               "info": logging.INFO, "debug": logging.DEBUG}


class UsageError(Exception):
    pass


def _formats(text):
    chosen = [f.strip().lower() for f in text.split(",") if f.strip()]
    bad = sorted(set(chosen) - set(FORMATS))
    if bad:
        raise argparse.ArgumentTypeError(f"unknown format(s) {', '.join(bad)}; choose from {', '.join(FORMATS)}")
    return tuple(f for f in FORMATS if f in chosen)


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _seed(text):
    try:
        return check_seed(int(text))
    except (ValueError, DataError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sri",
        description="Exact SHAP values and synergy/redundancy/independence decomposition.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output-dir", type=Path,
                        help="directory for output files (its parent must exist)")
    common.add_argument("--format", type=_formats, default=("csv", "json"),
                        help="comma-separated subset of csv,json,svg (default csv,json)")
    common.add_argument("--workers", type=_positive, default=1,
                        help="worker threads over observations; output does not depend on it")
    common.add_argument("--max-features", type=_positive, default=HARD_FEATURE_LIMIT,
                        help=f"feature-count limit for exact enumeration (<= {HARD_FEATURE_LIMIT})")

    pipeline = argparse.ArgumentParser(add_help=False)
    pipeline.add_argument("--background", type=_positive, default=None, metavar="K",
                          help="background rows sampled from the data (default: all rows)")
    pipeline.add_argument("--export-shap", action="store_true",
                          help="also write shap.csv and interactions.csv")

    demo = sub.add_parser("demo", parents=[common, pipeline],
                          help="synthetic duplicated-feature experiment")
    demo.add_argument("--m", type=_positive, default=DEFAULT_M, help="number of observations")
    demo.add_argument("--seed", type=_seed, default=DEFAULT_SEED,
                      help=f"data and background seed (default {DEFAULT_SEED})")

    compute = sub.add_parser("compute", parents=[common, pipeline],
                             help="explain and decompose a model on a CSV dataset")
    src = compute.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", help="model expression over x1..xn")
    src.add_argument("--model-file", type=Path, help="file containing the model expression")
    compute.add_argument("--data", type=Path, required=True, help="CSV file of observations")
    compute.add_argument("--header", action="store_true", help="the CSV has a header row")
    compute.add_argument("--seed", type=_seed, default=0, help="background sampling seed")

    dec = sub.add_parser("decompose", parents=[common],
                         help="decompose precomputed SHAP values and interactions")
    dec.add_argument("--shap", type=Path, required=True, help="SHAP matrix CSV (with header)")
    dec.add_argument("--interactions", type=Path, required=True,
                     help="interaction tensor CSV in long format u,i,j,value")
    return parser


def _prepare_output_dir(path):
    if path is None:
        return None
    try:
        path.mkdir(exist_ok=True)
        probe = path / ".sri-write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise UsageError(f"output directory {path} is not writable: {exc}") from exc
    return path


def _warnings(m, result):
    notes = []
    if m < LOW_SAMPLE_M:
        notes.append(
            f"only {m} observation(s): S/R/I vectors live in a {m}-dimensional sample space "
            "and the values are unstable"
        )
    if result.undefined_pairs:
        notes.append(
            f"{len(result.undefined_pairs)} ordered pair(s) undefined because the feature's "
            "SHAP vector is zero"
        )
    return notes


def _sum_gap(result):
    mask = result.defined_mask()
    if not mask.any():
        return 0.0
    return float(np.abs(result.S + result.R + result.I - 1)[mask].max())


def _write_outputs(outdir, formats, result, names, doc, explanation=None, export_shap=False):
    if outdir is None:
        return
    if "csv" in formats:
        for key in ("S", "R", "I"):
            write_matrix_csv(outdir / f"{key}.csv", getattr(result, key), names)
    if "json" in formats:
        write_report_json(outdir / "report.json", doc)
    if "svg" in formats:
        titles = {"S": "synergy S_ij", "R": "redundancy R_ij", "I": "independence I_ij"}
        for key, title in titles.items():
            (outdir / f"{key}.svg").write_text(heatmap_svg(getattr(result, key), names, title))
    if export_shap and explanation is not None:
        write_shap_csv(outdir / "shap.csv", explanation.shap_values, names)
        write_interactions_csv(outdir / "interactions.csv", explanation.interaction_values)
    log.info("wrote outputs to %s", outdir)


def _finish(args, result, names, m, run, explanation=None):
    notes = _warnings(m, result)
    for note in notes:
        log.warning(note)
    doc = report_document(result, names, warnings=notes,
                          max_sum_deviation=_sum_gap(result), run=run)
    _write_outputs(args.output_dir, args.format, result, names, doc,
                   explanation, getattr(args, "export_shap", False))
    print(format_table(result, names))
    for note in notes:
        print(f"note: {note}")
    if args.output_dir is not None and "json" in args.format:
        print(f"unrounded values: {args.output_dir / 'report.json'}")


def _pipeline(args, model, data, run):
    k = data.n_observations if args.background is None else args.background
    bg = sample_background(data, k, args.seed)
    log.info("explaining %d observations against %d background rows", data.n_observations, k)
    explanation = explain_dataset(model, data, bg, n_jobs=args.workers,
                                  max_features=args.max_features)
    result = decompose_all(explanation.shap_values, explanation.interaction_values,
                           output_scale=explanation.output_scale)
    run.update(background_size=k)
    _finish(args, result, data.feature_names, data.n_observations, run, explanation)


def cmd_demo(args):
    data = generate_benchmark_dataset(args.m, args.seed)
    model = parse_model(BENCHMARK_MODEL, 5)
    run = {"command": "demo", "model": BENCHMARK_MODEL, "m": args.m, "seed": args.seed}
    _pipeline(args, model, data, run)
    return EXIT_OK


def cmd_compute(args):
    if args.model_file is not None:
        try:
            text = args.model_file.read_text(encoding="utf-8").strip()
        except OSError as exc:
            raise UsageError(f"cannot read model file: {exc}") from exc
    else:
        text = args.model
    data = load_csv(args.data, has_header=args.header)
    model = parse_model(text, data.n_features)
    run = {"command": "compute", "model": text, "m": data.n_observations, "seed": args.seed}
    _pipeline(args, model, data, run)
    return EXIT_OK


def cmd_decompose(args):
    shap, names = read_shap_csv(args.shap)
    m, n = shap.shape
    if n > args.max_features:
        raise FeatureLimitError(f"{n} features exceed the limit of {args.max_features}")
    inter = read_interactions_csv(args.interactions, m, n)
    gap = np.abs(inter.sum(axis=2) - shap).max()
    if gap > 1e-6 * (1 + np.abs(shap).max()):
        log.warning("interaction rows differ from SHAP values by up to %.3g", gap)
    result = decompose_all(shap, inter)
    run = {"command": "decompose", "m": m}
    _finish(args, result, names, m, run)
    return EXIT_OK


COMMANDS = {"demo": cmd_demo, "compute": cmd_compute, "decompose": cmd_decompose}


def main(argv=None):
    level = os.environ.get("SRI_LOG", "warn").lower()
    logging.basicConfig(level=_LOG_LEVELS.get(level, logging.WARNING),
                        format="sri: %(levelname)s: %(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        if args.max_features > HARD_FEATURE_LIMIT:
            raise UsageError(f"--max-features may not exceed {HARD_FEATURE_LIMIT}")
        args.output_dir = _prepare_output_dir(args.output_dir)
        return COMMANDS[args.command](args)
    except (UsageError, ModelParseError, DataError, FeatureLimitError, ValueError, OSError) as exc:
        print(f"sri: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelDomainError, ExplanationError, DecompositionError, ArithmeticError) as exc:
        print(f"sri: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
