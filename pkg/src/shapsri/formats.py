"""On-disk formats: S/R/I matrices (CSV, JSON, SVG), the console table,
and the SHAP matrix / interaction tensor exchange files."""

from __future__ import annotations

import csv
import json
import math
from html import escape

import numpy as np

from .dataset import DataError, load_csv

SYMMETRY_ATOL = 1e-6


def _cell(v):
    return "" if v is None or math.isnan(v) else repr(float(v))


def _json_matrix(M):
    return [[None if math.isnan(v) else float(v) for v in row] for row in M]


def write_matrix_csv(path, M, names):
    """Header row of feature names, then n rows; NaN cells are left empty."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in M:
            w.writerow([_cell(v) for v in row])


def report_document(result, names, **extra):
    doc = {
        "feature_names": list(names),
        "S": _json_matrix(result.S),
        "R": _json_matrix(result.R),
        "I": _json_matrix(result.I),
        "undefined_pairs": [[i + 1, j + 1] for i, j in result.undefined_pairs],
    }
    doc.update(extra)
    return doc


def write_report_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, allow_nan=False)
        fh.write("\n")


def format_table(result, names, digits=2):
    """Table-style text report: one block per S, R, I with 2-decimal cells."""
    width = max(6, max(len(n) for n in names) + 1, digits + 4)
    lines = []
    for label, M in (("S_ij", result.S), ("R_ij", result.R), ("I_ij", result.I)):
        lines.append(label.ljust(width) + "".join(n.rjust(width) for n in names))
        lines.append("-" * (width * (len(names) + 1)))
        for i, name in enumerate(names):
            cells = []
            for j in range(len(names)):
                if i == j:
                    cells.append("-".rjust(width))
                elif math.isnan(M[i, j]):
                    cells.append("undef".rjust(width))
                else:
                    cells.append(f"{M[i, j]:.{digits}f}".rjust(width))
            lines.append(name.ljust(width) + "".join(cells))
        lines.append("")
    return "\n".join(lines)


def heatmap_svg(M, names, title, cell=48):
    """Static SVG 1.1 grayscale heatmap: white at 0, dark gray at 1."""
    n = len(names)
    margin = cell
    size = margin + n * cell
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" '
        f'height="{size + 24}" viewBox="0 0 {size} {size + 24}" font-family="sans-serif" '
        f'font-size="{cell // 4}">',
        f'<text x="4" y="16">{escape(title)}</text>',
    ]
    top = 24
    for k, name in enumerate(names):
        c = margin + k * cell + cell // 2
        out.append(f'<text x="{c}" y="{top + margin - 8}" text-anchor="middle">{escape(name)}</text>')
        out.append(f'<text x="{margin - 8}" y="{top + c + 4}" text-anchor="end">{escape(name)}</text>')
    for i in range(n):
        for j in range(n):
            x, y = margin + j * cell, top + margin + i * cell
            v = M[i, j]
            if math.isnan(v):
                out.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                           'fill="#ffffff" stroke="#bbbbbb"/>')
                label, ink = "-" if i == j else "?", "#000000"
            else:
                # same ramp as gray!(100 v): blend of white and 50% gray
                level = round(255 - 127.5 * v)
                out.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                           f'fill="rgb({level},{level},{level})" stroke="#bbbbbb"/>')
                label, ink = f"{v:.2f}", "#000000"
            out.append(f'<text x="{x + cell // 2}" y="{y + cell // 2 + 4}" '
                       f'text-anchor="middle" fill="{ink}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# -- SHAP exchange files -----------------------------------------------------

def write_shap_csv(path, shap, names):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in shap:
            w.writerow([repr(float(v)) for v in row])


def write_interactions_csv(path, inter):
    """Long format ``u,i,j,value`` with 1-based indices, diagonal included."""
    m, n, _ = inter.shape
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["u", "i", "j", "value"])
        for u in range(m):
            for i in range(n):
                for j in range(n):
                    w.writerow([u + 1, i + 1, j + 1, repr(float(inter[u, i, j]))])


def read_shap_csv(path):
    """Read a SHAP matrix written by :func:`write_shap_csv`; returns (values, names)."""
    data = load_csv(path, has_header=True)
    return np.array(data.values), list(data.feature_names)


def read_interactions_csv(path, m, n):
    """Read a long-format interaction tensor and check it is complete and symmetric."""
    out = np.full((m, n, n), np.nan)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header != ["u", "i", "j", "value"]:
            raise DataError(f"{path}: expected header u,i,j,value, got {','.join(header)!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise DataError(f"{path}: line {lineno} has {len(row)} fields, expected 4")
            try:
                u, i, j = (int(c) for c in row[:3])
                v = float(row[3])
            except ValueError:
                raise DataError(f"{path}: line {lineno} is not numeric") from None
            if not (1 <= u <= m and 1 <= i <= n and 1 <= j <= n):
                raise DataError(
                    f"{path}: line {lineno} index (u={u}, i={i}, j={j}) outside m={m}, n={n}"
                )
            if not math.isfinite(v):
                raise DataError(f"{path}: line {lineno} has a non-finite value")
            out[u - 1, i - 1, j - 1] = v
    missing = np.argwhere(np.isnan(out))
    if len(missing):
        u, i, j = missing[0] + 1
        raise DataError(f"{path}: {len(missing)} missing entries, first at u={u}, i={i}, j={j}")
    gap = np.abs(out - out.transpose(0, 2, 1))
    if gap.max() > SYMMETRY_ATOL:
        u, i, j = np.unravel_index(int(gap.argmax()), gap.shape)
        raise DataError(
            f"{path}: interaction tensor is not symmetric: "
            f"phi_{i + 1}{j + 1} - phi_{j + 1}{i + 1} = {out[u, i, j] - out[u, j, i]:.3g} "
            f"at u={u + 1} (tolerance {SYMMETRY_ATOL:g})"
        )
    return out
