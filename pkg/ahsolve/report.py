# -*- coding: utf-8 -*-
"""
report.py
Artifact Saving Utilities
=====================

Centralizes how outputs are written to disk so that the CLI and pipelines
stay concise: JSON documents, CSV tables with full float precision, and
Markdown summaries.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

SOLUTION_FILE = "solution.field"
PATH_FILE = "path_report.csv"
ESTIMATES_FILE = "estimates.json"
SNAPSHOTS_FILE = "estimates.csv"
SUMMARY_FILE = "summary.json"
REPORT_FILE = "report.md"


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_json(path: Path, data: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, ensure_ascii=False, indent=2, default=_json_default), encoding="utf-8")
    return path


def _json_default(value: Any) -> Any:
    # numpy scalars and arrays
    if hasattr(value, "tolist"):
        return value.tolist()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def read_json(path: Path) -> Any:
    return json.loads(path.read_text(encoding="utf-8"))


def write_csv(path: Path, rows: Sequence[Mapping[str, Any]], columns: Optional[Sequence[str]] = None) -> Path:
    """
    Write dict rows as CSV; floats use repr() so a re-run is byte-identical.

    Args:
        path (Path): Output file.
        rows (Sequence[Mapping]): Rows; missing cells are left empty.
        columns (Sequence[str] | None): Column order (first-seen order by default).

    Returns:
        Path: Written path.
    """
    if columns is None:
        columns = []
        for row in rows:
            columns.extend(key for key in row if key not in columns)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format(row[c]) if c in row else "" for c in columns])
    return path


def read_csv(path: Path) -> List[Dict[str, Any]]:
    """Read a CSV written by `write_csv`, converting numeric cells to float."""
    with path.open("r", newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        parsed = {}
        for key, cell in row.items():
            try:
                parsed[key] = float(cell)
            except (TypeError, ValueError):
                parsed[key] = cell
        out.append(parsed)
    return out


def markdown_table(rows: Iterable[Mapping[str, Any]], columns: Sequence[str]) -> str:
    """GitHub-style table; floats in compact scientific notation."""
    def cell(value: Any) -> str:
        if isinstance(value, float):
            return "nan" if math.isnan(value) else f"{value:.4g}"
        return str(value)

    lines = ["| " + " | ".join(columns) + " |", "|" + "---|" * len(columns)]
    for row in rows:
        lines.append("| " + " | ".join(cell(row.get(c, "")) for c in columns) + " |")
    return "\n".join(lines)


def render_solve_report(summary: Mapping[str, Any], path_rows: Sequence[Mapping[str, Any]]) -> str:
    """
    Markdown report of a solve: problem, final pair (u, c), path and monitors.
    """
    lines = [f"# Solve report: {summary.get('name', '')}", ""]
    lines.append("## Problem")
    for key in ("operator", "preset", "amplitude", "grid", "normalization", "target"):
        if key in summary:
            lines.append(f"- **{key}**: {summary[key]}")
    lines += ["", "## Result"]
    for key in ("final_c", "residual_norm", "sup_u", "mean_u", "accepted_steps", "rejected_steps",
                "c_bound_violations", "ddbar_defect", "error_vs_u_star", "elapsed_seconds"):
        if key in summary:
            value = summary[key]
            lines.append(f"- **{key}**: {value:.6g}" if isinstance(value, float) else f"- **{key}**: {value}")

    fit = summary.get("bound_fit")
    if fit:
        lines += ["", "## Quadratic bound", f"- C_fit = {fit['C_fit']:.6g} over {fit['count']} snapshots"
                  f" (worst at index {fit['worst_index']})"]
    certificate = summary.get("certificate")
    if certificate:
        lines += ["", "## Subsolution certificate",
                  f"- delta = {certificate['delta']:.6g}, R = {certificate['R']:.6g}, "
                  f"min slack = {certificate['min_margin']}"]
    dichotomy = summary.get("dichotomy")
    if dichotomy:
        lines += ["", "## Dichotomy probe", f"- theta = {dichotomy['theta']:g}: " +
                  ", ".join(f"{k} = {v}" for k, v in dichotomy["counts"].items())]
    q_rows = summary.get("q_diagnostics") or []
    if q_rows:
        lines += ["", "## Q diagnostics", markdown_table(q_rows, ["A", "N", "K", "domain_points", "max_value",
                                                                  "xi_argument_violations", "xi_prime_violations",
                                                                  "eta_prime_violations"])]
    if path_rows:
        lines += ["", "## Path", markdown_table(path_rows, ["t", "c", "residual_norm", "newton_iters", "c_bound"])]
    return "\n".join(lines) + "\n"


def render_table_report(title: str, rows: Sequence[Mapping[str, Any]], columns: Sequence[str],
                        notes: Sequence[str] = ()) -> str:
    """Markdown report consisting of a title, optional notes and one table."""
    lines = [f"# {title}", ""]
    lines += [f"- {note}" for note in notes]
    if notes:
        lines.append("")
    lines.append(markdown_table(rows, columns))
    return "\n".join(lines) + "\n"
