# -*- coding: utf-8 -*-
import numpy as np

from ahsolve.report import (
    markdown_table,
    read_csv,
    read_json,
    render_solve_report,
    render_table_report,
    write_csv,
    write_json,
)


def test_csv_keeps_full_precision(tmp_path):
    rows = [{"t": 0.1, "c": 1.0 / 3.0, "ok": True}, {"t": 0.2, "note": "late"}]
    path = write_csv(tmp_path / "nested" / "rows.csv", rows)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "t,c,ok,note"
    assert lines[1] == "0.1,0.3333333333333333,true,"
    assert lines[2] == "0.2,,,late"
    back = read_csv(path)
    assert back[0]["c"] == 1.0 / 3.0
    assert back[1]["note"] == "late"


def test_csv_column_order(tmp_path):
    path = write_csv(tmp_path / "rows.csv", [{"a": 1, "b": 2}], columns=["b", "a"])
    assert path.read_text(encoding="utf-8").splitlines() == ["b,a", "2,1"]


def test_json_accepts_numpy(tmp_path):
    path = write_json(tmp_path / "d.json", {"x": np.float64(0.5), "v": np.arange(3)})
    assert read_json(path) == {"x": 0.5, "v": [0, 1, 2]}


def test_markdown_table():
    table = markdown_table([{"A": 1.0, "max_value": float("nan"), "n": 3}], ["A", "max_value", "n", "missing"])
    lines = table.splitlines()
    assert lines[0] == "| A | max_value | n | missing |"
    assert lines[1] == "|---|---|---|---|"
    assert lines[2] == "| 1 | nan | 3 |  |"


def test_solve_report_sections():
    summary = {
        "name": "demo", "operator": "log_sigma_2", "grid": "n=2, 8^4", "final_c": 0.125,
        "residual_norm": 1e-11, "accepted_steps": 4,
        "bound_fit": {"C_fit": 0.5, "count": 4, "worst_index": 2},
        "certificate": {"delta": 0.5, "R": 2.06, "min_margin": "inf"},
        "dichotomy": {"theta": 0.001, "counts": {"neither": 0, "uniform": 10, "gradient": 2}},
        "q_diagnostics": [{"A": 1.0, "N": 2.0, "K": 1.5, "domain_points": 3, "max_value": 0.2}],
    }
    text = render_solve_report(summary, [{"t": 0.0, "c": 0.0, "residual_norm": 0.0, "newton_iters": 0,
                                          "c_bound": 0.0}])
    assert text.startswith("# Solve report: demo\n")
    for heading in ("## Problem", "## Result", "## Quadratic bound", "## Subsolution certificate",
                    "## Dichotomy probe", "## Q diagnostics", "## Path"):
        assert heading in text
    assert "- **final_c**: 0.125" in text
    assert "uniform = 10" in text


def test_solve_report_skips_missing_sections():
    text = render_solve_report({"name": "bare"}, [])
    assert "## Path" not in text
    assert "## Quadratic bound" not in text


def test_table_report():
    text = render_table_report("MMS ladder", [{"grid": 8, "error": 0.01}], ["grid", "error"], notes=["observed order 2"])
    assert text.splitlines()[:3] == ["# MMS ladder", "", "- observed order 2"]
    assert "| 8 | 0.01 |" in text
