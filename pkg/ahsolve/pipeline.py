# -*- coding: utf-8 -*-
"""
pipeline.py
Command Pipelines
=====================

One workflow per CLI command.

solve
-----
1. Build geometry, background, operator and target from the problem file.
2. Certify u̲ and follow the continuity path to t = 1.
3. Evaluate the estimate monitors on the path and the solution.
4. Write the solution snapshot, path CSV, estimates, summary and report.

mms / sweep repeat the solve over a grid ladder; check-subsolution only runs
the certificate; report rebuilds report.md from a finished output directory.
"""

from __future__ import annotations

import logging
import math
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ahsolve import report as report_writer
from ahsolve.calculus.operators import SymmetricOperator
from ahsolve.calculus.subsolution import check_c_subsolution
from ahsolve.catalog import make_background, make_field, random_smooth
from ahsolve.config import OperatorConfig, ProblemConfig, RunConfig
from ahsolve.errors import ConfigError, InadmissibleError, SolverError
from ahsolve.geometry.fields import GeometryFields, build_geometry, ddbar_defect, omega_u
from ahsolve.geometry.grid import PeriodicGrid, ScalarField
from ahsolve.geometry.pencil import pencil_eigen
from ahsolve.geometry.snapshot import read_field, write_field
from ahsolve.monitor.estimates import (
    EstimateSnapshot,
    q_field,
    quadratic_bound_fit,
    snapshot,
    snapshot_family_rows,
    subsolution_dichotomy_probe,
    summarize_cases,
)
from ahsolve.solver.continuation import PathControls, PathReport, continuity_solve
from ahsolve.solver.newton import SolverState, adjoint_kernel_estimate
from ahsolve.solver.problem import (
    NormalizationMode,
    ProblemSpec,
    admissibility_violation,
    check_boundary_level,
    manufactured_problem,
    target_problem,
)

logger = logging.getLogger(__name__)

_MAX_GUESS_HALVINGS = 20


# --------------------------------------------------------------------------- #
# Builders
# --------------------------------------------------------------------------- #
def build_operator(cfg: OperatorConfig, n: int) -> SymmetricOperator:
    if cfg.kind == "n_minus_one_ma":
        return SymmetricOperator.n_minus_one_ma(n)
    return SymmetricOperator.log_sigma_k(cfg.k, n)


def build_setting(config: ProblemConfig, size: Optional[int] = None) -> Tuple[GeometryFields, SymmetricOperator, np.ndarray]:
    """Geometry, operator and background form for one grid size."""
    grid = PeriodicGrid.uniform(config.grid.n, size or config.grid.size)
    geometry = build_geometry(grid, config.geometry.preset, config.geometry.amplitude)
    operator = build_operator(config.operator, grid.n)
    background = make_background(grid, config.background)
    return geometry, operator, background


def build_problem(config: ProblemConfig, size: Optional[int] = None, scale: float = 1.0) -> ProblemSpec:
    """
    Problem for one grid size; `scale` multiplies the target's departure from h₀.

    Raises:
        ConfigError: Invalid catalog entries.
        InadmissibleError: Inadmissible background or manufactured solution.
    """
    geometry, operator, background = build_setting(config, size)
    grid = geometry.grid
    mode = NormalizationMode(config.normalization)
    target = dict(config.target)
    kind = target.pop("kind", "stationary")

    if kind == "stationary":
        problem = target_problem(geometry, operator, background, None, mode, config.name)
    elif kind == "manufactured":
        u_star = make_field(target, grid.n).scaled(scale)
        problem = manufactured_problem(geometry, operator, u_star, background, config.mms.derivatives, mode)
    elif kind == "offset":
        offset = make_field(target, grid.n).scaled(scale).field(grid)
        problem = target_problem(geometry, operator, background, offset, mode, config.name)
    else:
        snap = read_field(target["path"])
        if snap.grid != grid:
            raise ConfigError(f"target snapshot grid {snap.grid.shape} does not match {grid.shape}")
        base = target_problem(geometry, operator, background, None, mode, config.name)
        offset = ScalarField(grid, scale * (snap.scalar().values - base.h0.values))
        problem = target_problem(geometry, operator, background, offset, mode, config.name)

    if config.reject_boundary_level:
        check_boundary_level(problem)
    return problem


def build_initial_guess(config: ProblemConfig, problem: ProblemSpec) -> Optional[ScalarField]:
    """
    Starting u at t = 0: None for zero, a catalog field, or a seeded random field.

    Random fields are halved until admissible.
    """
    spec = dict(config.initial_guess)
    name = spec.get("name", "zero")
    grid = problem.grid
    if name == "zero":
        return None
    if name == "random_smooth":
        amplitude = float(spec.get("amplitude", 0.05))
        modes = int(spec.get("modes", 2))
        for _ in range(_MAX_GUESS_HALVINGS):
            guess = random_smooth(grid, config.seed, amplitude, modes)
            if _admissible(problem, guess):
                return guess
            amplitude *= 0.5
        raise ConfigError("could not find an admissible random initial guess")
    guess = make_field(spec, grid.n).field(grid)
    if not _admissible(problem, guess):
        raise ConfigError(f"initial guess '{name}' is not admissible")
    return guess


def _admissible(problem: ProblemSpec, u: ScalarField) -> bool:
    spectrum = pencil_eigen(omega_u(problem.geometry, problem.omega_field, u))
    return admissibility_violation(problem.operator, spectrum.mu) is None


def path_controls(config: ProblemConfig) -> PathControls:
    return PathControls(
        initial_step=config.path.initial_step,
        min_step=config.path.min_step,
        easy_iters=config.path.easy_iters,
        easy_streak=config.path.easy_streak,
        tol=config.newton.tol,
        max_iters=config.newton.max_iters,
        krylov_rtol=config.newton.krylov_rtol,
        require_subsolution=config.require_subsolution,
    )


def solution_error(problem: ProblemSpec, state: SolverState) -> Optional[float]:
    """sup |u − u*| after removing the mean of both, when u* is known."""
    if problem.u_star is None:
        return None
    u = state.u.values - state.u.values.mean()
    ref = problem.u_star.values - problem.u_star.values.mean()
    return float(np.abs(u - ref).max())


def _finite(value: float) -> Any:
    return value if math.isfinite(value) else str(value)


def _solve(config: ProblemConfig, problem: ProblemSpec) -> Tuple[SolverState, PathReport, List[EstimateSnapshot]]:
    """Continuity solve with a snapshot recorded at every accepted t."""
    snapshots: List[EstimateSnapshot] = []

    def diagnostics(p: ProblemSpec, state: SolverState) -> Dict[str, float]:
        snap = snapshot(p, state, label=f"t={state.t:.6g}")
        snapshots.append(snap)
        return {
            "grad_sup": snap.grad_sup,
            "hessian_sup": snap.hessian_sup,
            "K": snap.K,
            "trace_min": snap.trace_min,
            "f_sum_min": snap.f_sum_min,
        }

    initial = build_initial_guess(config, problem)
    state, path = continuity_solve(problem, path_controls(config), initial, diagnostics)
    return state, path, snapshots


# --------------------------------------------------------------------------- #
# solve
# --------------------------------------------------------------------------- #
def run_solve(run: RunConfig) -> Dict[str, Any]:
    """
    Solve one problem along the continuity path and write all artifacts.

    Args:
        run (RunConfig): Command configuration.

    Returns:
        Dict[str, Any]: The summary written to summary.json.
    """
    t0 = time.perf_counter()
    config = run.load_problem()
    out = Path(run.out_dir).resolve()
    out.mkdir(parents=True, exist_ok=True)
    logger.info("Starting solve '%s' -> %s", config.name, out)

    logger.info("Step 1/4: Building problem...")
    t1 = time.perf_counter()
    problem = build_problem(config)
    logger.info("Problem ready: %s on %s, %s preset (%.2fs)",
                problem.operator.label, problem.grid.shape, problem.geometry.preset.value, time.perf_counter() - t1)

    logger.info("Step 2/4: Following the continuity path...")
    t1 = time.perf_counter()
    state, path, snapshots = _solve(config, problem)
    logger.info("Path finished with %d accepted steps (%.2fs)", len(path.entries), time.perf_counter() - t1)

    logger.info("Step 3/4: Evaluating estimate monitors...")
    final_snap = snapshot(problem, state, label="final")
    snapshots.append(final_snap)
    fit = quadratic_bound_fit(snapshots)

    u_under = make_field(config.subsolution, problem.grid.n).field(problem.grid)
    cases = subsolution_dichotomy_probe(problem, state, u_under, config.monitor.theta)
    q_rows = []
    for a_value in config.monitor.A:
        diag = q_field(problem, state, a_value)
        q_rows.append({key: _finite(value) if isinstance(value, float) else value
                       for key, value in diag.summary().items()})
        if not diag.empty:
            write_field(out / f"q_A{a_value:g}.field", problem.grid, diag.columns(), name="Q",
                        preset=problem.geometry.preset.value, meta={"A": a_value})

    summary: Dict[str, Any] = {
        "name": config.name,
        "operator": problem.operator.label,
        "preset": problem.geometry.preset.value,
        "amplitude": problem.geometry.amplitude,
        "grid": list(problem.grid.sizes),
        "normalization": problem.normalization.value,
        "target": config.target.get("kind", "stationary"),
        "final_c": state.c,
        "residual_norm": state.residual_norm,
        "sup_u": float(state.u.values.max()),
        "mean_u": float(state.u.values.mean()),
        "accepted_steps": len(path.entries),
        "rejected_steps": path.rejected_steps,
        "c_bound_violations": path.c_bound_violations,
        "ddbar_defect": ddbar_defect(problem.geometry, state.u),
        "bound_fit": {"C_fit": fit.C_fit, "worst_ratio": fit.worst_ratio,
                      "worst_index": fit.worst_index, "count": fit.count},
        "dichotomy": {"theta": config.monitor.theta, "counts": summarize_cases(cases)},
        "q_diagnostics": q_rows,
    }
    if path.certificate is not None:
        summary["certificate"] = {
            "delta": path.certificate.delta,
            "R": path.certificate.R,
            "min_margin": _finite(path.certificate.min_margin),
        }
    error = solution_error(problem, state)
    if error is not None:
        summary["error_vs_u_star"] = error
    if config.monitor.adjoint_kernel:
        kernel = adjoint_kernel_estimate(problem, state)
        summary["adjoint_kernel"] = {"residual": kernel.residual, "iterations": kernel.iterations,
                                     "positive": kernel.positive}
        write_field(out / "adjoint_kernel.field", problem.grid, kernel.xi, name="xi",
                    preset=problem.geometry.preset.value)

    logger.info("Step 4/4: Writing artifacts...")
    columns = {"u": state.u.values}
    if problem.u_star is not None:
        columns["u_star"] = problem.u_star.values
    write_field(out / report_writer.SOLUTION_FILE, problem.grid, columns, name="u",
                preset=problem.geometry.preset.value, meta={"c": state.c, "t": state.t})
    rows = path.rows()
    report_writer.write_csv(out / report_writer.PATH_FILE, rows)
    report_writer.write_json(out / report_writer.ESTIMATES_FILE,
                             {"snapshots": [s.to_dict() for s in snapshots], "bound_fit": summary["bound_fit"]})
    report_writer.write_csv(out / report_writer.SNAPSHOTS_FILE, snapshot_family_rows(snapshots))
    summary["elapsed_seconds"] = time.perf_counter() - t0
    report_writer.write_json(out / report_writer.SUMMARY_FILE, summary)
    (out / report_writer.REPORT_FILE).write_text(report_writer.render_solve_report(summary, rows), encoding="utf-8")
    logger.info("Solve completed: c=%.6g, residual=%.3e (%.2fs)", state.c, state.residual_norm, summary["elapsed_seconds"])
    return summary


# --------------------------------------------------------------------------- #
# mms
# --------------------------------------------------------------------------- #
def observed_order(err_coarse: float, err_fine: float, h_coarse: float, h_fine: float) -> Any:
    """log(err_coarse/err_fine) / log(h_coarse/h_fine); "exact" when both errors vanish."""
    if err_coarse < 1e-10 and err_fine < 1e-10:
        return "exact"
    if err_fine <= 0 or err_coarse <= 0:
        return float("nan")
    return math.log(err_coarse / err_fine) / math.log(h_coarse / h_fine)


def run_mms(run: RunConfig) -> List[Dict[str, Any]]:
    """
    Manufactured-solution convergence study over `mms.grids`.

    Writes mms.csv and mms.md. A failing level leaves a partial table and
    re-raises the solver error.
    """
    t0 = time.perf_counter()
    config = run.load_problem()
    if config.target.get("kind") != "manufactured":
        raise ConfigError("mms needs target.kind = 'manufactured'")
    out = Path(run.out_dir).resolve()
    out.mkdir(parents=True, exist_ok=True)
    logger.info("Starting MMS ladder %s (%s derivatives)", list(config.mms.grids), config.mms.derivatives)

    rows: List[Dict[str, Any]] = []
    columns = ["grid", "spacing", "error", "c", "residual_norm", "order"]
    try:
        for level, size in enumerate(config.mms.grids, start=1):
            logger.info("Step %d/%d: grid %d^%d...", level, len(config.mms.grids), size, 2 * config.grid.n)
            problem = build_problem(config, size)
            state, _, _ = _solve(config, problem)
            error = solution_error(problem, state)
            row: Dict[str, Any] = {
                "grid": size,
                "spacing": problem.grid.spacing[0],
                "error": error,
                "c": state.c,
                "residual_norm": state.residual_norm,
                "order": "",
            }
            if rows:
                prev = rows[-1]
                row["order"] = observed_order(prev["error"], error, prev["spacing"], row["spacing"])
            rows.append(row)
            logger.info("grid %d: error=%.3e c=%.3e order=%s", size, error, state.c, row["order"])
    finally:
        report_writer.write_csv(out / "mms.csv", rows, columns)
        (out / "mms.md").write_text(
            report_writer.render_table_report("MMS convergence", rows, columns,
                                              [f"target: {dict(config.target)}",
                                               f"derivatives: {config.mms.derivatives}"]),
            encoding="utf-8",
        )
    logger.info("MMS completed in %.2fs", time.perf_counter() - t0)
    return rows


# --------------------------------------------------------------------------- #
# sweep
# --------------------------------------------------------------------------- #
def run_sweep(run: RunConfig) -> List[Dict[str, Any]]:
    """
    Solve the problem for every (grid, scale) pair and fit the quadratic bound per grid.

    Writes sweep.csv, sweep_fit.csv and sweep.md.
    """
    t0 = time.perf_counter()
    config = run.load_problem()
    out = Path(run.out_dir).resolve()
    out.mkdir(parents=True, exist_ok=True)
    rows: List[Dict[str, Any]] = []
    fits: List[Dict[str, Any]] = []
    columns = ["grid", "scale", "c", "residual_norm", "grad_sup", "hessian_sup", "ratio"]
    try:
        for level, size in enumerate(config.sweep.grids, start=1):
            logger.info("Step %d/%d: grid %d, scales %s", level, len(config.sweep.grids), size, list(config.sweep.scales))
            family: List[EstimateSnapshot] = []
            for scale in config.sweep.scales:
                problem = build_problem(config, size, scale)
                state, _, _ = _solve(config, problem)
                snap = snapshot(problem, state, label=f"grid={size},scale={scale:g}")
                family.append(snap)
                rows.append({
                    "grid": size, "scale": scale, "c": state.c, "residual_norm": state.residual_norm,
                    "grad_sup": snap.grad_sup, "hessian_sup": snap.hessian_sup, "ratio": snap.ratio,
                })
            fit = quadratic_bound_fit(family)
            fits.append({"grid": size, "C_fit": fit.C_fit, "worst_ratio": fit.worst_ratio})
            logger.info("grid %d: C_fit=%.6g", size, fit.C_fit)
    finally:
        report_writer.write_csv(out / "sweep.csv", rows, columns)
        report_writer.write_csv(out / "sweep_fit.csv", fits, ["grid", "C_fit", "worst_ratio"])
        (out / "sweep.md").write_text(
            report_writer.render_table_report("Quadratic bound sweep", fits, ["grid", "C_fit", "worst_ratio"]),
            encoding="utf-8",
        )
    logger.info("Sweep completed in %.2fs", time.perf_counter() - t0)
    return fits


# --------------------------------------------------------------------------- #
# check-subsolution
# --------------------------------------------------------------------------- #
def run_check_subsolution(run: RunConfig) -> Dict[str, Any]:
    """
    Certify u̲ (the `subsolution` catalog entry, zero by default) for the problem.

    Writes certificate.json and the per-point slack field.

    Raises:
        InadmissibleError / NotSubsolutionError: When certification fails.
    """
    config = run.load_problem()
    out = Path(run.out_dir).resolve()
    out.mkdir(parents=True, exist_ok=True)

    problem = build_problem(config)
    u_under = make_field(config.subsolution, problem.grid.n).field(problem.grid)
    spectrum = pencil_eigen(omega_u(problem.geometry, problem.omega_field, u_under))
    certificate = check_c_subsolution(problem.operator, spectrum.mu, problem.h.values)

    result = {
        "verdict": "certified",
        "operator": problem.operator.label,
        "subsolution": dict(config.subsolution),
        "delta": certificate.delta,
        "R": certificate.R,
        "min_margin": _finite(certificate.min_margin),
        "worst_point": list(certificate.worst_point),
    }
    report_writer.write_json(out / "certificate.json", result)
    write_field(out / "subsolution_slack.field", problem.grid, certificate.per_point_margins, name="slack",
                preset=problem.geometry.preset.value)
    logger.info("Certified: delta=%.6g R=%.6g min slack=%s", certificate.delta, certificate.R, result["min_margin"])
    return result


# --------------------------------------------------------------------------- #
# report
# --------------------------------------------------------------------------- #
def run_report(run: RunConfig) -> Dict[str, Any]:
    """
    Recompute the quadratic bound from estimates.json and rewrite report.md.
    """
    out = Path(run.out_dir).resolve()
    estimates_path = out / report_writer.ESTIMATES_FILE
    summary_path = out / report_writer.SUMMARY_FILE
    if not estimates_path.is_file() or not summary_path.is_file():
        raise ConfigError(f"{out} does not contain {report_writer.ESTIMATES_FILE} and {report_writer.SUMMARY_FILE}")

    estimates = report_writer.read_json(estimates_path)
    snapshots = [EstimateSnapshot.from_dict(item) for item in estimates.get("snapshots", [])]
    fit = quadratic_bound_fit(snapshots)
    stored = estimates.get("bound_fit", {}).get("C_fit")
    if stored is not None and stored != fit.C_fit:
        logger.warning("Recomputed C_fit %.17g differs from stored %.17g", fit.C_fit, stored)

    summary = report_writer.read_json(summary_path)
    summary["bound_fit"] = {"C_fit": fit.C_fit, "worst_ratio": fit.worst_ratio,
                            "worst_index": fit.worst_index, "count": fit.count}
    path_file = out / report_writer.PATH_FILE
    rows = report_writer.read_csv(path_file) if path_file.is_file() else []
    (out / report_writer.REPORT_FILE).write_text(report_writer.render_solve_report(summary, rows), encoding="utf-8")
    logger.info("Report rewritten: C_fit=%.6g from %d snapshots", fit.C_fit, fit.count)
    return summary["bound_fit"]
