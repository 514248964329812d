# -*- coding: utf-8 -*-
"""
continuation.py
Solver Module - Continuity Path
=====================

March t from 0 to 1 through the family

    F(ω_{u_t}) = t·h + (1 − t)·h₀ + c_t,

starting from the exact solution (0, 0) at t = 0. Steps double after a run of
easy Newton solves and halve on failure; the path fails once the step drops
below its floor.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ahsolve.calculus.subsolution import SubsolutionCertificate, check_c_subsolution
from ahsolve.errors import InadmissibleError, NonConvergenceError, NotSubsolutionError, PathFailureError, StepFailureError
from ahsolve.geometry.grid import ScalarField
from ahsolve.solver.newton import SolverState, newton_solve, normalize
from ahsolve.solver.problem import ProblemSpec

logger = logging.getLogger(__name__)

Diagnostics = Callable[[ProblemSpec, SolverState], Dict[str, float]]


@dataclass(frozen=True)
class PathControls:
    """
    Step control of the continuity path and the inner Newton solves.
    """
    initial_step: float = 0.1
    min_step: float = 1e-4
    easy_iters: int = 5  # A solve with fewer iterations counts as easy
    easy_streak: int = 2  # Easy solves in a row before the step doubles
    tol: float = 1e-9
    max_iters: int = 30
    krylov_rtol: float = 1e-10
    require_subsolution: bool = True

    def __post_init__(self) -> None:
        if not 0 < self.min_step <= self.initial_step <= 1:
            raise ValueError(f"need 0 < min_step ≤ initial_step ≤ 1, got {self.min_step}, {self.initial_step}")
        if self.easy_iters < 1 or self.easy_streak < 1 or self.max_iters < 1:
            raise ValueError("easy_iters, easy_streak and max_iters must be positive")
        if not self.tol > 0:
            raise ValueError(f"tolerance must be positive, got {self.tol}")


@dataclass(frozen=True)
class PathEntry:
    """One accepted point of the path."""
    t: float
    c: float
    residual_norm: float
    newton_iters: int
    c_bound: float  # sup |t (h − h₀)|
    diagnostics: Dict[str, float] = field(default_factory=dict)

    @property
    def within_c_bound(self) -> bool:
        return abs(self.c) <= self.c_bound + 1e-8


@dataclass
class PathReport:
    """Accepted path points, in increasing t."""
    entries: List[PathEntry] = field(default_factory=list)
    rejected_steps: int = 0
    certificate: Optional[SubsolutionCertificate] = None
    elapsed: float = 0.0

    @property
    def final_t(self) -> float:
        return self.entries[-1].t if self.entries else 0.0

    @property
    def success(self) -> bool:
        return self.final_t == 1.0

    @property
    def c_bound_violations(self) -> int:
        return sum(not entry.within_c_bound for entry in self.entries)

    def append(self, entry: PathEntry) -> None:
        if self.entries and not entry.t > self.entries[-1].t:
            raise ValueError(f"path parameter must increase: {entry.t} after {self.entries[-1].t}")
        self.entries.append(entry)

    def rows(self) -> List[Dict[str, float]]:
        return [
            {
                "t": e.t,
                "c": e.c,
                "residual_norm": e.residual_norm,
                "newton_iters": e.newton_iters,
                "c_bound": e.c_bound,
                **e.diagnostics,
            }
            for e in self.entries
        ]


def _certify_start(problem: ProblemSpec, required: bool) -> Optional[SubsolutionCertificate]:
    """u̲ = 0 must be a C-subsolution for h; warn instead of failing when not required."""
    try:
        return check_c_subsolution(problem.operator, problem.background_spectrum.mu, problem.h.values)
    except (InadmissibleError, NotSubsolutionError) as exc:
        if required:
            raise
        logger.warning("u_ = 0 is not a C-subsolution (%s); continuing as requested", exc)
        return None


def continuity_solve(
    problem: ProblemSpec,
    controls: PathControls = PathControls(),
    initial: Optional[ScalarField] = None,
    diagnostics: Optional[Diagnostics] = None,
) -> Tuple[SolverState, PathReport]:
    """
    Follow the continuity path from t = 0 to t = 1.

    Args:
        problem (ProblemSpec): Problem to solve.
        controls (PathControls): Step and Newton controls.
        initial (ScalarField | None): Starting guess at t = 0 (zero by default);
            it is first corrected by Newton at t = 0.
        diagnostics (callable | None): Extra per-entry columns computed from
            each accepted state.

    Returns:
        Tuple[SolverState, PathReport]: The normalized state at t = 1 and the path.

    Raises:
        PathFailureError: If the step falls below `controls.min_step`.
        InadmissibleError / NotSubsolutionError: If the start is not certified
            and `controls.require_subsolution` is set.
    """
    t0 = time.perf_counter()
    report = PathReport()
    report.certificate = _certify_start(problem, controls.require_subsolution)

    offset = np.abs(problem.h.values - problem.h0.values).max()

    def record(state: SolverState) -> None:
        extra = diagnostics(problem, state) if diagnostics else {}
        entry = PathEntry(
            t=state.t,
            c=state.c,
            residual_norm=state.residual_norm,
            newton_iters=state.newton_iters,
            c_bound=float(state.t * offset),
            diagnostics=extra,
        )
        if not entry.within_c_bound:
            logger.warning("c=%.6g exceeds the maximum-principle bound %.6g at t=%.6g", entry.c, entry.c_bound, entry.t)
        report.append(entry)

    start = SolverState.zero(problem) if initial is None else SolverState(u=initial, c=0.0, t=0.0)
    try:
        state = newton_solve(problem, start, 0.0, controls.tol, controls.max_iters, controls.krylov_rtol)
    except (StepFailureError, NonConvergenceError) as exc:
        raise PathFailureError(f"could not start the path: {exc}", last_t=0.0) from exc
    record(state)

    t = 0.0
    dt = controls.initial_step
    streak = 0
    while t < 1.0:
        target = min(1.0, t + dt)
        try:
            candidate = newton_solve(problem, state, target, controls.tol, controls.max_iters, controls.krylov_rtol)
        except (StepFailureError, NonConvergenceError) as exc:
            report.rejected_steps += 1
            dt *= 0.5
            streak = 0
            logger.warning("Step to t=%.6g rejected (%s); dt -> %.3g", target, exc, dt)
            if dt < controls.min_step:
                report.elapsed = time.perf_counter() - t0
                raise PathFailureError(
                    f"continuation step fell below {controls.min_step:g}; last good t={t:.6g}", last_t=t,
                ) from exc
            continue

        state, t = candidate, target
        record(state)
        logger.info("Accepted t=%.6g (dt=%.3g, %d Newton iterations, c=%.6g)", t, dt, state.newton_iters, state.c)
        streak = streak + 1 if state.newton_iters < controls.easy_iters else 0
        if streak >= controls.easy_streak:
            dt = min(1.0, 2.0 * dt)
            streak = 0

    final = normalize(state, problem.normalization)
    report.elapsed = time.perf_counter() - t0
    logger.info(
        "Path complete: %d accepted, %d rejected steps, c=%.6g, residual=%.3e (%.2fs)",
        len(report.entries), report.rejected_steps, final.c, final.residual_norm, report.elapsed,
    )
    return replace(final, t=1.0), report
