# -*- coding: utf-8 -*-
"""
newton.py
Solver Module - Damped Newton-Krylov
=====================

Residual, exact linearization and the damped Newton correction for

    F(ω_u) − [t·h + (1 − t)·h₀] − c = 0,   mean(u) = 0.

Each Newton step solves the augmented system

    [ L   −1 ] [ψ]   [−r]
    [ 1ᵀ/N  0 ] [ċ] = [ 0]

with restarted GMRES and a Jacobi preconditioner, then halves the step until
the trial state is admissible and the residual sup-norm decreases.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, gmres, splu, spsolve

from ahsolve.calculus.operators import OperatorKind, f_eval
from ahsolve.errors import (
    ConeViolationError,
    InvariantViolationError,
    NonConvergenceError,
    SolverError,
    StepFailureError,
)
from ahsolve.geometry.fields import chi_trace, point_gradient, point_hessian
from ahsolve.geometry.grid import ScalarField, stencil_offsets, stencil_weight
from ahsolve.geometry.pencil import linearization_coeffs
from ahsolve.solver.problem import NormalizationMode, ProblemSpec, spectrum_of

logger = logging.getLogger(__name__)

STEP_FLOOR = 1e-4
KRYLOV_RESTART = 100


@dataclass(frozen=True)
class SolverState:
    """
    A point (u, c) on the continuity path.
    """
    u: ScalarField = field(repr=False)
    c: float = 0.0
    t: float = 0.0
    residual_norm: float = float("nan")  # Sup norm at (u, c, t)
    newton_iters: int = 0
    residual_history: Tuple[float, ...] = ()

    @classmethod
    def zero(cls, problem: ProblemSpec, t: float = 0.0) -> "SolverState":
        return cls(u=ScalarField.zeros(problem.grid), c=0.0, t=t)


def _rhs(problem: ProblemSpec, t: float) -> np.ndarray:
    return t * problem.h.values + (1.0 - t) * problem.h0.values


def residual(problem: ProblemSpec, state: SolverState) -> ScalarField:
    """
    F(μ(ω_u)) − [t·h + (1 − t)·h₀] − c at every point.

    Raises:
        ConeViolationError: If μ(ω_u) ∉ Γ somewhere.
    """
    spectrum = spectrum_of(problem, state.u)
    values = f_eval(problem.operator, spectrum.mu) - _rhs(problem, state.t) - state.c
    return ScalarField(problem.grid, values)


def sup_norm(field_: ScalarField) -> float:
    return float(np.abs(field_.values).max())


def with_residual(problem: ProblemSpec, state: SolverState) -> SolverState:
    """Copy of `state` with residual_norm evaluated."""
    return replace(state, residual_norm=sup_norm(residual(problem, state)))


# --------------------------------------------------------------------------- #
# Linearization
# --------------------------------------------------------------------------- #
class LinearizedOperator:
    """
    L ψ = Re Σ F^{ji} (∂∂̄ψ)_{ij} at a fixed state, as a real stencil operator

        L ψ = Σ_{αβ} a^{αβ} ψ_{αβ} + Σ_β b^β ψ_β.
    """

    def __init__(self, problem: ProblemSpec, state: SolverState) -> None:
        self.problem = problem
        self.grid = problem.grid
        geom = problem.geometry
        spectrum = spectrum_of(problem, state.u)
        coeffs = linearization_coeffs(problem.operator, spectrum)
        c = geom.frame_field
        second = np.einsum("...ji,...ia,...jb->...ab", coeffs, c, np.conj(c), optimize=True).real
        self.second = 0.5 * (second + np.swapaxes(second, -1, -2))  # (*grid, 2n, 2n)
        self.first = np.einsum("...ji,...ijb->...b", coeffs, geom.first_order).real  # (*grid, 2n)
        self.coeffs = coeffs

    @property
    def size(self) -> int:
        return self.grid.num_points

    def apply(self, psi, c_dot: float = 0.0) -> ScalarField:
        """L ψ − ċ."""
        values = psi.values if isinstance(psi, ScalarField) else np.asarray(psi, dtype=float).reshape(self.grid.shape)
        hess = point_hessian(self.problem.geometry, values)
        grad = point_gradient(self.problem.geometry, values)
        out = np.einsum("...ab,...ab->...", self.second, hess) + np.einsum("...b,...b->...", self.first, grad)
        return ScalarField(self.grid, out - c_dot)

    def diagonal(self) -> np.ndarray:
        """Stencil center weights Σ_α a^{αα}·(−2/h_α²), flat."""
        spacing = np.asarray(self.grid.spacing)
        centre = -2.0 / spacing ** 2
        return np.einsum("...aa,a->...", self.second, centre).reshape(-1)

    def as_sparse(self) -> sp.csr_matrix:
        """CSR matrix of L on the flattened grid."""
        grid = self.grid
        n_points = grid.num_points
        index = np.arange(n_points).reshape(grid.shape)
        rows, cols, vals = [], [], []
        for key, kind, offset in stencil_offsets(grid):
            if kind == "first":
                coef = self.first[..., key[0]]
            elif kind == "second":
                coef = self.second[..., key[0], key[0]]
            else:
                coef = 2.0 * self.second[..., key[0], key[1]]
            weight = stencil_weight(grid, key, kind, offset)
            if weight == 0.0:
                continue
            neighbour = index
            for axis, step in enumerate(offset):
                if step:
                    neighbour = np.roll(neighbour, -step, axis=axis)
            rows.append(index.reshape(-1))
            cols.append(neighbour.reshape(-1))
            vals.append((weight * coef).reshape(-1))
        matrix = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n_points, n_points),
        )
        return matrix.tocsr()


def linearized_apply(problem: ProblemSpec, state: SolverState, psi: ScalarField, c_dot: float = 0.0) -> ScalarField:
    """Fréchet derivative of `residual` in (u, c) along (ψ, ċ)."""
    return LinearizedOperator(problem, state).apply(psi, c_dot)


def _newton_direction(
    op: LinearizedOperator,
    rhs: np.ndarray,
    krylov_rtol: float,
) -> Tuple[np.ndarray, float, int]:
    """Solve the augmented system by Jacobi-preconditioned GMRES; returns (ψ, ċ, info)."""
    n_points = op.size
    shape = op.grid.shape

    def matvec(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        out = np.empty(n_points + 1)
        out[:n_points] = op.apply(x[:n_points].reshape(shape), x[n_points]).flat
        out[n_points] = x[:n_points].mean()
        return out

    diag = op.diagonal()
    safe = np.where(np.abs(diag) > 0, diag, 1.0)
    inv_diag = np.append(1.0 / safe, 1.0)
    system = LinearOperator((n_points + 1, n_points + 1), matvec=matvec, dtype=float)
    precond = LinearOperator((n_points + 1, n_points + 1), matvec=lambda x: np.asarray(x).reshape(-1) * inv_diag, dtype=float)

    b = np.append(rhs, 0.0)
    restart = min(KRYLOV_RESTART, n_points + 1)
    cap = int(math.ceil(10.0 * math.sqrt(n_points)))
    solution, info = gmres(
        system, b, rtol=krylov_rtol, atol=0.0, restart=restart,
        maxiter=max(1, math.ceil(cap / restart)), M=precond,
    )
    return solution[:n_points], float(solution[n_points]), int(info)


# --------------------------------------------------------------------------- #
# Normalization
# --------------------------------------------------------------------------- #
def normalize(state: SolverState, mode: NormalizationMode) -> SolverState:
    """
    Shift u by a constant so that sup u = 0 or mean u = 0.

    ∂∂̄ annihilates constants, so c and the residual are unchanged.
    """
    mode = NormalizationMode(mode)
    values = state.u.values
    shift = values.max() if mode is NormalizationMode.SUP_ZERO else values.mean()
    if shift == 0.0:
        return state
    return replace(state, u=ScalarField(state.u.grid, values - shift))


# --------------------------------------------------------------------------- #
# Newton
# --------------------------------------------------------------------------- #
def newton_solve(
    problem: ProblemSpec,
    state: SolverState,
    t: float,
    tol: float = 1e-9,
    max_iters: int = 30,
    krylov_rtol: float = 1e-10,
) -> SolverState:
    """
    Damped Newton correction of `state` for the equation at parameter t.

    Args:
        problem (ProblemSpec): Problem.
        state (SolverState): Admissible starting state.
        t (float): Path parameter in [0, 1].
        tol (float): Residual sup-norm target.
        max_iters (int): Newton iteration cap.
        krylov_rtol (float): Relative tolerance of the inner GMRES.

    Returns:
        SolverState: State at t with residual ≤ tol, normalized per
            `problem.normalization`; an already normalized exact state is
            returned unchanged.

    Raises:
        StepFailureError: Backtracking reached its floor.
        NonConvergenceError: More than `max_iters` iterations were needed.
        ConeViolationError: The starting state is not admissible.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"path parameter must lie in [0, 1], got {t}")
    current = normalize(replace(state, t=t), problem.normalization)
    r = residual(problem, current)
    norm = sup_norm(r)
    if not np.isfinite(norm):
        raise NonConvergenceError(f"non-finite residual at t={t:.6g}", t=t, residual_norm=norm)
    history = [norm]

    iteration = 0
    while norm > tol:
        if iteration >= max_iters:
            raise NonConvergenceError(
                f"Newton did not reach {tol:g} in {max_iters} iterations at t={t:.6g} (residual {norm:.3e})",
                t=t, residual_norm=norm,
            )
        iteration += 1
        op = LinearizedOperator(problem, current)
        psi, c_dot, info = _newton_direction(op, -r.flat, krylov_rtol)
        if info != 0:
            logger.debug("GMRES stopped early (info=%d) at t=%.6g, iteration %d", info, t, iteration)

        step = 1.0
        while True:
            trial = replace(
                current,
                u=ScalarField(problem.grid, current.u.values + step * psi.reshape(problem.grid.shape)),
                c=current.c + step * c_dot,
            )
            try:
                trial_r = residual(problem, trial)
                trial_norm = sup_norm(trial_r)
            except ConeViolationError:
                trial_norm = np.inf
            if trial_norm < norm:
                break
            step *= 0.5
            if step < STEP_FLOOR:
                raise StepFailureError(
                    f"line search hit its floor at t={t:.6g}, iteration {iteration} (residual {norm:.3e})",
                    t=t, iteration=iteration,
                )

        current = normalize(trial, problem.normalization)
        r, norm = trial_r, trial_norm
        history.append(norm)
        logger.debug("Newton t=%.6g it=%d step=%.4g residual=%.3e c=%.6g", t, iteration, step, norm, current.c)

    _assert_admissible(problem, current)
    return replace(current, residual_norm=norm, newton_iters=iteration, residual_history=tuple(history))


def _assert_admissible(problem: ProblemSpec, state: SolverState) -> None:
    try:
        residual(problem, state)
    except ConeViolationError as exc:
        raise InvariantViolationError(f"accepted state is not admissible: {exc}") from exc


# --------------------------------------------------------------------------- #
# Independent checks
# --------------------------------------------------------------------------- #
def _periodic_second_difference(size: int, h: float) -> sp.csr_matrix:
    main = -2.0 * np.ones(size)
    off = np.ones(size - 1)
    matrix = sp.diags([off, main, off], [-1, 0, 1], format="lil")
    matrix[0, size - 1] = 1.0
    matrix[size - 1, 0] = 1.0
    return matrix.tocsr() / (h * h)


def direct_sigma1_solve(problem: ProblemSpec) -> Tuple[ScalarField, float]:
    """
    Solve log(tr g + Δ^C u) = h + c directly on the flat preset.

    With s = e^c the equation is linear: Δ^C u − s·e^h = −tr g, mean u = 0.
    Δ^C is half the coordinate Laplacian, assembled from Kronecker products.

    Returns:
        Tuple[ScalarField, float]: Mean-zero u and c.

    Raises:
        ValueError: For operators other than log σ_1 or non-flat geometry.
        SolverError: If the solve yields s ≤ 0.
    """
    op = problem.operator
    if op.kind is not OperatorKind.LOG_SIGMA_K or op.k != 1:
        raise ValueError(f"direct solve only applies to log sigma_1, got {op.label}")
    if not problem.geometry.is_flat:
        raise ValueError("direct solve needs the flat preset")

    grid = problem.grid
    laplacian = sp.csr_matrix((grid.num_points, grid.num_points))
    for axis, (size, h) in enumerate(zip(grid.sizes, grid.spacing)):
        factors = [sp.identity(s, format="csr") for s in grid.sizes]
        factors[axis] = _periodic_second_difference(size, h)
        term = factors[0]
        for factor in factors[1:]:
            term = sp.kron(term, factor, format="csr")
        laplacian = laplacian + 0.5 * term

    exp_h = np.exp(problem.h.flat)
    n_points = grid.num_points
    system = sp.bmat(
        [
            [laplacian, sp.csr_matrix(-exp_h.reshape(-1, 1))],
            [sp.csr_matrix(np.full((1, n_points), 1.0 / n_points)), None],
        ],
        format="csc",
    )
    trace = chi_trace(problem.geometry, problem.omega_field).reshape(-1)
    rhs = np.append(-trace, 0.0)
    solution = spsolve(system, rhs)
    s = float(solution[-1])
    if not s > 0:
        raise SolverError(f"direct sigma_1 solve produced a non-positive scale {s:g}")
    return ScalarField(grid, solution[:-1]), math.log(s)


@dataclass(frozen=True)
class AdjointKernel:
    """Approximate left null vector ξ of L, normalized to Σ ξ = 1."""
    xi: ScalarField = field(repr=False)
    residual: float  # |Lᵀ ξ|_∞ / |ξ|_∞
    iterations: int
    positive: bool  # ξ > 0 everywhere


def adjoint_kernel_estimate(
    problem: ProblemSpec,
    state: SolverState,
    iterations: int = 30,
    tol: float = 1e-10,
) -> AdjointKernel:
    """
    Left null vector of the discrete L by shifted inverse iteration.

    Diagnostic only; the solver never uses it.
    """
    op = LinearizedOperator(problem, state)
    matrix = op.as_sparse()
    transposed = matrix.T.tocsc()
    scale = float(np.abs(op.diagonal()).max()) or 1.0
    shifted = transposed - (1e-8 * scale) * sp.identity(op.size, format="csc")
    lu = splu(shifted)

    x = np.full(op.size, 1.0 / op.size)
    rel = np.inf
    done = 0
    for done in range(1, iterations + 1):
        y = lu.solve(x)
        x = y / np.abs(y).max()
        rel = float(np.abs(transposed @ x).max()) / scale
        if rel < tol:
            break
    x = x / x.sum()
    logger.info("Adjoint kernel estimate: %d iterations, relative residual %.3e", done, rel)
    return AdjointKernel(xi=ScalarField(op.grid, x), residual=rel, iterations=done, positive=bool(np.all(x > 0)))
