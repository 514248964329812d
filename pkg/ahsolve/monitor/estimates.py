# -*- coding: utf-8 -*-
"""
estimates.py
Monitor Module - A Priori Estimates
=====================

Descriptive diagnostics over solver states:

- EstimateSnapshot: norms of u, K = sup|∂u|² + 1 and positivity of tr_χ ω_u, 𝓕
- quadratic_bound_fit: the measured constant in sup|∇²u| ≤ C (sup|∂u|² + 1)
- subsolution_dichotomy_probe: which alternative of the subsolution
  dichotomy holds at each point for a given θ
- q_field: the maximum-principle test quantity
  Q = log λ₁ + ξ(|ρ|²) + η(|∂u|²) + e^{−Au} on {λ₁ > 0}

Monitors never raise on a failed property; they log a warning and report it.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ahsolve.calculus.operators import f_grad
from ahsolve.geometry.fields import (
    GeometryFields,
    gradient_sup,
    hessian_top_eigenvalue,
    omega_u,
    point_gradient,
    point_hessian,
    real_hessian_sup,
)
from ahsolve.geometry.grid import ScalarField
from ahsolve.geometry.pencil import contract, linearization_coeffs, mean_f_sum
from ahsolve.solver.newton import SolverState
from ahsolve.solver.problem import ProblemSpec, spectrum_of

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EstimateSnapshot:
    """
    Scalar summaries of one admissible state.
    """
    c0_norm: float  # sup |u|
    grad_sup: float  # sup |∂u|_χ
    K: float  # grad_sup² + 1
    hessian_sup: float  # sup |∇²u|_χ
    lambda1_max: float  # max over points of the top real-Hessian eigenvalue
    f_sum_min: float  # min over points of Σ_i f_i
    trace_min: float  # min over points of tr_χ ω_u
    c_value: float
    t_value: float
    label: str = ""

    @property
    def ratio(self) -> float:
        """hessian_sup / K."""
        return self.hessian_sup / self.K

    def to_dict(self) -> Dict[str, Union[float, str]]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict) -> "EstimateSnapshot":
        names = cls.__dataclass_fields__
        values = {key: data[key] for key in names if key in data}
        for key in names:
            if key != "label":
                values[key] = float(values[key])
        return cls(**values)


def snapshot(problem: ProblemSpec, state: SolverState, label: str = "") -> EstimateSnapshot:
    """
    Compute an EstimateSnapshot for an admissible state.

    Raises:
        ConeViolationError: If the state is not admissible.
    """
    geom = problem.geometry
    u = state.u
    spectrum = spectrum_of(problem, u)
    f_sum = np.asarray(mean_f_sum(spectrum, problem.operator))
    trace = spectrum.mu.sum(axis=-1)
    grad = gradient_sup(geom, u)
    lam1 = hessian_top_eigenvalue(geom, u)

    snap = EstimateSnapshot(
        c0_norm=float(np.abs(u.values).max()),
        grad_sup=grad,
        K=grad * grad + 1.0,
        hessian_sup=real_hessian_sup(geom, u),
        lambda1_max=float(lam1.max()),
        f_sum_min=float(f_sum.min()),
        trace_min=float(trace.min()),
        c_value=float(state.c),
        t_value=float(state.t),
        label=label,
    )
    if not snap.trace_min > 0:
        logger.warning("tr_chi omega_u is not positive at t=%.6g (min %.3e)", state.t, snap.trace_min)
    if not snap.f_sum_min > 0:
        logger.warning("sum f_i is not positive at t=%.6g (min %.3e)", state.t, snap.f_sum_min)
    return snap


# --------------------------------------------------------------------------- #
# Quadratic bound
# --------------------------------------------------------------------------- #
@dataclass(frozen=True)
class BoundFit:
    """Smallest C with hessian_sup ≤ C·K over a snapshot family."""
    C_fit: float
    worst_ratio: float
    worst_index: int
    count: int


def quadratic_bound_fit(snapshots: Sequence[EstimateSnapshot]) -> BoundFit:
    """
    Measure C in sup|∇²u| ≤ C (sup|∂u|² + 1) over a family of snapshots.

    Args:
        snapshots (Sequence[EstimateSnapshot]): At least one snapshot.

    Returns:
        BoundFit: C_fit = max hessian_sup / K, the snapshot realizing it.

    Raises:
        ValueError: On an empty family.
    """
    if not snapshots:
        raise ValueError("quadratic_bound_fit needs at least one snapshot")
    ratios = np.array([s.hessian_sup / s.K for s in snapshots])
    worst = int(np.argmax(ratios))
    fit = float(ratios[worst])
    return BoundFit(C_fit=fit, worst_ratio=fit, worst_index=worst, count=len(ratios))


# --------------------------------------------------------------------------- #
# Dichotomy probe
# --------------------------------------------------------------------------- #
class DichotomyCase(enum.IntEnum):
    """Which alternative holds at a grid point."""

    NEITHER = 0
    UNIFORM = 1  # f_i > θ·𝓕 for every i
    GRADIENT = 2  # Σ F^{pq̄}(B − A)_{pq̄} > θ·𝓕


def subsolution_dichotomy_probe(
    problem: ProblemSpec,
    state: SolverState,
    u_underline: Union[ScalarField, np.ndarray],
    theta: float,
) -> np.ndarray:
    """
    Classify every grid point by the dichotomy for a given θ.

    A = ω_u of the solved state, B = ω_{u̲}; the uniform branch is tested first.

    Returns:
        np.ndarray: DichotomyCase codes, grid shaped (int8).
    """
    geom = problem.geometry
    spectrum_a = spectrum_of(problem, state.u)
    a_blocks = omega_u(geom, problem.omega_field, state.u).g_tilde
    b_blocks = omega_u(geom, problem.omega_field, u_underline).g_tilde

    weights = f_grad(problem.operator, spectrum_a.mu)
    total = weights.sum(axis=-1)
    coeffs = linearization_coeffs(problem.operator, spectrum_a)
    pairing = np.asarray(contract(coeffs, b_blocks - a_blocks))

    uniform = np.all(weights > theta * total[..., None], axis=-1)
    gradient_case = pairing > theta * total
    cases = np.where(uniform, DichotomyCase.UNIFORM, np.where(gradient_case, DichotomyCase.GRADIENT, DichotomyCase.NEITHER))
    return cases.astype(np.int8)


def summarize_cases(cases: np.ndarray) -> Dict[str, int]:
    """Point counts per DichotomyCase name."""
    return {case.name.lower(): int(np.count_nonzero(cases == case)) for case in DichotomyCase}


# --------------------------------------------------------------------------- #
# Q diagnostics
# --------------------------------------------------------------------------- #
@dataclass
class QDiagnostics:
    """
    Pointwise pieces of Q on Ω = {λ₁ > 0}; NaN outside Ω.
    """
    A: float
    N: float  # sup |∇²u| + 1
    K: float  # sup |∂u|² + 1
    domain: np.ndarray = field(repr=False)  # bool mask of Ω
    log_lambda1: np.ndarray = field(repr=False)
    xi: np.ndarray = field(repr=False)  # ξ(|ρ|²)
    eta: np.ndarray = field(repr=False)  # η(|∂u|²)
    exp_term: np.ndarray = field(repr=False)  # e^{−Au}
    Q: np.ndarray = field(repr=False)
    max_value: float = float("nan")
    max_point: Optional[Tuple[int, ...]] = None
    xi_argument_violations: int = 0  # |ρ|² ≥ 5N²: ξ undefined
    xi_prime_violations: int = 0  # ξ' outside [1/(20N²), 1/(4N²)]
    eta_prime_violations: int = 0  # η' outside [1/(8K), 1/(4K)]

    @property
    def empty(self) -> bool:
        return not bool(self.domain.any())

    @property
    def flagged(self) -> bool:
        return bool(self.xi_argument_violations or self.xi_prime_violations or self.eta_prime_violations)

    def columns(self) -> Dict[str, np.ndarray]:
        """Grid-shaped columns for a field snapshot."""
        return {
            "log_lambda1": self.log_lambda1,
            "xi": self.xi,
            "eta": self.eta,
            "exp_term": self.exp_term,
            "Q": self.Q,
        }

    def summary(self) -> Dict[str, Union[float, int, bool, list, None]]:
        return {
            "A": self.A,
            "N": self.N,
            "K": self.K,
            "domain_points": int(self.domain.sum()),
            "max_value": self.max_value,
            "max_point": list(self.max_point) if self.max_point is not None else None,
            "xi_argument_violations": self.xi_argument_violations,
            "xi_prime_violations": self.xi_prime_violations,
            "eta_prime_violations": self.eta_prime_violations,
        }


def q_field(problem: ProblemSpec, state: SolverState, A: float) -> QDiagnostics:
    """
    Evaluate Q with ξ(s) = −¼ log(5N² − s) and η(s) = −¼ log(2K − s).

    ρ = ∇²u + N·χ uses the discrete real Hessian. Range violations are
    counted and logged, never raised.
    """
    geom: GeometryFields = problem.geometry
    u = state.u.values
    hess = point_hessian(geom, u)
    grad = point_gradient(geom, u)
    lam1 = hessian_top_eigenvalue(geom, u)

    N = real_hessian_sup(geom, u) + 1.0
    grad_sq = (grad ** 2).sum(axis=-1)
    K = float(grad_sq.max()) + 1.0
    domain = lam1 > 0

    nan = np.full(u.shape, np.nan)
    if not domain.any():
        logger.debug("Q diagnostics: Omega = {lambda_1 > 0} is empty")
        return QDiagnostics(A=A, N=N, K=K, domain=domain, log_lambda1=nan, xi=nan.copy(),
                            eta=nan.copy(), exp_term=nan.copy(), Q=nan.copy())

    rho = hess + N * np.eye(geom.grid.dim)
    rho_sq = (rho ** 2).sum(axis=(-2, -1))
    xi_gap = 5.0 * N * N - rho_sq
    eta_gap = 2.0 * K - grad_sq

    with np.errstate(invalid="ignore", divide="ignore"):
        log_lambda1 = np.where(domain, np.log(np.where(domain, lam1, 1.0)), np.nan)
        xi = np.where(domain & (xi_gap > 0), -0.25 * np.log(np.where(xi_gap > 0, xi_gap, 1.0)), np.nan)
        eta = np.where(domain, -0.25 * np.log(eta_gap), np.nan)
        exp_term = np.where(domain, np.exp(-A * u), np.nan)
        q = log_lambda1 + xi + eta + exp_term

    # ξ' = 1/(4(5N² − s)) ∈ [1/(20N²), 1/(4N²)]  ⇔  0 ≤ s ≤ 4N²
    xi_ok = (rho_sq >= 0) & (rho_sq <= 4.0 * N * N)
    # η' = 1/(4(2K − s)) ∈ [1/(8K), 1/(4K)]  ⇔  0 ≤ s ≤ K
    eta_ok = (grad_sq >= 0) & (grad_sq <= K)

    diag = QDiagnostics(
        A=A, N=N, K=K, domain=domain,
        log_lambda1=log_lambda1, xi=xi, eta=eta, exp_term=exp_term, Q=q,
        xi_argument_violations=int(np.count_nonzero(domain & ~(xi_gap > 0))),
        xi_prime_violations=int(np.count_nonzero(domain & ~xi_ok)),
        eta_prime_violations=int(np.count_nonzero(domain & ~eta_ok)),
    )
    if np.isfinite(q).any():
        flat = int(np.nanargmax(q))
        diag.max_value = float(q.flat[flat])
        diag.max_point = tuple(int(i) for i in np.unravel_index(flat, q.shape))
    if diag.flagged:
        logger.warning(
            "Q diagnostics flagged: %d xi-argument, %d xi', %d eta' range violations on %d points",
            diag.xi_argument_violations, diag.xi_prime_violations, diag.eta_prime_violations, int(domain.sum()),
        )
    return diag


def snapshot_family_rows(snapshots: List[EstimateSnapshot]) -> List[Dict]:
    """Snapshots as dict rows with their ratio, for CSV output."""
    return [{**s.to_dict(), "ratio": s.ratio} for s in snapshots]
