# -*- coding: utf-8 -*-
"""
problem.py
Solver Module - Problem Definition
=====================

The data of F(ω_u) = t·h + (1 − t)·h₀ + c on the model manifold, the t = 0
right-hand side h₀, and manufactured problems with a known solution.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Tuple, Union

import numpy as np

from ahsolve.calculus.cones import first_violation
from ahsolve.calculus.operators import SymmetricOperator, f_eval, sup_boundary_value
from ahsolve.catalog import AnalyticField
from ahsolve.errors import InadmissibleError
from ahsolve.geometry.fields import GeometryFields, ddbar, ddbar_from_derivatives, omega_u
from ahsolve.geometry.grid import ScalarField
from ahsolve.geometry.pencil import HermitianPencil, SpectralData, hermitian_defect, pencil_eigen

logger = logging.getLogger(__name__)


class NormalizationMode(str, enum.Enum):
    """Which functional of u is pinned to zero."""

    SUP_ZERO = "sup_zero"
    MEAN_ZERO = "mean_zero"


@dataclass(frozen=True)
class ProblemSpec:
    """
    Geometry, background form, operator and target right-hand side.
    """
    geometry: GeometryFields
    omega_field: np.ndarray = field(repr=False)  # Background g, (*grid, n, n) Hermitian
    operator: SymmetricOperator
    h: ScalarField = field(repr=False)
    normalization: NormalizationMode = NormalizationMode.SUP_ZERO
    name: str = "problem"
    u_star: Optional[ScalarField] = field(default=None, repr=False)  # Known solution, if manufactured

    def __post_init__(self) -> None:
        grid = self.geometry.grid
        n = grid.n
        omega = np.asarray(self.omega_field)
        if omega.shape != grid.shape + (n, n):
            raise ValueError(f"background has shape {omega.shape}, expected {grid.shape + (n, n)}")
        if self.operator.n != n:
            raise ValueError(f"operator acts on {self.operator.n} eigenvalues, geometry has n={n}")
        if self.h.grid != grid:
            raise ValueError("h lives on a different grid")
        defect = hermitian_defect(omega)
        if defect > 1e-12 * (1.0 + float(np.abs(omega).max())):
            raise ValueError(f"background is not Hermitian (defect {defect:.3e})")
        object.__setattr__(self, "normalization", NormalizationMode(self.normalization))
        # Admissible start: μ(g) ∈ Γ everywhere
        _ = self.background_spectrum

    @property
    def grid(self):
        return self.geometry.grid

    @cached_property
    def background_spectrum(self) -> SpectralData:
        """μ(g) and its frame; raises InadmissibleError if μ(g) ∉ Γ somewhere."""
        spectrum = pencil_eigen(HermitianPencil(self.geometry.chi_field, self.omega_field))
        point = admissibility_violation(self.operator, spectrum.mu)
        if point is not None:
            raise InadmissibleError(
                f"background eigenvalues leave {self.operator.cone.label} at grid point {point}",
                point=point,
            )
        return spectrum

    @cached_property
    def h0(self) -> ScalarField:
        return h_zero(self)


def admissibility_violation(op: SymmetricOperator, mu: np.ndarray) -> Optional[Tuple[int, ...]]:
    """First grid index where μ ∉ Γ, or None when admissible everywhere."""
    failing = first_violation(op.cone, mu)
    if not np.any(failing):
        return None
    flat = int(np.flatnonzero(failing)[0])
    return tuple(int(i) for i in np.unravel_index(flat, failing.shape))


def h_zero(problem: ProblemSpec) -> ScalarField:
    """
    h₀ = f(μ(g)) pointwise, so (u, c) = (0, 0) solves the t = 0 equation.

    Raises:
        InadmissibleError: If μ(g) ∉ Γ at some point.
    """
    spectrum = problem.background_spectrum
    return ScalarField(problem.grid, f_eval(problem.operator, spectrum.mu))


def spectrum_of(problem: ProblemSpec, u: Union[ScalarField, np.ndarray]) -> SpectralData:
    """Eigen data of ω_u = g + ∂∂̄u."""
    return pencil_eigen(omega_u(problem.geometry, problem.omega_field, u))


def check_boundary_level(problem: ProblemSpec) -> None:
    """
    Reject h with inf h ≤ sup_{∂Γ} f.

    Raises:
        InadmissibleError: If the structural condition on the data fails.
    """
    bound = sup_boundary_value(problem.operator)
    low = float(problem.h.values.min())
    if not low > bound:
        index = tuple(int(i) for i in np.unravel_index(int(np.argmin(problem.h.values)), problem.grid.shape))
        raise InadmissibleError(f"inf h = {low:g} does not exceed sup over the cone boundary {bound:g}", point=index)
    logger.debug("Boundary level check passed: inf h = %.6g > %g", low, bound)


def target_problem(
    geometry: GeometryFields,
    operator: SymmetricOperator,
    omega_field: np.ndarray,
    offset: Optional[ScalarField] = None,
    normalization: NormalizationMode = NormalizationMode.SUP_ZERO,
    name: str = "target",
) -> ProblemSpec:
    """Problem with h = h₀ + offset (h = h₀ when `offset` is None)."""
    placeholder = ScalarField.zeros(geometry.grid)
    base = ProblemSpec(geometry, omega_field, operator, placeholder, normalization, name)
    h = base.h0 if offset is None else base.h0 + offset
    return ProblemSpec(geometry, omega_field, operator, h, normalization, name)


def manufactured_problem(
    geometry: GeometryFields,
    operator: SymmetricOperator,
    u_star: Union[AnalyticField, ScalarField],
    omega_field: Optional[np.ndarray] = None,
    derivatives: str = "analytic",
    normalization: NormalizationMode = NormalizationMode.SUP_ZERO,
) -> ProblemSpec:
    """
    Problem whose exact solution is u* with c = 0.

    Args:
        geometry (GeometryFields): Geometry.
        operator (SymmetricOperator): Operator.
        u_star (AnalyticField | ScalarField): Target solution. Catalog fields
            use exact derivatives unless `derivatives` is "discrete".
        omega_field (np.ndarray | None): Background; identity when None.
        derivatives (str): "analytic" or "discrete".
        normalization (NormalizationMode): Reporting normalization.

    Returns:
        ProblemSpec: h = f(μ(ω_{u*})), with u_star stored for error reports.

    Raises:
        InadmissibleError: If μ(ω_{u*}) ∉ Γ somewhere.
    """
    if derivatives not in ("analytic", "discrete"):
        raise ValueError(f"derivatives must be 'analytic' or 'discrete', got {derivatives!r}")
    grid = geometry.grid
    n = grid.n
    if omega_field is None:
        omega_field = np.broadcast_to(np.eye(n, dtype=complex), grid.shape + (n, n)).copy()

    if isinstance(u_star, AnalyticField):
        field_values = u_star.field(grid)
        if derivatives == "analytic":
            raw = ddbar_from_derivatives(geometry, u_star.gradient(grid), u_star.hessian(grid))
            hessian_term = 0.5 * (raw + np.conj(np.swapaxes(raw, -1, -2)))
        else:
            hessian_term = ddbar(geometry, field_values)
        label = f"manufactured:{u_star.name}"
    else:
        field_values = u_star
        hessian_term = ddbar(geometry, field_values)
        label = "manufactured:field"

    spectrum = pencil_eigen(HermitianPencil(geometry.chi_field, omega_field + hessian_term))
    point = admissibility_violation(operator, spectrum.mu)
    if point is not None:
        raise InadmissibleError(
            f"u* is not admissible for {operator.label}: μ leaves {operator.cone.label} at {point}",
            point=point,
        )
    h = ScalarField(grid, f_eval(operator, spectrum.mu))
    logger.info("Manufactured %s on %s: h in [%.4g, %.4g]", label, grid.shape, h.values.min(), h.values.max())
    return ProblemSpec(geometry, omega_field, operator, h, normalization, label, u_star=field_values)
