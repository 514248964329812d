# -*- coding: utf-8 -*-
"""
errors.py
Error Types
=====================

Exception hierarchy shared by every subpackage. Each class derives from the
closest builtin so callers catching ValueError / RuntimeError keep working.
"""

from __future__ import annotations

from typing import Optional, Tuple


class ConfigError(ValueError):
    """Invalid problem file, override or catalog name."""


class ConeViolationError(ValueError):
    """
    An eigenvalue vector lies outside the operator's open cone.

    Attributes:
        sigma_index (Optional[int]): First failing σ_i (1-based) for Γ_k, or the
            first nonpositive T-component (1-based) for the pulled-back cone.
        point (Optional[int]): Flat index of the failing sample in a batch.
    """

    def __init__(self, message: str, sigma_index: Optional[int] = None, point: Optional[int] = None) -> None:
        super().__init__(message)
        self.sigma_index = sigma_index
        self.point = point


class PencilError(ValueError):
    """χ is not Hermitian positive definite."""

    def __init__(self, message: str, point: Optional[int] = None) -> None:
        super().__init__(message)
        self.point = point


class GeometryError(ValueError):
    """A constructed geometry violates J² = −Id, compatibility or frame unitarity."""

    def __init__(self, message: str, invariant: str = "", defect: float = 0.0) -> None:
        super().__init__(message)
        self.invariant = invariant
        self.defect = defect


class InadmissibleError(ValueError):
    """μ(ω + ∂∂̄u) leaves Γ at some grid point."""

    def __init__(self, message: str, point: Optional[Tuple[int, ...]] = None) -> None:
        super().__init__(message)
        self.point = point


class NotSubsolutionError(ValueError):
    """A ray limit fails to exceed h(x) at some point along some direction.

    `direction` is -1 when the failure is a vanishing margin along the diagonal.
    """

    def __init__(self, message: str, point: Tuple[int, ...], direction: int) -> None:
        super().__init__(message)
        self.point = point
        self.direction = direction


class SolverError(RuntimeError):
    """Base class for failures of the nonlinear solve."""


class StepFailureError(SolverError):
    """Backtracking reached its floor without an admissible decrease."""

    def __init__(self, message: str, t: float, iteration: int) -> None:
        super().__init__(message)
        self.t = t
        self.iteration = iteration


class NonConvergenceError(SolverError):
    """Newton exceeded its iteration cap."""

    def __init__(self, message: str, t: float, residual_norm: float) -> None:
        super().__init__(message)
        self.t = t
        self.residual_norm = residual_norm


class PathFailureError(SolverError):
    """The continuation step shrank below its floor."""

    def __init__(self, message: str, last_t: float) -> None:
        super().__init__(message)
        self.last_t = last_t


class InvariantViolationError(RuntimeError):
    """An internal invariant (e.g. admissibility of an accepted state) failed."""
