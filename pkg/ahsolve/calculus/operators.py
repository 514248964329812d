# -*- coding: utf-8 -*-
"""
operators.py
Calculus Module - Symmetric Operators
=====================

The pair (f, Γ) behind F(ω_u) = f(μ(ω_u)) and its derivatives:

- LogSigmaK:   f = log σ_k,         Γ = Γ_k
- NMinusOneMA: f = log σ_n(T(μ)),   Γ = T^{-1}(Γ_n)

Derivatives follow the eigenvalue calculus F^{ij̄} = δ_ij f_i and the
second-order pairing (f_i − f_j)/(μ_i − μ_j), read as f_ii − f_ij on ties.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from ahsolve.calculus.cones import (
    ArrayLike,
    ConeDescriptor,
    elementary_symmetric,
    first_violation,
    sigma_without,
    t_transform,
)
from ahsolve.errors import ConeViolationError

logger = logging.getLogger(__name__)

# Eigenvalues closer than TIE_RTOL·(1 + |μ_i|) use the analytic limit branch
TIE_RTOL = 1e-8


class OperatorKind(str, enum.Enum):
    """In-scope operator families."""

    LOG_SIGMA_K = "log_sigma_k"
    N_MINUS_ONE_MA = "n_minus_one_ma"


@dataclass(frozen=True)
class SymmetricOperator:
    """
    A symmetric, concave, increasing f defined on an open symmetric cone.
    """
    kind: OperatorKind
    n: int  # Number of eigenvalues (complex dimension)
    k: int = 0  # Degree for LogSigmaK

    def __post_init__(self) -> None:
        # Raises on invalid (k, n) through the cone's own checks
        _ = self.cone

    @classmethod
    def log_sigma_k(cls, k: int, n: int) -> "SymmetricOperator":
        return cls(OperatorKind.LOG_SIGMA_K, n, k)

    @classmethod
    def n_minus_one_ma(cls, n: int) -> "SymmetricOperator":
        return cls(OperatorKind.N_MINUS_ONE_MA, n)

    @property
    def cone(self) -> ConeDescriptor:
        if self.kind is OperatorKind.LOG_SIGMA_K:
            return ConeDescriptor.gamma(self.k, self.n)
        return ConeDescriptor.pullback(self.n)

    @property
    def label(self) -> str:
        if self.kind is OperatorKind.LOG_SIGMA_K:
            return f"log_sigma_{self.k}(n={self.n})"
        return f"log_sigma_n(T)(n={self.n})"


@dataclass(frozen=True)
class PairCoefficients:
    """Data needed to assemble F^{ij̄,kl̄} at sorted eigenvalues."""
    diag: np.ndarray  # f_i, shape (..., n)
    offdiag: np.ndarray  # (f_i − f_j)/(μ_i − μ_j), zero on the diagonal, shape (..., n, n)


# --------------------------------------------------------------------------- #
# Evaluation
# --------------------------------------------------------------------------- #
def require_cone(op: SymmetricOperator, mu: ArrayLike) -> np.ndarray:
    """
    Validate that every vector of `mu` lies in the open cone of `op`.

    Raises:
        ConeViolationError: With the first failing σ index and flat point index.
    """
    mu = np.asarray(mu, dtype=float)
    if mu.shape[-1] != op.n:
        raise ValueError(f"{op.label} expects {op.n} eigenvalues, got {mu.shape[-1]}")
    failing = np.atleast_1d(first_violation(op.cone, mu)).ravel()
    if failing.any():
        point = int(np.flatnonzero(failing)[0])
        index = int(failing[point])
        raise ConeViolationError(
            f"eigenvalues leave {op.cone.label} (test {index} fails at sample {point})",
            sigma_index=index,
            point=point,
        )
    return mu


def f_eval(op: SymmetricOperator, mu: ArrayLike) -> Union[float, np.ndarray]:
    """
    Evaluate f(μ).

    Args:
        op (SymmetricOperator): Operator.
        mu (ArrayLike): Eigenvalues in Γ, shape (..., n).

    Returns:
        float | np.ndarray: f per vector.

    Raises:
        ConeViolationError: If some μ ∉ Γ.
    """
    mu = require_cone(op, mu)
    if op.kind is OperatorKind.LOG_SIGMA_K:
        value = np.log(elementary_symmetric(mu, op.k)[..., op.k])
    else:
        value = np.log(t_transform(mu)).sum(axis=-1)
    return float(value) if value.ndim == 0 else value


def f_grad(op: SymmetricOperator, mu: ArrayLike) -> np.ndarray:
    """
    Partial derivatives (f_1, …, f_n), all positive inside Γ.

    For log σ_k, f_i = σ_{k−1}(μ | i) / σ_k(μ) where (μ | i) drops the i-th entry.
    """
    mu = require_cone(op, mu)
    if op.kind is OperatorKind.LOG_SIGMA_K:
        s = elementary_symmetric(mu, op.k)[..., op.k]
        parts = [sigma_without(mu, op.k - 1, (i,)) for i in range(op.n)]
        return np.stack(parts, axis=-1) / s[..., None]
    return (1.0 / t_transform(mu)) @ _t_matrix(op.n)


def f_hess(op: SymmetricOperator, mu: ArrayLike) -> np.ndarray:
    """
    Analytic Hessian f_ik, shape (..., n, n).
    """
    mu = require_cone(op, mu)
    n = op.n
    if op.kind is OperatorKind.LOG_SIGMA_K:
        k = op.k
        s = elementary_symmetric(mu, k)[..., k]
        g = np.stack([sigma_without(mu, k - 1, (i,)) for i in range(n)], axis=-1)
        second = np.zeros(mu.shape[:-1] + (n, n))
        for i in range(n):
            for j in range(i + 1, n):
                value = sigma_without(mu, k - 2, (i, j))
                second[..., i, j] = value
                second[..., j, i] = value
        return second / s[..., None, None] - g[..., :, None] * g[..., None, :] / (s ** 2)[..., None, None]

    tm = _t_matrix(n)
    inv_sq = 1.0 / t_transform(mu) ** 2
    return -np.einsum("...k,ki,kj->...ij", inv_sq, tm, tm)


def pair_coefficients(op: SymmetricOperator, mu_sorted: ArrayLike) -> PairCoefficients:
    """
    Diagonal f_i and off-diagonal quotients (f_i − f_j)/(μ_i − μ_j).

    Near-equal eigenvalues (|μ_i − μ_j| < 1e−8·(1 + |μ_i|)) take the limit
    f_ii − f_ij from the analytic Hessian. Off-diagonal entries are ≤ 0.

    Args:
        op (SymmetricOperator): Operator.
        mu_sorted (ArrayLike): Eigenvalues sorted descending, shape (..., n).

    Returns:
        PairCoefficients: diag and offdiag arrays.

    Raises:
        ValueError: If some vector is not sorted descending.
        ConeViolationError: If some μ ∉ Γ.
    """
    mu = np.asarray(mu_sorted, dtype=float)
    if np.any(np.diff(mu, axis=-1) > 0):
        raise ValueError("pair_coefficients expects eigenvalues sorted descending")
    grad = f_grad(op, mu)
    hess = f_hess(op, mu)

    diff = mu[..., :, None] - mu[..., None, :]
    tie = np.abs(diff) < TIE_RTOL * (1.0 + np.abs(mu[..., :, None]))
    safe = np.where(tie, 1.0, diff)
    quotient = (grad[..., :, None] - grad[..., None, :]) / safe
    limit = np.diagonal(hess, axis1=-2, axis2=-1)[..., :, None] - hess
    offdiag = np.where(tie, limit, quotient)
    eye = np.eye(op.n, dtype=bool)
    offdiag = np.where(eye, 0.0, offdiag)
    return PairCoefficients(diag=grad, offdiag=offdiag)


def ray_limit(op: SymmetricOperator, mu: ArrayLike, j: int) -> Union[float, np.ndarray]:
    """
    lim_{t→∞} f(μ + t e_j), computed from the growth rate along e_j.

    σ_k(μ + t e_j) = σ_k(μ) + t σ_{k−1}(μ | j), and σ_{k−1}(μ | j) > 0 on Γ_k; for
    the T-map every component other than T_j grows like t/(n−1). Both give +∞
    inside the cone.

    Args:
        op (SymmetricOperator): Operator.
        mu (ArrayLike): Eigenvalues in Γ, shape (..., n).
        j (int): Coordinate direction, 0-based.

    Returns:
        float | np.ndarray: Extended-real limit per vector.
    """
    mu = require_cone(op, mu)
    if not 0 <= j < op.n:
        raise ValueError(f"direction out of range: j={j}, n={op.n}")

    if op.kind is OperatorKind.LOG_SIGMA_K:
        growth = sigma_without(mu, op.k - 1, (j,))
        here = np.log(elementary_symmetric(mu, op.k)[..., op.k])
        limit = np.where(growth > 0, np.inf, np.where(growth == 0, here, -np.inf))
    else:
        limit = np.full(mu.shape[:-1], np.inf)
    return float(limit) if np.ndim(limit) == 0 else limit


def sup_boundary_value(op: SymmetricOperator) -> float:
    """sup over ∂Γ of f; σ_k (resp. σ_n∘T) vanishes on ∂Γ for both kinds."""
    return -np.inf


def _t_matrix(n: int) -> np.ndarray:
    """Matrix of the T-map: T(μ) = M μ with zero diagonal and 1/(n−1) elsewhere."""
    return (np.ones((n, n)) - np.eye(n)) / (n - 1)
