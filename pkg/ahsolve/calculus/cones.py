# -*- coding: utf-8 -*-
"""
cones.py
Calculus Module - Cones
=====================

Elementary symmetric polynomials, Gårding cones Γ_k and the cone pulled back
by the T-map, T(μ)_k = (1/(n−1)) Σ_{i≠k} μ_i.

Every function accepts either a single vector of shape (n,) or a batch of
shape (..., n); the trailing axis always holds the eigenvalues.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, list, tuple]


class ConeKind(str, enum.Enum):
    """Supported open symmetric cones."""

    GAMMA_K = "gamma_k"
    PULLBACK_BY_T = "pullback_by_t"


@dataclass(frozen=True)
class ConeDescriptor:
    """
    An open symmetric cone Γ ⊊ ℝⁿ containing the positive orthant.
    """
    kind: ConeKind  # Γ_k or T^{-1}(Γ_n)
    n: int  # Number of eigenvalues
    k: int = 0  # Only meaningful for Γ_k

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"cone dimension must be positive, got n={self.n}")
        if self.kind is ConeKind.GAMMA_K and not 1 <= self.k <= self.n:
            raise ValueError(f"Γ_k needs 1 ≤ k ≤ n, got k={self.k}, n={self.n}")
        if self.kind is ConeKind.PULLBACK_BY_T and self.n < 2:
            raise ValueError("the T-map needs n ≥ 2")

    @classmethod
    def gamma(cls, k: int, n: int) -> "ConeDescriptor":
        return cls(ConeKind.GAMMA_K, n, k)

    @classmethod
    def pullback(cls, n: int) -> "ConeDescriptor":
        return cls(ConeKind.PULLBACK_BY_T, n)

    @property
    def label(self) -> str:
        if self.kind is ConeKind.GAMMA_K:
            return f"Gamma_{self.k}"
        return "T^-1(Gamma_n)"


# --------------------------------------------------------------------------- #
# Symmetric polynomials
# --------------------------------------------------------------------------- #
def elementary_symmetric(mu: ArrayLike, kmax: int) -> np.ndarray:
    """
    Compute σ_0, …, σ_kmax of the trailing axis of `mu`.

    Uses the product recurrence E_j ← E_j + μ_i E_{j−1} with a Neumaier
    compensation term carried per degree, O(n·kmax) per vector.

    Args:
        mu (ArrayLike): Eigenvalues, shape (..., n).
        kmax (int): Highest degree wanted, 0 ≤ kmax ≤ n.

    Returns:
        np.ndarray: Shape (..., kmax + 1); entry j is σ_j.
    """
    mu = np.asarray(mu, dtype=float)
    n = mu.shape[-1]
    if not 0 <= kmax <= n:
        raise ValueError(f"degree out of range: kmax={kmax}, n={n}")

    batch = mu.shape[:-1]
    total = np.zeros(batch + (kmax + 1,))
    comp = np.zeros_like(total)
    total[..., 0] = 1.0

    for i in range(n):
        x = mu[..., i]
        # Descending j keeps E_{j-1} at its value before μ_i was absorbed
        for j in range(min(i + 1, kmax), 0, -1):
            term = x * (total[..., j - 1] + comp[..., j - 1])
            acc = total[..., j]
            s = acc + term
            comp[..., j] += np.where(np.abs(acc) >= np.abs(term), (acc - s) + term, (term - s) + acc)
            total[..., j] = s

    return total + comp


def sigma_k(mu: ArrayLike, k: int) -> Union[float, np.ndarray]:
    """
    k-th elementary symmetric polynomial σ_k(μ) = Σ μ_{i₁}⋯μ_{i_k}.

    Args:
        mu (ArrayLike): Eigenvalues, shape (..., n).
        k (int): Degree, 1 ≤ k ≤ n.

    Returns:
        float | np.ndarray: σ_k per vector.
    """
    mu = np.asarray(mu, dtype=float)
    n = mu.shape[-1]
    if not 1 <= k <= n:
        raise ValueError(f"k out of range: k={k}, n={n}")
    value = elementary_symmetric(mu, k)[..., k]
    return float(value) if value.ndim == 0 else value


def sigma_without(mu: np.ndarray, k: int, drop: tuple) -> np.ndarray:
    """σ_k of μ with the entries listed in `drop` removed (σ_0 = 1, σ_{<0} = 0)."""
    if k < 0:
        return np.zeros(mu.shape[:-1])
    keep = [i for i in range(mu.shape[-1]) if i not in drop]
    if k > len(keep):
        return np.zeros(mu.shape[:-1])
    return elementary_symmetric(mu[..., keep], k)[..., k]


def t_transform(mu: ArrayLike) -> np.ndarray:
    """
    T(μ)_k = (1/(n−1)) Σ_{i≠k} μ_i.

    Args:
        mu (ArrayLike): Eigenvalues, shape (..., n) with n ≥ 2.

    Returns:
        np.ndarray: T(μ), same shape.
    """
    mu = np.asarray(mu, dtype=float)
    n = mu.shape[-1]
    if n < 2:
        raise ValueError(f"the T-map needs n ≥ 2, got n={n}")
    return (mu.sum(axis=-1, keepdims=True) - mu) / (n - 1)


# --------------------------------------------------------------------------- #
# Membership
# --------------------------------------------------------------------------- #
def first_violation(cone: ConeDescriptor, mu: ArrayLike) -> np.ndarray:
    """
    Index (1-based) of the first failing membership test, 0 when inside.

    For Γ_k this is the first i with σ_i(μ) ≤ 0; for T^{-1}(Γ_n) it is the first
    nonpositive component of T(μ). Boundary points count as outside.
    """
    mu = np.asarray(mu, dtype=float)
    _check_dim(cone, mu)
    if cone.kind is ConeKind.GAMMA_K:
        tests = elementary_symmetric(mu, cone.k)[..., 1:]
    else:
        tests = t_transform(mu)
    failing = ~(tests > 0)  # NaN fails too
    first = np.argmax(failing, axis=-1) + 1
    return np.where(failing.any(axis=-1), first, 0)


def in_cone(cone: ConeDescriptor, mu: ArrayLike) -> Union[bool, np.ndarray]:
    """
    Open-cone membership test.

    Args:
        cone (ConeDescriptor): Γ_k or T^{-1}(Γ_n).
        mu (ArrayLike): Eigenvalues, shape (..., n).

    Returns:
        bool | np.ndarray: True where μ lies in the open cone.
    """
    inside = first_violation(cone, mu) == 0
    return bool(inside) if np.ndim(inside) == 0 else inside


def cone_distance(cone: ConeDescriptor, mu: ArrayLike, iterations: int = 80) -> Union[float, np.ndarray]:
    """
    Largest s ≥ 0 with μ − s·1 still in the closed cone.

    Closed form min T(μ) for the pulled-back cone (T(1) = 1); bisection along
    −1 for Γ_k. Points outside the cone get 0.

    Args:
        cone (ConeDescriptor): The cone.
        mu (ArrayLike): Eigenvalues, shape (..., n).
        iterations (int): Bisection steps.

    Returns:
        float | np.ndarray: Distance along the diagonal direction.
    """
    mu = np.asarray(mu, dtype=float)
    _check_dim(cone, mu)
    inside = first_violation(cone, mu) == 0

    if cone.kind is ConeKind.PULLBACK_BY_T:
        dist = np.where(inside, t_transform(mu).min(axis=-1), 0.0)
    else:
        lo = np.zeros(mu.shape[:-1])
        # Beyond max μ every entry is negative, so σ_1 < 0
        hi = np.maximum(mu.max(axis=-1), 0.0) + 1.0
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            ok = first_violation(cone, mu - mid[..., None]) == 0
            lo = np.where(ok, mid, lo)
            hi = np.where(ok, hi, mid)
        dist = np.where(inside, lo, 0.0)

    return float(dist) if np.ndim(dist) == 0 else dist


def _check_dim(cone: ConeDescriptor, mu: np.ndarray) -> None:
    if mu.shape[-1] != cone.n:
        raise ValueError(f"expected {cone.n} eigenvalues, got {mu.shape[-1]}")
