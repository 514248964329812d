# -*- coding: utf-8 -*-
"""
pencil.py
Geometry Module - Hermitian Pencils
=====================

Pointwise linear algebra for the pair (χ, g̃): eigenvalues μ of g̃ with
respect to χ, a χ-orthonormal eigenframe, and the linearization coefficients
F^{ij̄} = frame · diag(f_i) · frame*.

All routines are batched: matrices have shape (..., n, n) so a whole grid is
processed with one call. The eigensolve reduces χ = L L* by Cholesky and
diagonalizes L⁻¹ g̃ L⁻* with a Hermitian eigensolver.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from ahsolve.calculus.operators import SymmetricOperator, f_grad, f_hess, pair_coefficients
from ahsolve.errors import InvariantViolationError, PencilError

logger = logging.getLogger(__name__)

HERMITIAN_ATOL = 1e-12


@dataclass(frozen=True)
class HermitianPencil:
    """
    The matrix pair (χ, g̃) at one or many grid points.
    """
    chi: np.ndarray  # Background metric block, Hermitian positive definite
    g_tilde: np.ndarray  # ω_u block, Hermitian

    def __post_init__(self) -> None:
        chi = np.asarray(self.chi)
        g = np.asarray(self.g_tilde)
        if chi.shape[-2:] != g.shape[-2:] or chi.shape[-1] != chi.shape[-2]:
            raise ValueError(f"pencil blocks must be square and match: {chi.shape} vs {g.shape}")
        defect = hermitian_defect(g)
        if defect > HERMITIAN_ATOL * (1.0 + float(np.abs(g).max(initial=0.0))):
            raise ValueError(f"g_tilde is not Hermitian (defect {defect:.3e})")

    @property
    def n(self) -> int:
        return int(np.shape(self.chi)[-1])


@dataclass(frozen=True)
class SpectralData:
    """
    Sorted eigenvalues and a χ-orthonormal eigenframe.
    """
    mu: np.ndarray  # Shape (..., n), descending
    frame: np.ndarray  # Shape (..., n, n); column i is the eigenvector of μ_i


def hermitian_defect(a: np.ndarray) -> float:
    """Largest entry of |A − A*|."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.abs(a - np.conj(np.swapaxes(a, -1, -2))).max())


def pencil_eigen(p: HermitianPencil) -> SpectralData:
    """
    Eigenvalues of χ⁻¹ g̃ sorted descending, with a χ-unitary eigenframe.

    Args:
        p (HermitianPencil): Pencil, single or batched.

    Returns:
        SpectralData: μ and frame satisfying frame*·χ·frame = I and
        frame*·g̃·frame = diag(μ).

    Raises:
        PencilError: If χ is not positive definite at some point.
    """
    chi = np.asarray(p.chi, dtype=complex)
    g = np.asarray(p.g_tilde, dtype=complex)
    g = 0.5 * (g + np.conj(np.swapaxes(g, -1, -2)))

    chi_min = np.linalg.eigvalsh(chi)[..., 0]
    if np.any(~(chi_min > 0)):
        point = int(np.flatnonzero(~(np.atleast_1d(chi_min) > 0))[0])
        raise PencilError(f"chi is not positive definite at sample {point}", point=point)

    lower = np.linalg.cholesky(chi)
    lower_inv = np.linalg.inv(lower)
    lower_inv_h = np.conj(np.swapaxes(lower_inv, -1, -2))
    reduced = lower_inv @ g @ lower_inv_h
    values, vectors = np.linalg.eigh(reduced)

    mu = values[..., ::-1]
    frame = lower_inv_h @ vectors[..., ::-1]
    if np.any(np.diff(mu, axis=-1) > 0):
        raise InvariantViolationError("pencil eigenvalues are not sorted descending")
    return SpectralData(mu=mu, frame=frame)


def linearization_coeffs(op: SymmetricOperator, s: SpectralData) -> np.ndarray:
    """
    F^{ij̄} in the ambient gauge: frame · diag(f_i(μ)) · frame*.

    The directional derivative of F along a Hermitian H is contract(F, H).

    Raises:
        ConeViolationError: If μ ∉ Γ.
    """
    weights = f_grad(op, s.mu)
    frame = s.frame
    return (frame * weights[..., None, :]) @ np.conj(np.swapaxes(frame, -1, -2))


def mean_f_sum(s: SpectralData, op: SymmetricOperator) -> Union[float, np.ndarray]:
    """𝓕 = Σ_i F^{iī} = Σ_i f_i(μ)."""
    total = f_grad(op, s.mu).sum(axis=-1)
    return float(total) if np.ndim(total) == 0 else total


def contract(coeffs: np.ndarray, h: np.ndarray) -> Union[float, np.ndarray]:
    """Real pairing Re tr(F·H) = Re Σ_ij F_ji H_ij."""
    value = np.einsum("...ji,...ij->...", coeffs, h).real
    return float(value) if np.ndim(value) == 0 else value


def second_variation(op: SymmetricOperator, s: SpectralData, h: np.ndarray) -> Union[float, np.ndarray]:
    """
    D²F(g̃)[H, H] from the eigenvalue calculus.

    With Ĥ = frame*·H·frame,
    D²F[H, H] = Σ_ik f_ik Ĥ_iī Ĥ_kk̄ + Σ_{i≠j} (f_i − f_j)/(μ_i − μ_j) |Ĥ_ij̄|².
    """
    frame = s.frame
    h_hat = np.conj(np.swapaxes(frame, -1, -2)) @ h @ frame
    diagonal = np.diagonal(h_hat, axis1=-2, axis2=-1).real
    hess = f_hess(op, s.mu)
    pairs = pair_coefficients(op, s.mu)
    value = np.einsum("...i,...ik,...k->...", diagonal, hess, diagonal)
    value = value + np.einsum("...ij,...ij->...", pairs.offdiag, np.abs(h_hat) ** 2)
    return float(value) if np.ndim(value) == 0 else value
