# -*- coding: utf-8 -*-
"""
fields.py
Geometry Module - Model Manifold
=====================

Discrete (M, χ, J) on the periodic grid: frames, bracket corrections, the
∂∂̄ operator, ω_u assembly and the canonical Laplacian.

Conventions
-----------
- χ is the Euclidean metric in the coordinates x^1..x^{2n} in every preset.
- A (1,0)-frame e_i = Σ_α c_i^α ∂_α is stored through its complex coefficients
  c (shape (*grid, n, 2n)); the flat frame is e_i = (∂_{2i−1} − √−1 ∂_{2i}) / √2.
- Frame-wise, (∂∂̄u)(e_i, ē_j) = e_i ē_j u − [e_i, ē_j]^{(0,1)} u, which is
      Σ_{αβ} c_i^α c̄_j^β u_{αβ} + Σ_β D_ij^β u_β
  with D_ij^β = e_i(c̄_j^β) − Σ_k b_ijk c̄_k^β and b_ijk = χ([e_i, ē_j], e_k).
- PerturbedJ rotates the flat structure pointwise: J = P J₀ Pᵀ with
  P = exp(a φ K), φ = Σ_α sin(2πx^α / period) and K a fixed plane rotation
  generator. Frame derivatives ∂_α c_i = a ∂_αφ K c_i are exact.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ahsolve.errors import GeometryError
from ahsolve.geometry.grid import PeriodicGrid, ScalarField, gradient, grid_coordinates, hessian
from ahsolve.geometry.pencil import HermitianPencil, hermitian_defect

logger = logging.getLogger(__name__)

STRUCTURE_ATOL = 1e-12  # J² = −Id and compatibility
FRAME_ATOL = 1e-10  # χ-unitarity and type of the frame

FieldLike = Union[ScalarField, np.ndarray]


class GeometryPreset(str, enum.Enum):
    """Model manifolds available on the grid."""

    FLAT_STANDARD = "flat"
    PERTURBED_J = "perturbed_j"


@dataclass(frozen=True)
class GeometryFields:
    """
    Pointwise geometric data of the model manifold.

    Arrays carry the grid axes first and the tensor axes last.
    """
    grid: PeriodicGrid
    preset: GeometryPreset
    amplitude: float
    chi_field: np.ndarray = field(repr=False)  # (*grid, n, n) χ in the frame, identity
    J_field: np.ndarray = field(repr=False)  # (*grid, 2n, 2n) real
    frame_field: np.ndarray = field(repr=False)  # (*grid, n, 2n) coefficients c_i^α
    frame_derivative: np.ndarray = field(repr=False)  # (*grid, 2n, n, 2n) ∂_α c_i^β
    bracket_field: np.ndarray = field(repr=False)  # (*grid, n, n, n) b_ijk
    first_order: np.ndarray = field(repr=False)  # (*grid, n, n, 2n) D_ij^β

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def is_flat(self) -> bool:
        return not np.any(self.bracket_field) and not np.any(self.first_order)

    def describe(self) -> dict:
        return {"preset": self.preset.value, "amplitude": self.amplitude, **self.grid.describe()}


# --------------------------------------------------------------------------- #
# Construction
# --------------------------------------------------------------------------- #
def standard_structure(n: int) -> np.ndarray:
    """Constant J₀ with J₀∂_{2i−1} = ∂_{2i}."""
    d = 2 * n
    j0 = np.zeros((d, d))
    for i in range(n):
        j0[2 * i + 1, 2 * i] = 1.0
        j0[2 * i, 2 * i + 1] = -1.0
    return j0


def standard_frame(n: int) -> np.ndarray:
    """Flat (1,0)-frame coefficients, shape (n, 2n)."""
    c = np.zeros((n, 2 * n), dtype=complex)
    for i in range(n):
        c[i, 2 * i] = 1.0 / np.sqrt(2.0)
        c[i, 2 * i + 1] = -1j / np.sqrt(2.0)
    return c


def rotation_generator(n: int) -> np.ndarray:
    """Plane rotation generator used by PerturbedJ; for n = 2 it mixes x¹ with x³."""
    d = 2 * n
    axis = 2 if n >= 2 else 1
    k = np.zeros((d, d))
    k[axis, 0] = 1.0
    k[0, axis] = -1.0
    return k


def build_geometry(
    grid: PeriodicGrid,
    preset: Union[GeometryPreset, str] = GeometryPreset.FLAT_STANDARD,
    amplitude: float = 0.0,
) -> GeometryFields:
    """
    Build the frame data for a preset.

    Args:
        grid (PeriodicGrid): Grid.
        preset (GeometryPreset | str): "flat" or "perturbed_j".
        amplitude (float): Perturbation strength for PerturbedJ (ignored for flat).

    Returns:
        GeometryFields: Frames, J, bracket and first-order coefficients.

    Raises:
        GeometryError: If J² = −Id, compatibility or frame unitarity fails.
    """
    preset = GeometryPreset(preset)
    if not np.isfinite(amplitude):
        raise GeometryError(f"amplitude must be finite, got {amplitude}", invariant="amplitude")
    if preset is GeometryPreset.FLAT_STANDARD:
        amplitude = 0.0

    n, d = grid.n, grid.dim
    shape = grid.shape
    j0 = standard_structure(n)
    c0 = standard_frame(n)
    gen = rotation_generator(n)

    coords = grid_coordinates(grid)
    wave = 2.0 * np.pi / grid.period
    phi = sum(np.sin(wave * x) for x in coords)
    dphi = np.stack([wave * np.cos(wave * x) for x in coords], axis=-1)  # (*grid, 2n)

    angle = amplitude * phi
    gen_sq = gen @ gen
    rot = (
        np.eye(d)
        + np.sin(angle)[..., None, None] * gen
        + (1.0 - np.cos(angle))[..., None, None] * gen_sq
    )
    J = rot @ j0 @ np.swapaxes(rot, -1, -2)
    frame = np.einsum("...ab,ib->...ia", rot, c0)

    # ∂_α c_i^β = a ∂_αφ (K c_i)^β
    k_frame = np.einsum("ab,...ib->...ia", gen, frame)
    dframe = amplitude * dphi[..., :, None, None] * k_frame[..., None, :, :]

    first_order, bracket = _bracket_terms(frame, dframe)
    chi = np.broadcast_to(np.eye(n, dtype=complex), shape + (n, n)).copy()

    geom = GeometryFields(
        grid=grid,
        preset=preset,
        amplitude=float(amplitude),
        chi_field=chi,
        J_field=J,
        frame_field=frame,
        frame_derivative=dframe,
        bracket_field=bracket,
        first_order=first_order,
    )
    _check_invariants(geom)
    logger.debug(
        "Built %s geometry on %s (amplitude=%g, max |b|=%.3e)",
        preset.value, grid.shape, amplitude, float(np.abs(bracket).max(initial=0.0)),
    )
    return geom


def _bracket_terms(frame: np.ndarray, dframe: np.ndarray):
    """First-order coefficients D_ij^β and bracket components b_ijk."""
    frame_bar = np.conj(frame)
    dframe_bar = np.conj(dframe)
    # e_i(c̄_j^β) = Σ_α c_i^α ∂_α c̄_j^β
    ei_cbar = np.einsum("...ia,...ajb->...ijb", frame, dframe_bar)
    # ē_j(c_i^β) = Σ_α c̄_j^α ∂_α c_i^β
    ebarj_c = np.einsum("...ja,...aib->...ijb", frame_bar, dframe)
    lie = ei_cbar - ebarj_c  # [e_i, ē_j]^β
    bracket = np.einsum("...ijb,...kb->...ijk", lie, frame)
    first_order = ei_cbar - np.einsum("...ijk,...kb->...ijb", bracket, frame_bar)
    return first_order, bracket


def _check_invariants(geom: GeometryFields) -> None:
    d = geom.grid.dim
    n = geom.n
    eye_d = np.eye(d)
    J = geom.J_field
    c = geom.frame_field

    checks = [
        ("J^2 = -Id", float(np.abs(J @ J + eye_d).max()), STRUCTURE_ATOL),
        ("compatibility", float(np.abs(np.swapaxes(J, -1, -2) @ J - eye_d).max()), STRUCTURE_ATOL),
        ("frame unitarity", float(np.abs(c @ np.conj(np.swapaxes(c, -1, -2)) - np.eye(n)).max()), FRAME_ATOL),
        ("frame type (1,0)", float(np.abs(np.einsum("...ab,...ib->...ia", J, c) - 1j * c).max()), FRAME_ATOL),
    ]
    for name, defect, tol in checks:
        if not defect <= tol:
            raise GeometryError(f"geometry invariant '{name}' fails: defect {defect:.3e} > {tol:g}",
                                invariant=name, defect=defect)


# --------------------------------------------------------------------------- #
# Operators on scalar fields
# --------------------------------------------------------------------------- #
def _values(geom: GeometryFields, u: FieldLike) -> np.ndarray:
    values = u.values if isinstance(u, ScalarField) else np.asarray(u, dtype=float)
    return values.reshape(geom.grid.shape)


def point_gradient(geom: GeometryFields, u: FieldLike) -> np.ndarray:
    """Discrete gradient with the component axis last, (*grid, 2n)."""
    return np.moveaxis(gradient(geom.grid, _values(geom, u)), 0, -1)


def point_hessian(geom: GeometryFields, u: FieldLike) -> np.ndarray:
    """Discrete real Hessian with the matrix axes last, (*grid, 2n, 2n)."""
    return np.moveaxis(hessian(geom.grid, _values(geom, u)), (0, 1), (-2, -1))


def ddbar_from_derivatives(geom: GeometryFields, grad: np.ndarray, hess: np.ndarray) -> np.ndarray:
    """
    Frame-wise ∂∂̄ from given first and second derivatives (not symmetrized).

    Args:
        geom (GeometryFields): Geometry.
        grad (np.ndarray): u_β, shape (*grid, 2n).
        hess (np.ndarray): u_{αβ}, shape (*grid, 2n, 2n), symmetric.

    Returns:
        np.ndarray: (*grid, n, n) complex.
    """
    c = geom.frame_field
    second = np.einsum("...ia,...ab,...jb->...ij", c, hess, np.conj(c), optimize=True)
    first = np.einsum("...ijb,...b->...ij", geom.first_order, grad)
    return second + first


def _symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))


def ddbar(geom: GeometryFields, u: FieldLike) -> np.ndarray:
    """
    (∂∂̄u)(e_i, ē_j) at every grid point from centered stencils.

    The result is symmetrized; `ddbar_defect` reports what was removed.

    Returns:
        np.ndarray: Hermitian blocks, shape (*grid, n, n).
    """
    raw = ddbar_from_derivatives(geom, point_gradient(geom, u), point_hessian(geom, u))
    return _symmetrize(raw)


def ddbar_defect(geom: GeometryFields, u: FieldLike) -> float:
    """Hermitian defect max |M − M*| of the unsymmetrized ∂∂̄u."""
    raw = ddbar_from_derivatives(geom, point_gradient(geom, u), point_hessian(geom, u))
    return hermitian_defect(raw)


def omega_u(geom: GeometryFields, omega_field: np.ndarray, u: FieldLike) -> HermitianPencil:
    """
    Pencils (χ, g + ∂∂̄u) at every point.

    Args:
        geom (GeometryFields): Geometry.
        omega_field (np.ndarray): Background g in the frame, (*grid, n, n) Hermitian.
        u (ScalarField | np.ndarray): Potential.

    Returns:
        HermitianPencil: Batched pencil.
    """
    return HermitianPencil(chi=geom.chi_field, g_tilde=np.asarray(omega_field) + ddbar(geom, u))


def chi_trace(geom: GeometryFields, blocks: np.ndarray) -> np.ndarray:
    """tr_χ of Hermitian blocks, real (*grid)."""
    inv = np.linalg.inv(geom.chi_field)
    return np.einsum("...ij,...ji->...", inv, blocks).real


def canonical_laplacian(geom: GeometryFields, u: FieldLike) -> ScalarField:
    """Δ^C u = tr_χ ∂∂̄u."""
    return ScalarField(geom.grid, chi_trace(geom, ddbar(geom, u)))


def real_hessian_sup(geom: GeometryFields, u: FieldLike) -> float:
    """sup over points of the Frobenius norm of the discrete real Hessian."""
    hess = point_hessian(geom, u)
    return float(np.sqrt((hess ** 2).sum(axis=(-2, -1))).max())


def gradient_sup(geom: GeometryFields, u: FieldLike) -> float:
    """sup over points of |∂u|_χ, the Euclidean norm of the discrete gradient."""
    grad = point_gradient(geom, u)
    return float(np.sqrt((grad ** 2).sum(axis=-1)).max())


def hessian_top_eigenvalue(geom: GeometryFields, u: FieldLike) -> np.ndarray:
    """Largest eigenvalue λ₁ of the real Hessian at every point."""
    return np.linalg.eigvalsh(point_hessian(geom, u))[..., -1]
