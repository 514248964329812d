# -*- coding: utf-8 -*-
"""
subsolution.py
Calculus Module - C-subsolutions
=====================

Pointwise certification that u̲ is a C-subsolution: μ(u̲)(x) ∈ Γ and every
coordinate ray limit of f from μ(u̲)(x) exceeds h(x). A certificate also
carries concrete margins (δ, R) with

    (μ(u̲) − δ·1 + Γ_n) ∩ ∂Γ^{h(x)} ⊂ B_R(0).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ahsolve.calculus.cones import cone_distance, first_violation
from ahsolve.calculus.operators import SymmetricOperator, f_eval, ray_limit
from ahsolve.errors import InadmissibleError, NotSubsolutionError

logger = logging.getLogger(__name__)

_BISECTION_STEPS = 60
_DOUBLING_STEPS = 80


@dataclass(frozen=True)
class SubsolutionCertificate:
    """
    Evidence that u̲ is a C-subsolution on the whole grid.
    """
    delta: float  # Half the smallest diagonal distance of μ(u̲) to ∂Γ
    R: float  # Radius enclosing the sampled level-set points
    per_point_margins: np.ndarray  # min_j (ray limit − h), grid shaped
    worst_point: Tuple[int, ...]  # Grid index realizing the smallest cone distance

    def __post_init__(self) -> None:
        if not (self.delta > 0 and self.R > 0):
            raise ValueError(f"certificate needs delta > 0 and R > 0, got ({self.delta}, {self.R})")
        if not np.all(self.per_point_margins > 0):
            raise ValueError("certificate margins must be strictly positive")

    @property
    def min_margin(self) -> float:
        return float(np.min(self.per_point_margins))


def check_c_subsolution(
    op: SymmetricOperator,
    mu_underline_field: np.ndarray,
    h_field: np.ndarray,
) -> SubsolutionCertificate:
    """
    Certify a candidate subsolution from its eigenvalue field.

    Args:
        op (SymmetricOperator): Operator (f, Γ).
        mu_underline_field (np.ndarray): μ(u̲) per grid point, shape (*grid, n).
        h_field (np.ndarray): Right-hand side per grid point, shape (*grid).

    Returns:
        SubsolutionCertificate: δ, R and per-point slack.

    Raises:
        InadmissibleError: If μ(u̲)(x) ∉ Γ somewhere (names the first point).
        NotSubsolutionError: If some ray limit does not exceed h(x), or if the
            diagonal margin δ rounds to zero.
    """
    mu = np.asarray(mu_underline_field, dtype=float)
    h = np.asarray(h_field, dtype=float)
    grid_shape = mu.shape[:-1]
    if h.shape != grid_shape:
        raise ValueError(f"h has shape {h.shape}, expected {grid_shape}")
    if not np.all(np.isfinite(mu)):
        raise ValueError("subsolution eigenvalues must be finite")

    failing = first_violation(op.cone, mu)
    if np.any(failing):
        flat = int(np.flatnonzero(failing)[0])
        point = _unravel(flat, grid_shape)
        raise InadmissibleError(
            f"mu(u_) leaves {op.cone.label} at grid point {point} (test {int(failing.flat[flat])})",
            point=point,
        )

    slacks = np.stack([ray_limit(op, mu, j) - h for j in range(op.n)], axis=-1)
    bad = ~(slacks > 0)
    if bad.any():
        index = int(np.flatnonzero(bad)[0])
        flat, j = divmod(index, op.n)
        point = _unravel(flat, grid_shape)
        raise NotSubsolutionError(
            f"ray limit along e_{j + 1} does not exceed h at grid point {point}",
            point=point,
            direction=j,
        )
    margins = slacks.min(axis=-1)

    distance = np.asarray(cone_distance(op.cone, mu))
    delta = 0.5 * float(distance.min())
    worst = _unravel(int(np.argmin(distance)), grid_shape)
    if not delta > 0:
        raise NotSubsolutionError(
            f"mu(u_) has no diagonal margin inside {op.cone.label} at grid point {worst}",
            point=worst,
            direction=-1,
        )
    radius = _level_set_radius(op, mu - delta, h)

    logger.info(
        "C-subsolution certified: delta=%.4g (at %s), R=%.4g, min slack=%s",
        delta, worst, radius, float(margins.min()),
    )
    return SubsolutionCertificate(delta=delta, R=radius, per_point_margins=margins, worst_point=worst)


def _level_set_radius(op: SymmetricOperator, vertex: np.ndarray, h: np.ndarray) -> float:
    """
    Largest |μ| among the points where the rays vertex + t e_j cross {f = h}.

    The rays stay in Γ because Γ + Γ_n ⊂ Γ, and f increases along them.
    """
    radius = float(np.linalg.norm(vertex, axis=-1).max())
    below = f_eval(op, vertex) < h
    if not np.any(below):
        return max(radius, np.finfo(float).tiny)

    v = vertex[below]
    level = h[below]
    for j in range(op.n):
        direction = np.zeros(op.n)
        direction[j] = 1.0
        hi = np.ones(len(v))
        for _ in range(_DOUBLING_STEPS):
            short = f_eval(op, v + hi[:, None] * direction) < level
            if not short.any():
                break
            hi = np.where(short, 2.0 * hi, hi)
        lo = np.zeros(len(v))
        for _ in range(_BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            under = f_eval(op, v + mid[:, None] * direction) < level
            lo = np.where(under, mid, lo)
            hi = np.where(under, hi, mid)
        crossing = v + hi[:, None] * direction
        radius = max(radius, float(np.linalg.norm(crossing, axis=-1).max()))
    return radius


def _unravel(flat: int, shape: Tuple[int, ...]) -> Tuple[int, ...]:
    return tuple(int(i) for i in np.unravel_index(flat, shape)) if shape else ()
