# -*- coding: utf-8 -*-
"""
grid.py
Geometry Module - Periodic Grid
=====================

Uniform periodic grid on the torus [0, period)^{2n} and centered stencils.
Real axis 2i−1, 2i (1-based) carry the i-th complex direction.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

MAX_COMPLEX_DIM = 2


@dataclass(frozen=True)
class PeriodicGrid:
    """
    Point counts and spacing of the model torus.
    """
    n: int  # Complex dimension
    sizes: Tuple[int, ...]  # Point count per real axis (2n entries)
    period: float = 1.0

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_COMPLEX_DIM:
            raise ValueError(f"complex dimension must be in 1..{MAX_COMPLEX_DIM}, got {self.n}")
        if len(self.sizes) != 2 * self.n:
            raise ValueError(f"need {2 * self.n} axis sizes, got {len(self.sizes)}")
        for size in self.sizes:
            if size < 4 or size % 2:
                raise ValueError(f"axis sizes must be even and ≥ 4, got {self.sizes}")

    @classmethod
    def uniform(cls, n: int, size: int, period: float = 1.0) -> "PeriodicGrid":
        return cls(n, (size,) * (2 * n), period)

    @property
    def dim(self) -> int:
        """Real dimension 2n."""
        return 2 * self.n

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.sizes)

    @property
    def num_points(self) -> int:
        return int(np.prod(self.sizes))

    @property
    def spacing(self) -> Tuple[float, ...]:
        return tuple(self.period / size for size in self.sizes)

    def coordinates(self) -> List[np.ndarray]:
        """Coordinate arrays x^1..x^{2n}, each of grid shape."""
        axes = [np.arange(size) * step for size, step in zip(self.sizes, self.spacing)]
        return list(np.meshgrid(*axes, indexing="ij"))

    def describe(self) -> dict:
        return {"n": self.n, "sizes": list(self.sizes), "spacing": list(self.spacing), "period": self.period}


@dataclass(frozen=True)
class ScalarField:
    """
    Real values on every grid point.
    """
    grid: PeriodicGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            values = values.reshape(self.grid.shape)
        if not np.all(np.isfinite(values)):
            raise ValueError("scalar field has non-finite values")
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: PeriodicGrid) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape))

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def shifted(self, constant: float) -> "ScalarField":
        return ScalarField(self.grid, self.values + constant)

    def __add__(self, other: Union["ScalarField", float]) -> "ScalarField":
        if isinstance(other, ScalarField):
            return ScalarField(self.grid, self.values + other.values)
        return ScalarField(self.grid, self.values + other)

    def __mul__(self, scale: float) -> "ScalarField":
        return ScalarField(self.grid, self.values * scale)

    __rmul__ = __mul__


# --------------------------------------------------------------------------- #
# Stencils
# --------------------------------------------------------------------------- #
def _shift(u: np.ndarray, axis: int, step: int) -> np.ndarray:
    """u evaluated at index i + step along `axis` (periodic)."""
    return np.roll(u, -step, axis=axis)


def first_difference(grid: PeriodicGrid, u: np.ndarray, axis: int) -> np.ndarray:
    """Centered first difference (u[i+1] − u[i−1]) / 2h."""
    h = grid.spacing[axis]
    return (_shift(u, axis, 1) - _shift(u, axis, -1)) / (2.0 * h)


def second_difference(grid: PeriodicGrid, u: np.ndarray, axis: int) -> np.ndarray:
    """Centered second difference (u[i+1] − 2u[i] + u[i−1]) / h²."""
    h = grid.spacing[axis]
    return (_shift(u, axis, 1) - 2.0 * u + _shift(u, axis, -1)) / (h * h)


def cross_difference(grid: PeriodicGrid, u: np.ndarray, a: int, b: int) -> np.ndarray:
    """Four-point centered mixed derivative ∂_a∂_b u."""
    ha, hb = grid.spacing[a], grid.spacing[b]
    plus = _shift(u, a, 1)
    minus = _shift(u, a, -1)
    value = _shift(plus, b, 1) - _shift(plus, b, -1) - _shift(minus, b, 1) + _shift(minus, b, -1)
    return value / (4.0 * ha * hb)


def grid_coordinates(grid: PeriodicGrid) -> List[np.ndarray]:
    """Coordinate arrays x^α, one per real axis, each shaped like the grid."""
    return grid.coordinates()


def gradient(grid: PeriodicGrid, u: np.ndarray) -> np.ndarray:
    """Discrete gradient, shape (2n, *grid)."""
    u = np.asarray(u, dtype=float).reshape(grid.shape)
    return np.stack([first_difference(grid, u, a) for a in range(grid.dim)])


def hessian(grid: PeriodicGrid, u: np.ndarray) -> np.ndarray:
    """Symmetric discrete Hessian, shape (2n, 2n, *grid)."""
    u = np.asarray(u, dtype=float).reshape(grid.shape)
    d = grid.dim
    out = np.empty((d, d) + grid.shape)
    for a in range(d):
        out[a, a] = second_difference(grid, u, a)
        for b in range(a + 1, d):
            mixed = cross_difference(grid, u, a, b)
            out[a, b] = mixed
            out[b, a] = mixed
    return out


def stencil_offsets(grid: PeriodicGrid) -> Sequence[Tuple[Tuple[int, ...], str, Tuple[int, ...]]]:
    """
    Offsets and weights of every stencil used above, for sparse assembly.

    Returns:
        Sequence: (derivative key, kind, offset) triples. Keys are (a,) for
        first derivatives and (a, b) for second derivatives.
    """
    d = grid.dim
    entries = []
    for a in range(d):
        entries.append(((a,), "first", _unit(d, a, 1)))
        entries.append(((a,), "first", _unit(d, a, -1)))
    for a in range(d):
        for step in (1, 0, -1):
            entries.append(((a, a), "second", _unit(d, a, step)))
        for b in range(a + 1, d):
            for sa in (1, -1):
                for sb in (1, -1):
                    offset = [0] * d
                    offset[a], offset[b] = sa, sb
                    entries.append(((a, b), "cross", tuple(offset)))
    return entries


def stencil_weight(grid: PeriodicGrid, key: Tuple[int, ...], kind: str, offset: Tuple[int, ...]) -> float:
    """Weight of `offset` in the stencil identified by (key, kind)."""
    if kind == "first":
        a = key[0]
        return offset[a] / (2.0 * grid.spacing[a])
    if kind == "second":
        a = key[0]
        h = grid.spacing[a]
        return (-2.0 if offset[a] == 0 else 1.0) / (h * h)
    a, b = key
    return offset[a] * offset[b] / (4.0 * grid.spacing[a] * grid.spacing[b])


def _unit(d: int, axis: int, step: int) -> Tuple[int, ...]:
    offset = [0] * d
    offset[axis] = step
    return tuple(offset)
