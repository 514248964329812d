# -*- coding: utf-8 -*-
"""
catalog.py
Analytic Catalog
=====================

Named trigonometric fields and background forms used by problem files.

Fields carry exact first and second derivatives so manufactured right-hand
sides can be built without stencil error. Backgrounds are Hermitian blocks
(*grid, n, n) expressed in the (1,0)-frame of the geometry.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Mapping, Optional, Tuple

import numpy as np

from ahsolve.errors import ConfigError
from ahsolve.geometry.grid import PeriodicGrid, ScalarField, grid_coordinates

logger = logging.getLogger(__name__)

FIELD_NAMES = ("zero", "cos_product", "cos_sum", "sin_product")
BACKGROUND_NAMES = ("identity", "diag_wave", "constant_diag", "eta_reduction", "violating_point")


# --------------------------------------------------------------------------- #
# Scalar fields
# --------------------------------------------------------------------------- #
@dataclass(frozen=True)
class AnalyticField:
    """
    a · ∏ or Σ of cos / sin(2π m x^α / period) over the chosen axes.
    """
    name: str  # One of FIELD_NAMES
    amplitude: float = 0.0
    frequency: int = 1
    axes: Tuple[int, ...] = (0,)  # 0-based real axes

    def __post_init__(self) -> None:
        if self.name not in FIELD_NAMES:
            raise ConfigError(f"unknown field '{self.name}', expected one of {', '.join(FIELD_NAMES)}")
        if self.frequency < 1:
            raise ConfigError(f"field frequency must be ≥ 1, got {self.frequency}")
        if len(set(self.axes)) != len(self.axes):
            raise ConfigError(f"field axes must be distinct, got {self.axes}")

    def _check(self, grid: PeriodicGrid) -> None:
        if any(not 0 <= axis < grid.dim for axis in self.axes):
            raise ConfigError(f"field axes {self.axes} out of range for real dimension {grid.dim}")

    def _factors(self, grid: PeriodicGrid):
        """Per-axis (value, first, second) derivative arrays."""
        self._check(grid)
        coords = grid_coordinates(grid)
        k = 2.0 * np.pi * self.frequency / grid.period
        out = {}
        for axis in self.axes:
            arg = k * coords[axis]
            if self.name == "sin_product":
                out[axis] = (np.sin(arg), k * np.cos(arg), -k * k * np.sin(arg))
            else:
                out[axis] = (np.cos(arg), -k * np.sin(arg), -k * k * np.cos(arg))
        return out

    def values(self, grid: PeriodicGrid) -> np.ndarray:
        if self.name == "zero" or self.amplitude == 0.0:
            return np.zeros(grid.shape)
        factors = self._factors(grid)
        parts = [f[0] for f in factors.values()]
        if self.name == "cos_sum":
            return self.amplitude * sum(parts)
        return self.amplitude * np.prod(parts, axis=0)

    def field(self, grid: PeriodicGrid) -> ScalarField:
        return ScalarField(grid, self.values(grid))

    def gradient(self, grid: PeriodicGrid) -> np.ndarray:
        """Exact gradient, shape (*grid, 2n)."""
        grad = np.zeros(grid.shape + (grid.dim,))
        if self.name == "zero" or self.amplitude == 0.0:
            return grad
        factors = self._factors(grid)
        for axis in self.axes:
            if self.name == "cos_sum":
                grad[..., axis] = factors[axis][1]
            else:
                grad[..., axis] = factors[axis][1] * self._others(factors, (axis,))
        return self.amplitude * grad

    def hessian(self, grid: PeriodicGrid) -> np.ndarray:
        """Exact Hessian, shape (*grid, 2n, 2n)."""
        hess = np.zeros(grid.shape + (grid.dim, grid.dim))
        if self.name == "zero" or self.amplitude == 0.0:
            return hess
        factors = self._factors(grid)
        for a in self.axes:
            if self.name == "cos_sum":
                hess[..., a, a] = factors[a][2]
                continue
            hess[..., a, a] = factors[a][2] * self._others(factors, (a,))
            for b in self.axes:
                if b != a:
                    hess[..., a, b] = factors[a][1] * factors[b][1] * self._others(factors, (a, b))
        return self.amplitude * hess

    def scaled(self, factor: float) -> "AnalyticField":
        return AnalyticField(self.name, self.amplitude * factor, self.frequency, self.axes)

    @staticmethod
    def _others(factors, skip) -> np.ndarray:
        rest = [f[0] for axis, f in factors.items() if axis not in skip]
        if not rest:
            return np.ones_like(next(iter(factors.values()))[0])
        return np.prod(rest, axis=0)


def default_axes(name: str, n: int) -> Tuple[int, ...]:
    """x¹ alone for n = 1, the pair (x¹, x³) otherwise."""
    return (0,) if n == 1 else (0, 2)


def make_field(spec: Mapping, n: int) -> AnalyticField:
    """
    Build a catalog field from a config mapping {name, amplitude, frequency, axes}.

    Raises:
        ConfigError: Unknown name or unexpected keys.
    """
    allowed = {"name", "amplitude", "frequency", "axes", "kind"}
    unknown = set(spec) - allowed
    if unknown:
        raise ConfigError(f"unknown field keys: {', '.join(sorted(unknown))}")
    name = spec.get("name", "zero")
    axes = spec.get("axes")
    axes = tuple(int(a) for a in axes) if axes is not None else default_axes(name, n)
    try:
        return AnalyticField(
            name=name,
            amplitude=float(spec.get("amplitude", 0.0)),
            frequency=int(spec.get("frequency", 1)),
            axes=axes,
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid field parameters {dict(spec)}: {exc}") from exc


def random_smooth(grid: PeriodicGrid, seed: int, amplitude: float = 0.05, modes: int = 2) -> ScalarField:
    """
    Seeded random trigonometric sum with frequencies ≤ `modes` on each axis.

    The result has zero mean and sup norm `amplitude`.
    """
    rng = np.random.default_rng(seed)
    coords = grid_coordinates(grid)
    values = np.zeros(grid.shape)
    for _ in range(2 * grid.dim):
        freqs = rng.integers(0, modes + 1, size=grid.dim)
        if not freqs.any():
            freqs[rng.integers(grid.dim)] = 1
        phase = rng.uniform(0.0, 2.0 * np.pi)
        arg = sum(2.0 * np.pi * int(m) * x / grid.period for m, x in zip(freqs, coords))
        values += rng.normal() * np.cos(arg + phase)
    values -= values.mean()
    peak = float(np.abs(values).max())
    if peak > 0:
        values *= amplitude / peak
    return ScalarField(grid, values)


# --------------------------------------------------------------------------- #
# Backgrounds
# --------------------------------------------------------------------------- #
def _identity(grid: PeriodicGrid) -> np.ndarray:
    n = grid.n
    return np.broadcast_to(np.eye(n, dtype=complex), grid.shape + (n, n)).copy()


def _diag_wave(grid: PeriodicGrid, amplitude: float = 0.3) -> np.ndarray:
    """diag(1 + a cos(2πx^{2i−1})): positive definite while |a| < 1."""
    coords = grid_coordinates(grid)
    g = _identity(grid)
    for i in range(grid.n):
        g[..., i, i] += amplitude * np.cos(2.0 * np.pi * coords[2 * i] / grid.period)
    return g


def _constant_diag(grid: PeriodicGrid, values=None) -> np.ndarray:
    n = grid.n
    diag = np.ones(n) if values is None else np.asarray(values, dtype=float)
    if diag.shape != (n,):
        raise ConfigError(f"constant_diag needs {n} values, got {list(np.atleast_1d(diag))}")
    return np.broadcast_to(np.diag(diag).astype(complex), grid.shape + (n, n)).copy()


def eta_form(grid: PeriodicGrid, amplitude: float = 0.2) -> np.ndarray:
    """Hermitian η = I + a·W(x) with W a smooth Hermitian wave."""
    coords = grid_coordinates(grid)
    two_pi = 2.0 * np.pi / grid.period
    eta = _identity(grid)
    for i in range(grid.n):
        eta[..., i, i] += amplitude * np.cos(two_pi * coords[2 * i])
    if grid.n >= 2:
        off = 0.5 * amplitude * (np.sin(two_pi * coords[1]) + 1j * np.sin(two_pi * coords[3]))
        eta[..., 0, 1] += off
        eta[..., 1, 0] += np.conj(off)
    return eta


def _eta_reduction(grid: PeriodicGrid, amplitude: float = 0.2) -> np.ndarray:
    """ω = (tr_χ η)χ − (n−1)η, so T(μ(ω)) are the eigenvalues of η."""
    if grid.n < 2:
        raise ConfigError("eta_reduction needs n ≥ 2")
    eta = eta_form(grid, amplitude)
    trace = np.einsum("...ii->...", eta).real
    return trace[..., None, None] * np.eye(grid.n) - (grid.n - 1) * eta


def _violating_point(grid: PeriodicGrid, point=None, scale: float = -1.0) -> np.ndarray:
    """Identity except `scale`·I at one grid point (the origin by default)."""
    g = _identity(grid)
    index = tuple(int(i) for i in (point if point is not None else (0,) * grid.dim))
    if len(index) != grid.dim or any(not 0 <= i < s for i, s in zip(index, grid.shape)):
        raise ConfigError(f"violating point {index} is not on the grid {grid.shape}")
    g[index] = scale * np.eye(grid.n)
    return g


_BACKGROUNDS: Dict[str, Callable[..., np.ndarray]] = {
    "identity": _identity,
    "diag_wave": _diag_wave,
    "constant_diag": _constant_diag,
    "eta_reduction": _eta_reduction,
    "violating_point": _violating_point,
}


def make_background(grid: PeriodicGrid, spec: Optional[Mapping] = None) -> np.ndarray:
    """
    Background form g from a config mapping {name, ...parameters}.

    Raises:
        ConfigError: Unknown background or bad parameters.
    """
    spec = dict(spec or {"name": "identity"})
    name = spec.pop("name", "identity")
    builder = _BACKGROUNDS.get(name)
    if builder is None:
        raise ConfigError(f"unknown background '{name}', expected one of {', '.join(BACKGROUND_NAMES)}")
    try:
        g = builder(grid, **spec)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for background '{name}': {exc}") from exc
    logger.debug("Background '%s' built with %s", name, spec)
    return g
