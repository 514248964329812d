# -*- coding: utf-8 -*-
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ahsolve.geometry.grid import (
    PeriodicGrid,
    ScalarField,
    cross_difference,
    first_difference,
    gradient,
    grid_coordinates,
    hessian,
    second_difference,
    stencil_offsets,
    stencil_weight,
)


def test_grid_properties():
    grid = PeriodicGrid.uniform(2, 8)
    assert grid.dim == 4
    assert grid.shape == (8, 8, 8, 8)
    assert grid.num_points == 8 ** 4
    assert grid.spacing == (0.125,) * 4
    coords = grid_coordinates(grid)
    assert len(coords) == 4
    assert coords[2][0, 0, 3, 0] == 0.375
    assert grid.describe()["sizes"] == [8, 8, 8, 8]


@pytest.mark.parametrize("n, sizes", [(3, (4,) * 6), (1, (4,)), (1, (4, 5)), (1, (2, 2))])
def test_grid_validation(n, sizes):
    with pytest.raises(ValueError):
        PeriodicGrid(n, sizes)


def test_discrete_derivatives_of_trigonometric_fields():
    grid = PeriodicGrid.uniform(1, 8)
    x, y = grid.coordinates()
    k = 2 * np.pi
    h = grid.spacing[0]
    np.testing.assert_allclose(
        second_difference(grid, np.cos(k * x), 0), (2 * np.cos(k * h) - 2) / h ** 2 * np.cos(k * x), atol=1e-10
    )
    np.testing.assert_allclose(
        first_difference(grid, np.sin(k * y), 1), np.sin(k * h) / h * np.cos(k * y), atol=1e-10
    )
    np.testing.assert_allclose(
        cross_difference(grid, np.sin(k * x) * np.sin(k * y), 0, 1),
        (np.sin(k * h) / h) ** 2 * np.cos(k * x) * np.cos(k * y),
        atol=1e-10,
    )


def test_shapes_and_symmetry(rng):
    grid = PeriodicGrid.uniform(2, 4)
    u = rng.normal(size=grid.shape)
    assert gradient(grid, u).shape == (4,) + grid.shape
    hess = hessian(grid, u)
    assert hess.shape == (4, 4) + grid.shape
    np.testing.assert_array_equal(hess, np.swapaxes(hess, 0, 1))


@settings(max_examples=25)
@given(st.floats(min_value=-1e3, max_value=1e3, allow_nan=False))
def test_constants_are_annihilated(constant):
    grid = PeriodicGrid.uniform(1, 4)
    u = np.full(grid.shape, constant)
    assert np.all(gradient(grid, u) == 0.0)
    assert np.all(hessian(grid, u) == 0.0)


def test_stencil_weights_reproduce_derivatives(rng):
    grid = PeriodicGrid(1, (4, 6))
    u = rng.normal(size=grid.shape)
    grad = gradient(grid, u)
    hess = hessian(grid, u)
    rebuilt_grad = np.zeros_like(grad)
    rebuilt_hess = np.zeros_like(hess)
    for key, kind, offset in stencil_offsets(grid):
        shifted = u
        for axis, step in enumerate(offset):
            shifted = np.roll(shifted, -step, axis=axis)
        weight = stencil_weight(grid, key, kind, offset)
        if kind == "first":
            rebuilt_grad[key[0]] += weight * shifted
        else:
            a, b = key
            rebuilt_hess[a, b] += weight * shifted
            if a != b:
                rebuilt_hess[b, a] += weight * shifted
    np.testing.assert_allclose(rebuilt_grad, grad, atol=1e-12)
    np.testing.assert_allclose(rebuilt_hess, hess, atol=1e-10)


def test_scalar_field():
    grid = PeriodicGrid.uniform(1, 4)
    f = ScalarField(grid, np.arange(16.0))
    assert f.values.shape == (4, 4)
    assert f.flat.shape == (16,)
    assert f.shifted(-1.0).values[0, 0] == -1.0
    assert (f + f).values[3, 3] == 30.0
    assert (2.0 * f).values[0, 1] == 2.0
    assert ScalarField.zeros(grid).values.sum() == 0.0
    with pytest.raises(ValueError):
        ScalarField(grid, np.full(16, np.nan))
