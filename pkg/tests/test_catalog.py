# -*- coding: utf-8 -*-
import numpy as np
import pytest

from ahsolve.calculus.cones import t_transform
from ahsolve.catalog import (
    AnalyticField,
    default_axes,
    eta_form,
    make_background,
    make_field,
    random_smooth,
)
from ahsolve.errors import ConfigError
from ahsolve.geometry.grid import PeriodicGrid, hessian
from ahsolve.geometry.pencil import HermitianPencil, pencil_eigen


def test_make_field_defaults():
    field = make_field({"name": "cos_product", "amplitude": 0.1}, 2)
    assert field.axes == (0, 2)
    assert field.frequency == 1
    assert default_axes("cos_sum", 1) == (0,)


@pytest.mark.parametrize("spec", [{"name": "spiral"}, {"name": "zero", "colour": 1}, {"name": "cos_sum", "frequency": 0},
                                  {"name": "cos_sum", "axes": [0, 0]}, {"name": "cos_sum", "amplitude": "big"}])
def test_make_field_rejects(spec):
    with pytest.raises(ConfigError):
        make_field(spec, 2)


def test_axes_out_of_range():
    with pytest.raises(ConfigError):
        AnalyticField("cos_sum", 1.0, 1, (3,)).values(PeriodicGrid.uniform(1, 4))


def test_cos_product_derivatives():
    grid = PeriodicGrid.uniform(1, 8)
    x, y = grid.coordinates()
    k = 2 * np.pi
    field = AnalyticField("cos_product", 0.5, 1, (0, 1))
    np.testing.assert_allclose(field.values(grid), 0.5 * np.cos(k * x) * np.cos(k * y))
    grad = field.gradient(grid)
    np.testing.assert_allclose(grad[..., 0], -0.5 * k * np.sin(k * x) * np.cos(k * y))
    hess = field.hessian(grid)
    np.testing.assert_allclose(hess[..., 0, 1], 0.5 * k * k * np.sin(k * x) * np.sin(k * y))
    np.testing.assert_allclose(hess[..., 1, 1], -0.5 * k * k * np.cos(k * x) * np.cos(k * y))


def test_analytic_hessian_matches_stencil_at_high_resolution():
    grid = PeriodicGrid.uniform(1, 64)
    field = AnalyticField("sin_product", 1.0, 2, (0, 1))
    discrete = np.moveaxis(hessian(grid, field.values(grid)), (0, 1), (-2, -1))
    scale = (2 * np.pi * 2) ** 2
    assert np.abs(discrete - field.hessian(grid)).max() < 0.02 * scale


def test_cos_sum_and_zero():
    grid = PeriodicGrid.uniform(1, 4)
    field = AnalyticField("cos_sum", 1.0, 1, (0, 1))
    assert field.values(grid)[0, 0] == 2.0
    assert np.all(field.hessian(grid)[..., 0, 1] == 0.0)
    assert np.all(AnalyticField("zero", 3.0).values(grid) == 0.0)
    assert field.scaled(0.5).amplitude == 0.5


def test_random_smooth_is_seeded_and_normalized():
    grid = PeriodicGrid.uniform(1, 8)
    a = random_smooth(grid, seed=3, amplitude=0.05)
    b = random_smooth(grid, seed=3, amplitude=0.05)
    c = random_smooth(grid, seed=4, amplitude=0.05)
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    assert abs(a.values.mean()) < 1e-15
    assert np.abs(a.values).max() == pytest.approx(0.05)


def test_backgrounds_are_hermitian_positive():
    grid = PeriodicGrid.uniform(2, 4)
    for spec in ({"name": "identity"}, {"name": "diag_wave", "amplitude": 0.5},
                 {"name": "constant_diag", "values": [2.0, 3.0]}, {"name": "eta_reduction"}):
        g = make_background(grid, spec)
        assert g.shape == grid.shape + (2, 2)
        mu = pencil_eigen(HermitianPencil(np.eye(2), g)).mu
        assert np.all(mu > 0), spec


def test_eta_reduction_recovers_eta_eigenvalues():
    grid = PeriodicGrid.uniform(2, 4)
    omega = make_background(grid, {"name": "eta_reduction", "amplitude": 0.2})
    mu = pencil_eigen(HermitianPencil(np.eye(2), omega)).mu
    eta_values = np.linalg.eigvalsh(eta_form(grid, 0.2))
    np.testing.assert_allclose(np.sort(t_transform(mu), axis=-1), eta_values, atol=1e-12)


def test_violating_point():
    grid = PeriodicGrid.uniform(2, 4)
    g = make_background(grid, {"name": "violating_point", "point": [1, 2, 3, 0]})
    np.testing.assert_array_equal(g[1, 2, 3, 0], -np.eye(2))
    np.testing.assert_array_equal(g[0, 0, 0, 0], np.eye(2))
    with pytest.raises(ConfigError):
        make_background(grid, {"name": "violating_point", "point": [9, 0, 0, 0]})


@pytest.mark.parametrize("spec", [{"name": "plaid"}, {"name": "diag_wave", "wavelength": 2},
                                  {"name": "constant_diag", "values": [1.0]}])
def test_background_errors(spec):
    with pytest.raises(ConfigError):
        make_background(PeriodicGrid.uniform(2, 4), spec)


def test_eta_reduction_needs_n2():
    with pytest.raises(ConfigError):
        make_background(PeriodicGrid.uniform(1, 4), {"name": "eta_reduction"})
