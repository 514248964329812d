# -*- coding: utf-8 -*-
import numpy as np
import pytest

from ahsolve.catalog import AnalyticField, random_smooth
from ahsolve.errors import GeometryError
from ahsolve.geometry.fields import (
    GeometryPreset,
    build_geometry,
    canonical_laplacian,
    ddbar,
    ddbar_defect,
    ddbar_from_derivatives,
    gradient_sup,
    hessian_top_eigenvalue,
    omega_u,
    real_hessian_sup,
    rotation_generator,
    standard_frame,
    standard_structure,
)
from ahsolve.geometry.grid import PeriodicGrid, ScalarField
from ahsolve.geometry.pencil import pencil_eigen


def test_standard_structure_and_frame():
    j0 = standard_structure(2)
    np.testing.assert_array_equal(j0 @ j0, -np.eye(4))
    c = standard_frame(2)
    np.testing.assert_allclose(c @ j0.T, 1j * c)
    np.testing.assert_allclose(c @ c.conj().T, np.eye(2))


def test_rotation_generator_does_not_commute_for_n2():
    k = rotation_generator(2)
    j0 = standard_structure(2)
    assert np.abs(k @ j0 - j0 @ k).max() > 0
    np.testing.assert_array_equal(k, -k.T)


def test_flat_geometry(flat2):
    assert flat2.is_flat
    assert flat2.preset is GeometryPreset.FLAT_STANDARD
    assert flat2.amplitude == 0.0
    assert flat2.frame_field.shape == flat2.grid.shape + (2, 4)


def test_flat_preset_ignores_amplitude(grid2):
    assert build_geometry(grid2, "flat", 0.7).is_flat


def test_perturbed_geometry_invariants(perturbed2):
    assert not perturbed2.is_flat
    J = perturbed2.J_field
    np.testing.assert_allclose(J @ J, np.broadcast_to(-np.eye(4), J.shape), atol=1e-12)
    c = perturbed2.frame_field
    np.testing.assert_allclose(np.einsum("...ab,...ib->...ia", J, c), 1j * c, atol=1e-10)
    assert perturbed2.describe()["preset"] == "perturbed_j"


def test_non_finite_amplitude(grid2):
    with pytest.raises(GeometryError) as info:
        build_geometry(grid2, "perturbed_j", float("nan"))
    assert info.value.invariant == "amplitude"


def test_flat_ddbar_is_half_laplacian_n1(flat1):
    grid = flat1.grid
    x, _ = grid.coordinates()
    h = grid.spacing[0]
    k = 2 * np.pi
    u = np.cos(k * x)
    expected = 0.5 * (2 * np.cos(k * h) - 2) / h ** 2 * u
    np.testing.assert_allclose(ddbar(flat1, u)[..., 0, 0].real, expected, atol=1e-10)
    np.testing.assert_allclose(canonical_laplacian(flat1, u).values, expected, atol=1e-10)
    assert ddbar_defect(flat1, u) < 1e-12


def test_perturbed_n1_only_rotates_the_frame_phase(grid1, flat1):
    perturbed = build_geometry(grid1, "perturbed_j", 0.3)
    u = AnalyticField("cos_product", 0.1, 1, (0, 1)).values(grid1)
    np.testing.assert_allclose(ddbar(perturbed, u), ddbar(flat1, u), atol=1e-10)


def test_ddbar_ignores_constants(perturbed2, rng):
    u = rng.normal(size=perturbed2.grid.shape)
    np.testing.assert_allclose(ddbar(perturbed2, u + 3.5), ddbar(perturbed2, u), atol=1e-9)


def test_ddbar_is_hermitian(perturbed2, rng):
    blocks = ddbar(perturbed2, rng.normal(size=perturbed2.grid.shape))
    np.testing.assert_allclose(blocks, np.conj(np.swapaxes(blocks, -1, -2)), atol=1e-12)


def _ddbar_error(field, size):
    grid = PeriodicGrid.uniform(2, size)
    geom = build_geometry(grid, "perturbed_j", 0.1)
    exact = ddbar_from_derivatives(geom, field.gradient(grid), field.hessian(grid))
    exact = 0.5 * (exact + np.conj(np.swapaxes(exact, -1, -2)))
    return np.abs(ddbar(geom, field.values(grid)) - exact).max()


def test_discrete_ddbar_converges_to_analytic():
    field = AnalyticField("cos_product", 1.0, 1, (0, 2))
    errors = [_ddbar_error(field, size) for size in (8, 16)]
    assert errors[0] / errors[1] > 3.5


@pytest.mark.slow
def test_discrete_ddbar_is_second_order_over_three_grids():
    field = AnalyticField("cos_product", 1.0, 1, (0, 2))
    errors = [_ddbar_error(field, size) for size in (6, 12, 24)]
    ratios = [coarse / fine for coarse, fine in zip(errors, errors[1:])]
    assert all(3.0 <= ratio <= 5.0 for ratio in ratios), ratios


def test_perturbed_ddbar_defect_is_rounding_level():
    grid = PeriodicGrid.uniform(2, 16)
    geom = build_geometry(grid, "perturbed_j", 0.1)
    assert ddbar_defect(geom, AnalyticField("cos_product", 1.0, 1, (0, 2)).values(grid)) < 1e-8
    assert ddbar_defect(geom, random_smooth(grid, 5, amplitude=1.0)) < 1e-8


@pytest.mark.parametrize("shift", [(1, 0), (3, 1), (2, 2), (-1, 3)])
def test_flat_operators_commute_with_translations(flat2, rng, shift):
    steps, axis = shift
    u = rng.normal(size=flat2.grid.shape)
    moved = np.roll(u, steps, axis=axis)
    np.testing.assert_allclose(ddbar(flat2, moved), np.roll(ddbar(flat2, u), steps, axis=axis), atol=1e-12)
    np.testing.assert_allclose(canonical_laplacian(flat2, moved).values,
                               np.roll(canonical_laplacian(flat2, u).values, steps, axis=axis), atol=1e-12)
    assert gradient_sup(flat2, moved) == pytest.approx(gradient_sup(flat2, u), rel=1e-12)


def test_omega_u_at_zero_is_background(flat2, identity2):
    pencil = omega_u(flat2, identity2, ScalarField.zeros(flat2.grid))
    np.testing.assert_allclose(pencil_eigen(pencil).mu, 1.0)


def test_norm_helpers(flat1):
    grid = flat1.grid
    x, _ = grid.coordinates()
    k = 2 * np.pi
    h = grid.spacing[0]
    u = np.sin(k * x)
    assert gradient_sup(flat1, u) == pytest.approx(np.sin(k * h) / h)
    second = (2 - 2 * np.cos(k * h)) / h ** 2
    assert real_hessian_sup(flat1, u) == pytest.approx(second)
    np.testing.assert_allclose(hessian_top_eigenvalue(flat1, u), np.maximum(-second * u, 0.0), atol=1e-10)
