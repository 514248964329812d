# -*- coding: utf-8 -*-
import numpy as np
import pytest

from ahsolve.calculus.operators import SymmetricOperator
from ahsolve.catalog import AnalyticField, make_background, random_smooth
from ahsolve.errors import NonConvergenceError
from ahsolve.geometry.fields import build_geometry
from ahsolve.geometry.grid import PeriodicGrid, ScalarField
from ahsolve.solver.newton import (
    LinearizedOperator,
    SolverState,
    adjoint_kernel_estimate,
    direct_sigma1_solve,
    linearized_apply,
    newton_solve,
    normalize,
    residual,
    sup_norm,
    with_residual,
)
from ahsolve.solver.problem import NormalizationMode, admissibility_violation, spectrum_of, target_problem


@pytest.fixture
def sigma1_offset(flat1, sigma1_n1):
    grid = flat1.grid
    offset = AnalyticField("cos_product", 0.2, 1, (0, 1)).field(grid)
    g = make_background(grid, {"name": "diag_wave", "amplitude": 0.2})
    return target_problem(flat1, sigma1_n1, g, offset, NormalizationMode.MEAN_ZERO)


@pytest.fixture
def perturbed_problem(perturbed2, sigma2_n2, identity2):
    offset = AnalyticField("cos_sum", 0.05, 1, (0, 3)).field(perturbed2.grid)
    return target_problem(perturbed2, sigma2_n2, identity2, offset)


def test_stationary_residual_is_zero(flat2, sigma2_n2, identity2):
    problem = target_problem(flat2, sigma2_n2, identity2)
    state = with_residual(problem, SolverState.zero(problem, t=0.7))
    assert state.residual_norm == pytest.approx(0.0, abs=1e-14)


@pytest.fixture(scope="module", params=["flat", "perturbed_j"])
def geometry8(request):
    return build_geometry(PeriodicGrid.uniform(2, 8), request.param, 0.1)


@pytest.mark.parametrize("operator", [SymmetricOperator.log_sigma_k(2, 2), SymmetricOperator.log_sigma_k(1, 2),
                                      SymmetricOperator.n_minus_one_ma(2)], ids=lambda op: op.label)
@pytest.mark.parametrize("seed", [1, 2, 3, 4])
def test_linearization_matches_finite_differences(geometry8, operator, seed):
    grid = geometry8.grid
    offset = AnalyticField("cos_sum", 0.05, 1, (0, 3)).field(grid)
    problem = target_problem(geometry8, operator, make_background(grid, {"name": "identity"}), offset)
    u = random_smooth(grid, seed, amplitude=0.0005)
    assert admissibility_violation(operator, spectrum_of(problem, u).mu) is None
    rng = np.random.default_rng(seed)
    state = SolverState(u=u, c=0.1, t=0.5)
    psi = ScalarField(grid, rng.normal(size=grid.shape))
    eps = 1e-6
    plus = residual(problem, SolverState(u=u + eps * psi, c=0.1 + eps * 0.3, t=0.5))
    minus = residual(problem, SolverState(u=u + (-eps) * psi, c=0.1 - eps * 0.3, t=0.5))
    numeric = (plus.values - minus.values) / (2 * eps)
    exact = linearized_apply(problem, state, psi, 0.3).values
    np.testing.assert_allclose(exact, numeric, rtol=1e-5, atol=1e-5 * np.abs(numeric).max())
    constant = ScalarField(grid, np.full(grid.shape, 1.7))
    np.testing.assert_allclose(linearized_apply(problem, state, constant, 0.0).values, 0.0,
                               atol=1e-10 * np.abs(exact).max())


def test_sparse_assembly_agrees_with_apply(perturbed_problem, rng):
    grid = perturbed_problem.grid
    state = SolverState(u=ScalarField(grid, 0.002 * rng.normal(size=grid.shape)), t=1.0)
    op = LinearizedOperator(perturbed_problem, state)
    psi = rng.normal(size=grid.num_points)
    matrix = op.as_sparse()
    applied = op.apply(psi).flat
    np.testing.assert_allclose(matrix @ psi, applied, rtol=1e-10, atol=1e-10 * np.abs(applied).max())
    np.testing.assert_allclose(matrix.diagonal(), op.diagonal(), rtol=1e-12)
    np.testing.assert_allclose(matrix @ np.ones(grid.num_points), 0.0, atol=1e-8 * np.abs(applied).max())


def test_normalize_shifts_u_only(grid1):
    state = SolverState(u=ScalarField(grid1, np.linspace(-1.0, 2.0, grid1.num_points)), c=0.4, t=1.0)
    sup = normalize(state, NormalizationMode.SUP_ZERO)
    mean = normalize(state, "mean_zero")
    assert sup.u.values.max() == 0.0
    assert abs(mean.u.values.mean()) < 1e-15
    assert sup.c == mean.c == 0.4


def test_sigma1_newton_agrees_with_direct_solve(sigma1_offset):
    state = newton_solve(sigma1_offset, SolverState.zero(sigma1_offset), 1.0, tol=1e-12)
    assert state.newton_iters <= 8
    assert state.residual_norm <= 1e-12
    assert list(state.residual_history) == sorted(state.residual_history, reverse=True)
    u_direct, c_direct = direct_sigma1_solve(sigma1_offset)
    np.testing.assert_allclose(state.u.values, u_direct.values, atol=1e-8)
    assert state.c == pytest.approx(c_direct, abs=1e-8)


def test_newton_on_perturbed_geometry(perturbed_problem):
    state = newton_solve(perturbed_problem, SolverState.zero(perturbed_problem), 1.0)
    assert state.residual_norm <= 1e-9
    assert state.u.values.max() == 0.0
    assert sup_norm(residual(perturbed_problem, state)) <= 1e-9


def test_normalized_exact_state_is_returned_unchanged(perturbed_problem):
    solved = newton_solve(perturbed_problem, SolverState.zero(perturbed_problem), 1.0, tol=1e-11)
    again = newton_solve(perturbed_problem, solved, 1.0, tol=1e-10)
    assert again.newton_iters == 0
    np.testing.assert_array_equal(again.u.values, solved.u.values)
    assert again.c == solved.c


def test_mean_zero_problem_keeps_mean_zero(sigma1_offset):
    state = newton_solve(sigma1_offset, SolverState.zero(sigma1_offset), 1.0)
    assert abs(state.u.values.mean()) < 1e-12


def test_iteration_cap(sigma1_offset):
    with pytest.raises(NonConvergenceError) as info:
        newton_solve(sigma1_offset, SolverState.zero(sigma1_offset), 1.0, tol=1e-14, max_iters=1)
    assert info.value.t == 1.0
    assert info.value.residual_norm > 0


def test_path_parameter_range(sigma1_offset):
    with pytest.raises(ValueError):
        newton_solve(sigma1_offset, SolverState.zero(sigma1_offset), 1.5)


def test_direct_solve_rejects_other_operators(flat2, sigma2_n2, identity2, perturbed2):
    with pytest.raises(ValueError):
        direct_sigma1_solve(target_problem(flat2, sigma2_n2, identity2))
    sigma1 = SymmetricOperator.log_sigma_k(1, 2)
    with pytest.raises(ValueError):
        direct_sigma1_solve(target_problem(perturbed2, sigma1, identity2))


def test_adjoint_kernel_of_flat_operator_is_uniform(flat2, sigma2_n2, identity2):
    problem = target_problem(flat2, sigma2_n2, identity2)
    kernel = adjoint_kernel_estimate(problem, SolverState.zero(problem))
    assert kernel.positive
    assert kernel.residual < 1e-10
    np.testing.assert_allclose(kernel.xi.values, 1.0 / flat2.grid.num_points, rtol=1e-8)
