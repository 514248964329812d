# -*- coding: utf-8 -*-
import numpy as np
import pytest

from ahsolve.calculus.operators import SymmetricOperator, f_eval
from ahsolve.errors import PencilError
from ahsolve.geometry.pencil import (
    HermitianPencil,
    contract,
    hermitian_defect,
    linearization_coeffs,
    mean_f_sum,
    pencil_eigen,
    second_variation,
)


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (a + a.conj().T)


def random_positive(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return a @ a.conj().T + np.eye(n)


def random_unitary(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def pencil_with_spectrum(rng, mu):
    """Build (χ, g) whose generalized eigenvalues are exactly `mu`."""
    n = len(mu)
    chi = random_positive(rng, n)
    lower = np.linalg.cholesky(chi)
    u = random_unitary(rng, n)
    g = lower @ u @ np.diag(mu) @ u.conj().T @ lower.conj().T
    return chi, 0.5 * (g + g.conj().T)


def characteristic_roots(chi, g):
    """Roots of λ ↦ det(g − λχ), interpolated from determinants on Chebyshev nodes."""
    n = chi.shape[-1]
    radius = np.linalg.norm(g, 2) / np.linalg.eigvalsh(chi)[0] + 1.0
    nodes = radius * np.cos(np.pi * (np.arange(n + 1) + 0.5) / (n + 1))
    values = [np.linalg.det(g - lam * chi).real for lam in nodes]
    return np.sort(np.roots(np.polyfit(nodes, values, n)).real)[::-1]


def big_f(op, chi, g):
    return f_eval(op, pencil_eigen(HermitianPencil(chi, g)).mu)


def test_diagonal_pencil():
    spectrum = pencil_eigen(HermitianPencil(np.eye(2), np.diag([1.0, 3.0]).astype(complex)))
    np.testing.assert_allclose(spectrum.mu, [3.0, 1.0])


def test_generalized_pencil_with_frame_identities():
    chi = np.array([[2.0, 0.0], [0.0, 1.0]], dtype=complex)
    g = np.array([[2.0, 0.0], [0.0, 3.0]], dtype=complex)
    s = pencil_eigen(HermitianPencil(chi, g))
    np.testing.assert_allclose(s.mu, [3.0, 1.0])
    frame_h = s.frame.conj().T
    np.testing.assert_allclose(frame_h @ chi @ s.frame, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(frame_h @ g @ s.frame, np.diag(s.mu), atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_eigenvalues_match_characteristic_polynomial(n, rng):
    for _ in range(50):
        u = random_unitary(rng, n)
        chi = u @ np.diag(rng.uniform(1.0, 2.0, size=n)) @ u.conj().T
        chi = 0.5 * (chi + chi.conj().T)
        g = random_hermitian(rng, n)
        mu = pencil_eigen(HermitianPencil(chi, g)).mu
        roots = characteristic_roots(chi, g)
        np.testing.assert_allclose(mu, roots, rtol=1e-9, atol=1e-9 * max(1.0, np.abs(roots).max()))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_spectrum_is_invariant_under_unitary_change_of_frame(n, rng):
    for _ in range(50):
        chi, g = random_positive(rng, n), random_hermitian(rng, n)
        u = random_unitary(rng, n)
        moved = pencil_eigen(HermitianPencil(u.conj().T @ chi @ u, u.conj().T @ g @ u)).mu
        mu = pencil_eigen(HermitianPencil(chi, g)).mu
        np.testing.assert_allclose(moved, mu, rtol=1e-10, atol=1e-10 * np.abs(mu).max())


def test_known_spectrum_is_recovered(rng):
    mu = np.array([2.5, 0.5, -0.75])
    chi, g = pencil_with_spectrum(rng, mu)
    np.testing.assert_allclose(pencil_eigen(HermitianPencil(chi, g)).mu, mu, atol=1e-10)


@pytest.mark.parametrize("op", [SymmetricOperator.log_sigma_k(k, n) for n in (2, 3, 4) for k in range(1, n + 1)]
                         + [SymmetricOperator.n_minus_one_ma(n) for n in (2, 3, 4)], ids=lambda op: op.label)
def test_linearization_coeffs_hermitian_positive_definite(op, rng, cone_points):
    for mu in cone_points(op, 40):
        chi, g = pencil_with_spectrum(rng, mu)
        coeffs = linearization_coeffs(op, pencil_eigen(HermitianPencil(chi, g)))
        assert hermitian_defect(coeffs) <= 1e-12 * np.abs(coeffs).max()
        assert np.linalg.eigvalsh(0.5 * (coeffs + coeffs.conj().T))[0] > 0


def test_batched_pencil(rng):
    chi = np.stack([random_positive(rng, 3) for _ in range(12)]).reshape(3, 4, 3, 3)
    g = np.stack([random_hermitian(rng, 3) for _ in range(12)]).reshape(3, 4, 3, 3)
    s = pencil_eigen(HermitianPencil(chi, g))
    assert s.mu.shape == (3, 4, 3)
    assert np.all(np.diff(s.mu, axis=-1) <= 0)
    frame_h = np.conj(np.swapaxes(s.frame, -1, -2))
    np.testing.assert_allclose(frame_h @ chi @ s.frame, np.broadcast_to(np.eye(3), chi.shape), atol=1e-10)


def test_non_positive_chi_raises():
    chi = np.stack([np.eye(2), np.diag([1.0, -1.0])]).astype(complex)
    g = np.stack([np.eye(2), np.eye(2)]).astype(complex)
    with pytest.raises(PencilError) as info:
        pencil_eigen(HermitianPencil(chi, g))
    assert info.value.point == 1


def test_non_hermitian_g_rejected():
    with pytest.raises(ValueError):
        HermitianPencil(np.eye(2), np.array([[1.0, 1.0], [0.0, 1.0]], dtype=complex))


def test_hermitian_defect():
    assert hermitian_defect(np.eye(3)) == 0.0
    assert hermitian_defect(np.array([[0.0, 2.0], [0.0, 0.0]])) == 2.0


def test_linearization_coeffs_in_eigenframe():
    op = SymmetricOperator.log_sigma_k(2, 2)
    s = pencil_eigen(HermitianPencil(np.eye(2), np.diag([2.0, 1.0]).astype(complex)))
    coeffs = linearization_coeffs(op, s)
    np.testing.assert_allclose(np.abs(coeffs), np.diag([0.5, 1.0]), atol=1e-14)
    assert mean_f_sum(s, op) == pytest.approx(1.5)


@pytest.mark.parametrize("op", [SymmetricOperator.log_sigma_k(2, 3), SymmetricOperator.n_minus_one_ma(3)],
                         ids=lambda op: op.label)
def test_directional_derivative(op, rng):
    chi = np.eye(3, dtype=complex)
    g = random_hermitian(rng, 3) * 0.2 + 2.0 * np.eye(3)
    h = random_hermitian(rng, 3)
    eps = 1e-6
    numeric = (big_f(op, chi, g + eps * h) - big_f(op, chi, g - eps * h)) / (2 * eps)
    coeffs = linearization_coeffs(op, pencil_eigen(HermitianPencil(chi, g)))
    assert contract(coeffs, h) == pytest.approx(numeric, rel=1e-6, abs=1e-8)


@pytest.mark.parametrize("op", [SymmetricOperator.log_sigma_k(2, 3), SymmetricOperator.n_minus_one_ma(3)],
                         ids=lambda op: op.label)
def test_second_variation(op, rng):
    chi = np.eye(3, dtype=complex)
    g = np.diag([3.0, 2.0, 1.0]).astype(complex) + 0.1 * random_hermitian(rng, 3)
    h = random_hermitian(rng, 3)
    eps = 1e-4
    numeric = (big_f(op, chi, g + eps * h) - 2 * big_f(op, chi, g) + big_f(op, chi, g - eps * h)) / eps ** 2
    exact = second_variation(op, pencil_eigen(HermitianPencil(chi, g)), h)
    assert exact == pytest.approx(numeric, rel=1e-4, abs=1e-6)
    assert exact <= 1e-12
