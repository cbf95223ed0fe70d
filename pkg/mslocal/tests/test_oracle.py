import pytest
import numpy as np
from unittest.mock import patch

from mslocal.numerics.errors import ConvergenceFailure, DimensionError, InvalidSiteError, UndefinedGapError
from mslocal.numerics.lattice import LatticeGeometry
from mslocal.numerics.model import build_hamiltonian
from mslocal.numerics.oracle import (
    correlator_matrix,
    dense_jacobi_eigensolve,
    eigenvector_residual,
    exact_correlator,
    min_gap,
    spectrum_compare,
)

# --- Test dense_jacobi_eigensolve ---
def test_diagonal_matrix_is_returned_sorted():
    decomp = dense_jacobi_eigensolve(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_array_equal(decomp.eigenvalues, [1.0, 2.0, 3.0])
    np.testing.assert_array_equal(np.abs(decomp.eigenvectors), np.eye(3)[:, [1, 2, 0]])
    assert decomp.residual == 0.0


def test_matches_lapack_on_random_symmetric(rng):
    X = rng.normal(size=(12, 12))
    H = (X + X.T) / 2
    decomp = dense_jacobi_eigensolve(H)
    np.testing.assert_allclose(decomp.eigenvalues, np.linalg.eigvalsh(H), atol=1e-10)
    np.testing.assert_allclose(decomp.eigenvectors.T @ decomp.eigenvectors, np.eye(12), atol=1e-10)
    assert decomp.residual < 1e-9


def test_two_site_closed_form(two_site_nonresonant):
    decomp = dense_jacobi_eigensolve(two_site_nonresonant.matrix)
    root = np.sqrt(1 + 4e-4)
    np.testing.assert_allclose(decomp.eigenvalues, [(1 - root) / 2, (1 + root) / 2], rtol=1e-9)


def test_rejects_bad_matrices():
    with pytest.raises(DimensionError):
        dense_jacobi_eigensolve(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        dense_jacobi_eigensolve(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_sweep_budget_exhaustion():
    H = np.array([[0.0, 1.0], [1.0, 0.0]])
    with patch("mslocal.numerics.oracle.MAX_SWEEPS", 0):
        with pytest.raises(ConvergenceFailure):
            dense_jacobi_eigensolve(H)


def test_empty_matrix():
    decomp = dense_jacobi_eigensolve(np.zeros((0, 0)))
    assert decomp.eigenvalues.size == 0

# --- Test correlators ---
def test_correlator_of_identity_basis():
    decomp = dense_jacobi_eigensolve(np.diag([0.0, 1.0, 2.0]))
    assert exact_correlator(decomp, 1, 1) == 1.0
    assert exact_correlator(decomp, 0, 2) == 0.0
    np.testing.assert_array_equal(correlator_matrix(decomp.eigenvectors), np.eye(3))


def test_correlator_of_resonant_pair(two_site_resonant):
    decomp = dense_jacobi_eigensolve(two_site_resonant.matrix)
    # both eigenvectors are (1, +-1) / sqrt(2)
    assert exact_correlator(decomp, 0, 1) == pytest.approx(1.0)
    np.testing.assert_allclose(correlator_matrix(decomp.eigenvectors), np.ones((2, 2)), atol=1e-12)


def test_correlator_two_site_closed_form(two_site_nonresonant):
    decomp = dense_jacobi_eigensolve(two_site_nonresonant.matrix)
    # 2|cos(phi) sin(phi)| = sin(2 phi) with tan(2 phi) = 2 J0 / (v_1 - v_0)
    expected = 0.02 / np.sqrt(1 + 0.02**2)
    assert exact_correlator(decomp, 0, 1) == pytest.approx(expected, rel=1e-9)
    assert exact_correlator(decomp, 0, 1) == pytest.approx(0.019996, abs=1e-6)
    assert exact_correlator(decomp, 0, 0) == pytest.approx(1.0, abs=1e-12)


def test_correlator_vanishes_without_hopping(rng):
    geom = LatticeGeometry((6,))
    decomp = dense_jacobi_eigensolve(build_hamiltonian(geom, rng.uniform(size=6), 0.0).matrix)
    np.testing.assert_array_equal(correlator_matrix(decomp.eigenvectors), np.eye(6))


@pytest.mark.parametrize("dims, j0", [((16,), 0.05), ((4, 4), 0.2), ((3, 3, 3), 1.0)])
def test_correlator_is_symmetric_and_bounded(rng, dims, j0):
    geom = LatticeGeometry(dims)
    decomp = dense_jacobi_eigensolve(build_hamiltonian(geom, rng.uniform(size=geom.size), j0).matrix)
    Q = correlator_matrix(decomp.eigenvectors)
    np.testing.assert_allclose(Q, Q.T, atol=1e-14)
    np.testing.assert_allclose(np.diag(Q), 1.0, atol=1e-10)
    assert Q.max() <= 1.0 + 1e-10
    for x, y in rng.integers(0, geom.size, size=(20, 2)).tolist():
        assert exact_correlator(decomp, x, y) == pytest.approx(exact_correlator(decomp, y, x), abs=1e-15)
        assert exact_correlator(decomp, x, y) == pytest.approx(Q[x, y], abs=1e-12)


def test_correlator_rejects_bad_sites(two_site_resonant):
    decomp = dense_jacobi_eigensolve(two_site_resonant.matrix)
    with pytest.raises(InvalidSiteError):
        exact_correlator(decomp, 0, 2)

# --- Test spectrum helpers ---
def test_spectrum_compare_ignores_order():
    assert spectrum_compare([3.0, 1.0], [1.0, 3.0 + 1e-12]) == pytest.approx(1e-12, abs=1e-15)
    with pytest.raises(DimensionError):
        spectrum_compare([1.0], [1.0, 2.0])


def test_min_gap():
    assert min_gap([0.3, 0.1, 0.7]) == pytest.approx(0.2)
    assert min_gap([0.5, 0.5]) == 0.0
    with pytest.raises(UndefinedGapError):
        min_gap([1.0])


def test_eigenvector_residual_detects_wrong_pairs():
    H = np.diag([1.0, 2.0])
    assert eigenvector_residual(H, np.array([1.0, 2.0]), np.eye(2)) == 0.0
    assert eigenvector_residual(H, np.array([2.0, 1.0]), np.eye(2)) == 1.0
