"""Dense ground truth: a classical cyclic Jacobi eigensolver and exact correlators."""

from dataclasses import dataclass
from typing import Sequence

import logging
import numpy as np

from mslocal.numerics.errors import (
    ConvergenceFailure,
    DimensionError,
    InvalidSiteError,
    NumericalFailure,
    UndefinedGapError,
)
from mslocal.numerics.kernels import angle_sweep

logger = logging.getLogger(__name__)

MAX_SWEEPS = 100
FROBENIUS_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual: float


def eigenvector_residual(H: np.ndarray, eigenvalues: np.ndarray, eigenvectors: np.ndarray) -> float:
    """max over columns of ||H v - lambda v||_inf."""
    if H.size == 0:
        return 0.0
    return float(np.abs(H @ eigenvectors - eigenvectors * eigenvalues[None, :]).max())


def dense_jacobi_eigensolve(H: np.ndarray) -> EigenDecomposition:
    """
    Full eigendecomposition of a symmetric matrix by classical cyclic Jacobi.

    Sweeps visit (p, q) in row order and stop once the off-diagonal Frobenius
    norm falls below 1e-14 of the matrix Frobenius norm.

    Args:
        H: Real symmetric matrix.

    Returns:
        EigenDecomposition with ascending eigenvalues and orthonormal eigenvector columns.
    """
    A = np.array(H, dtype=np.float64, order="C")
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    if not np.allclose(A, A.T, rtol=0, atol=1e-14 * max(1.0, float(np.abs(A).max(initial=0.0)))):
        raise ValueError("matrix is not symmetric")
    n = A.shape[0]
    V = np.eye(n)
    target = FROBENIUS_TOL * np.linalg.norm(A)

    for sweep in range(MAX_SWEEPS + 1):
        off = float(np.linalg.norm(A - np.diag(np.diag(A))))
        if off <= target:
            break
        if sweep == MAX_SWEEPS:
            raise ConvergenceFailure(f"dense Jacobi: off-diagonal norm {off:.3e} after {MAX_SWEEPS} sweeps")
        angle_sweep(A, V)

    order = np.argsort(np.diag(A), kind="stable")
    eigenvalues = np.diag(A)[order]
    eigenvectors = V[:, order]
    H = np.asarray(H, dtype=float)
    residual = eigenvector_residual(H, eigenvalues, eigenvectors)
    scale = float(np.abs(H).max(initial=0.0))
    if residual > 1e-9 * scale:
        raise NumericalFailure(f"dense Jacobi residual {residual:.3e} exceeds 1e-9 * {scale:.3e}")
    return EigenDecomposition(eigenvalues=eigenvalues, eigenvectors=eigenvectors, residual=residual)


def correlator_matrix(eigenvectors: np.ndarray) -> np.ndarray:
    """Q(x, y) = sum_alpha |psi_alpha(x) psi_alpha(y)| for all site pairs."""
    magnitude = np.abs(eigenvectors)
    return magnitude @ magnitude.T


def exact_correlator(decomp: EigenDecomposition, x: int, y: int) -> float:
    n = decomp.eigenvectors.shape[0]
    for site in (x, y):
        if not 0 <= site < n:
            raise InvalidSiteError(f"site {site} outside 0..{n - 1}")
    return float(np.sum(np.abs(decomp.eigenvectors[x, :] * decomp.eigenvectors[y, :])))


def spectrum_compare(a: Sequence[float], b: Sequence[float]) -> float:
    a, b = np.sort(np.asarray(a, dtype=float)), np.sort(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        raise DimensionError(f"spectra have lengths {a.size} and {b.size}")
    return float(np.abs(a - b).max(initial=0.0))


def min_gap(eigenvalues: Sequence[float]) -> float:
    values = np.sort(np.asarray(eigenvalues, dtype=float))
    if values.size < 2:
        raise UndefinedGapError(f"a gap needs at least two eigenvalues, got {values.size}")
    return float(np.diff(values).min())
