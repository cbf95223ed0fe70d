from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple, Union

import logging
import numpy as np
from scipy.linalg import expm

from mslocal.numerics.blocks import BlockRegistry
from mslocal.numerics.errors import (
    ConvergenceFailure,
    DimensionError,
    InvariantViolation,
    NumericalFailure,
)
from mslocal.numerics.kernels import tangent_sweep

logger = logging.getLogger(__name__)

ORTHOGONALITY_TOL = 1e-10
JACOBI_RELATIVE_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100


@dataclass(frozen=True, eq=False)
class Generator:
    matrix: np.ndarray
    scale: int
    support: frozenset

    @property
    def norm_max(self) -> float:
        return float(np.abs(self.matrix).max()) if self.matrix.size else 0.0


@dataclass(frozen=True, eq=False)
class OrthogonalRotation:
    matrix: np.ndarray
    orth_residual: float

    @classmethod
    def identity(cls, n: int) -> "OrthogonalRotation":
        return cls(np.eye(n), 0.0)

    @classmethod
    def certify(cls, matrix: np.ndarray, what: str = "rotation") -> "OrthogonalRotation":
        """Wrap a matrix after checking max|MᵀM - I| < 1e-10."""
        residual = orthogonality_residual(matrix)
        if not residual < ORTHOGONALITY_TOL:
            raise NumericalFailure(f"{what} lost orthogonality: residual {residual:.3e}")
        return cls(matrix, residual)


def orthogonality_residual(matrix: np.ndarray) -> float:
    n = matrix.shape[0]
    if n == 0:
        return 0.0
    return float(np.abs(matrix.T @ matrix - np.eye(n)).max())


def _as_matrix(R: Union[OrthogonalRotation, np.ndarray]) -> np.ndarray:
    return R.matrix if isinstance(R, OrthogonalRotation) else np.asarray(R, dtype=float)


def build_generator(
    E: np.ndarray,
    J: np.ndarray,
    reg: BlockRegistry,
    shell: Iterable[Tuple[int, int]],
    scale: int = 0,
) -> Generator:
    """
    Antisymmetric generator A(x, y) = J(x, y) / (E_x - E_y) over the supplied pairs.

    Args:
        E: Current diagonal.
        J: Current interaction matrix.
        reg: Registry of the step; no supplied pair may touch its collared region.
        shell: Nonresonant pairs to rotate away, in either orientation.
        scale: Step number, recorded on the generator.

    Returns:
        Generator with an exactly antisymmetric matrix.
    """
    E = np.asarray(E, dtype=float)
    n = E.shape[0]
    if J.shape != (n, n):
        raise DimensionError(f"interaction has shape {J.shape}, diagonal has length {n}")

    pairs = {(min(x, y), max(x, y)) for x, y in ((int(a), int(b)) for a, b in shell) if x != y}
    upper = np.zeros((n, n))
    if pairs:
        xs, ys = np.array(sorted(pairs)).T
        covered = reg.covered
        touching = [(x, y) for x, y in zip(xs.tolist(), ys.tolist()) if x in covered or y in covered]
        if touching:
            raise InvariantViolation(f"generator pairs inside the resonant region: {touching[:5]}")
        gap = E[xs] - E[ys]
        if np.any(gap == 0):
            bad = [(int(x), int(y)) for x, y in zip(xs[gap == 0], ys[gap == 0])]
            raise InvariantViolation(f"zero gap on nonresonant pairs {bad[:5]}")
        upper[xs, ys] = J[xs, ys] / gap
    return Generator(matrix=upper - upper.T, scale=scale, support=frozenset(pairs))


def orthogonal_exp(A: Union[Generator, np.ndarray]) -> OrthogonalRotation:
    """Ω = exp(-A) by scaling and squaring, certified orthogonal."""
    matrix = A.matrix if isinstance(A, Generator) else _as_matrix(A)
    if not np.any(matrix):
        return OrthogonalRotation.identity(matrix.shape[0])
    return OrthogonalRotation.certify(expm(-matrix), "exp(-A)")


def conjugate(H: np.ndarray, R: Union[OrthogonalRotation, np.ndarray]) -> np.ndarray:
    """RᵀHR, symmetrized."""
    rot = _as_matrix(R)
    if H.shape != rot.shape or H.shape[0] != H.shape[1]:
        raise DimensionError(f"cannot conjugate {H.shape} by {rot.shape}")
    X = rot.T @ H @ rot
    return (X + X.T) / 2


def _max_off_diagonal(A: np.ndarray) -> float:
    if A.shape[0] < 2:
        return 0.0
    return float(np.abs(A - np.diag(np.diag(A))).max())


def jacobi_block_diagonalize(
    H: np.ndarray, block_sites: Iterable[int], sort: bool = True
) -> Tuple[OrthogonalRotation, List[float]]:
    """
    Row-cyclic Jacobi on the submatrix of H indexed by block_sites.

    The returned rotation is the identity outside the block. With sort=True the
    block eigenvalues come back ascending and the j-th smallest sits at the
    j-th smallest block index; with sort=False the columns keep the order the
    sweeps leave them in, which stays close to the identity for nearly
    diagonal input.

    Args:
        H: Symmetric matrix.
        block_sites: Indices of the block (nonempty).
        sort: Order block eigenvalues ascending.

    Returns:
        (embedded rotation, block eigenvalues in block index order)
    """
    sites = sorted({int(s) for s in block_sites})
    n = H.shape[0]
    if not sites:
        raise ValueError("block_sites must be nonempty")
    if sites[0] < 0 or sites[-1] >= n:
        raise DimensionError(f"block sites {sites[0]}..{sites[-1]} outside matrix of size {n}")

    sub = np.ascontiguousarray(H[np.ix_(sites, sites)], dtype=np.float64)
    m = len(sites)
    V = np.eye(m)
    scale = float(np.abs(sub).max()) if sub.size else 0.0
    target = JACOBI_RELATIVE_TOL * scale

    sweeps = 0
    while _max_off_diagonal(sub) > target:
        if sweeps == JACOBI_MAX_SWEEPS:
            raise ConvergenceFailure(
                f"Jacobi did not converge on a block of {m} sites in {JACOBI_MAX_SWEEPS} sweeps"
            )
        tangent_sweep(sub, V)
        sweeps += 1

    eigenvalues = np.diag(sub).copy()
    if sort:
        order = np.argsort(eigenvalues, kind="stable")
        eigenvalues, V = eigenvalues[order], V[:, order]

    rotation = np.eye(n)
    rotation[np.ix_(sites, sites)] = V
    logger.debug(f"Jacobi block of {m} sites converged in {sweeps} sweeps")
    return OrthogonalRotation.certify(rotation, "block rotation"), eigenvalues.tolist()


def accumulate(
    R: Union[OrthogonalRotation, np.ndarray], step_rotation: Union[OrthogonalRotation, np.ndarray]
) -> OrthogonalRotation:
    left, right = _as_matrix(R), _as_matrix(step_rotation)
    if left.shape != right.shape:
        raise DimensionError(f"cannot accumulate {left.shape} with {right.shape}")
    return OrthogonalRotation.certify(left @ right, "cumulative rotation")


def compose(rotations: Sequence[Union[OrthogonalRotation, np.ndarray]], n: int) -> OrthogonalRotation:
    """Product of block rotations with disjoint supports."""
    total = OrthogonalRotation.identity(n)
    for rot in rotations:
        total = accumulate(total, rot)
    return total
