"""
Multi-scale Jacobi driver.

Each step k treats couplings whose contracted distance lies in [L_{k-1}, L_k):
resonant pairs are gathered into collared blocks, the rest are rotated away
with exp(-A), small blocks are diagonalized exactly, and the new diagonal is
absorbed. The loop ends once every off-diagonal entry is below tolerance.
"""

from dataclasses import dataclass, field, replace
from typing import List, NamedTuple, Optional, Sequence, Tuple

import logging
import numpy as np
from pydantic import BaseModel

from mslocal.numerics.blocks import (
    BlockRegistry,
    ResonanceParams,
    classify_and_collar,
    detect_resonant_pairs_step1,
    detect_resonances_step_k,
    form_blocks,
    resonance_conditions,
)
from mslocal.numerics.errors import LabelingError
from mslocal.numerics.lattice import LatticeGeometry
from mslocal.numerics.model import Hamiltonian
from mslocal.numerics.rotor import (
    OrthogonalRotation,
    accumulate,
    build_generator,
    compose,
    conjugate,
    jacobi_block_diagonalize,
    orthogonal_exp,
)
from mslocal.numerics.scales import scale_length, shell_bounds
from mslocal.numerics.unionfind import UnionFind

logger = logging.getLogger(__name__)

DEFAULT_OFF_DIAG_TOL = 1e-12
DEFAULT_MAX_STEPS = 20


@dataclass(frozen=True)
class Schedule:
    params: ResonanceParams
    off_diag_tol: float = DEFAULT_OFF_DIAG_TOL
    max_steps: int = DEFAULT_MAX_STEPS
    L: Tuple[float, ...] = field(init=False)

    def __post_init__(self):
        if self.max_steps < 0:
            raise ValueError(f"max_steps must be nonnegative, got {self.max_steps}")
        if not self.off_diag_tol > 0:
            raise ValueError(f"off_diag_tol must be positive, got {self.off_diag_tol}")
        object.__setattr__(self, "L", tuple(scale_length(k) for k in range(self.max_steps + 2)))

    @classmethod
    def for_hamiltonian(
        cls,
        H: Hamiltonian,
        delta: Optional[float] = None,
        M: Optional[float] = None,
        epsilon: Optional[float] = None,
        off_diag_tol: float = DEFAULT_OFF_DIAG_TOL,
        max_steps: int = DEFAULT_MAX_STEPS,
    ) -> "Schedule":
        params = ResonanceParams.for_coupling(H.j0, H.geometry.D, delta=delta, M=M, epsilon=epsilon)
        return cls(params=params, off_diag_tol=off_diag_tol, max_steps=max_steps)

    @property
    def epsilon(self) -> float:
        return self.params.epsilon

    @property
    def delta(self) -> float:
        return self.params.delta

    @property
    def M(self) -> float:
        return self.params.M


class StepMetrics(BaseModel):
    step: int
    scale_length: float
    resonant_pairs: int = 0
    condition_ii_pairs: int = 0
    num_blocks: int = 0
    num_small: int = 0
    num_large: int = 0
    block_sizes: List[int] = []
    per_entries: int = 0
    leftover_entries: int = 0
    max_offdiag_before: float = 0.0
    max_offdiag: float = 0.0
    generator_norm: float = 0.0
    orth_residual: float = 0.0


@dataclass(frozen=True, eq=False)
class ScaleState:
    geometry: LatticeGeometry
    schedule: Schedule
    E: np.ndarray
    J: np.ndarray
    R: OrthogonalRotation
    registry: BlockRegistry = field(default_factory=BlockRegistry.empty)
    k: int = 0
    history: Tuple[BlockRegistry, ...] = ()
    metrics: Tuple[StepMetrics, ...] = ()

    @classmethod
    def initial(cls, H: Hamiltonian, schedule: Schedule) -> "ScaleState":
        E = np.diag(H.matrix).copy()
        J = H.matrix - np.diag(E)
        return cls(
            geometry=H.geometry,
            schedule=schedule,
            E=E,
            J=J,
            R=OrthogonalRotation.identity(H.geometry.size),
        )

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.E) + self.J

    @property
    def max_offdiag(self) -> float:
        return float(np.abs(self.J).max()) if self.J.size else 0.0


@dataclass(frozen=True, eq=False)
class FinalDiagonalization:
    eigenvalues: np.ndarray
    R: OrthogonalRotation
    labels: np.ndarray
    steps_used: int
    metrics: Tuple[StepMetrics, ...]
    history: Tuple[BlockRegistry, ...] = ()
    cleanup_clusters: int = 0
    max_offdiag: float = 0.0

    @property
    def eigenvectors(self) -> np.ndarray:
        return self.R.matrix


class InteractionSplit(NamedTuple):
    per: np.ndarray
    res: np.ndarray
    sint: np.ndarray
    lint: np.ndarray


def _entering_registry(state: ScaleState, k: int) -> BlockRegistry:
    if 2 <= k <= len(state.history) + 1:
        return state.history[k - 2]
    return BlockRegistry.empty()


def _block_labels(registry: BlockRegistry, n: int) -> Tuple[np.ndarray, np.ndarray]:
    owner = np.full(n, -1, dtype=np.int64)
    small = np.zeros(len(registry.blocks), dtype=bool)
    for block in registry.blocks:
        owner[sorted(block.sites)] = block.id
        small[block.id] = block.is_small
    return owner, small


def split_interaction(state: ScaleState, k: int) -> InteractionSplit:
    """
    Partition J entrywise for step k, using the step-k registry held by the state.

    Shell distances are measured in the metric contracted by the registry that
    entered the step. Leftover entries below the shell go to `per` when both
    endpoints are outside the resonant region and they pass the nonresonance
    tests at distance max(d, 1).

    Args:
        state: State whose registry is the one built for step k.
        k: Step number.

    Returns:
        InteractionSplit whose four matrices sum to J exactly.
    """
    J = state.J
    n = J.shape[0]
    view = _entering_registry(state, k).view(state.geometry)
    dist = view.site_distances
    lo, hi = shell_bounds(k)

    owner, small = _block_labels(state.registry, n)
    inside = owner >= 0
    small_site = np.zeros(n, dtype=bool)
    small_site[inside] = small[owner[inside]]
    same = (owner[:, None] == owner[None, :]) & inside[:, None]
    sint_mask = same & small_site[:, None]
    lint_mask = same & ~small_site[:, None]

    free = ~inside[:, None] & ~inside[None, :]
    np.fill_diagonal(free, False)
    candidate = free & (J != 0) & (dist < hi)

    per_mask = np.zeros((n, n), dtype=bool)
    x, y = np.nonzero(candidate)
    if x.size:
        d_eff = np.maximum(dist[x, y], 1)
        cond1, cond2 = resonance_conditions(state.E[x] - state.E[y], J[x, y], d_eff, state.schedule.params)
        keep = ~(cond1 | cond2)
        per_mask[x[keep], y[keep]] = True

    res_mask = ~(per_mask | sint_mask | lint_mask)
    zero = np.zeros_like(J)
    return InteractionSplit(
        per=np.where(per_mask, J, zero),
        res=np.where(res_mask, J, zero),
        sint=np.where(sint_mask, J, zero),
        lint=np.where(lint_mask, J, zero),
    )


def perform_step(state: ScaleState) -> ScaleState:
    """
    Run step k = state.k + 1.

    Args:
        state: State after k - 1 completed steps.

    Returns:
        New state with the step's rotations applied and metrics appended.
    """
    k = state.k + 1
    if not np.any(state.J):
        return replace(state, k=k)

    params = state.schedule.params
    geom = state.geometry
    n = geom.size
    entering = state.registry
    entering_view = entering.view(geom)
    shell_lo, shell_hi = shell_bounds(k)

    if k == 1:
        snapshot = Hamiltonian(geometry=geom, potential=state.E, j0=params.j0, matrix=state.matrix)
        links = detect_resonant_pairs_step1(snapshot, params)
    else:
        links = detect_resonances_step_k(state, k)

    carried = entering.large_blocks
    cores = form_blocks(links, carried, entering_view)
    registry = classify_and_collar(cores, k, params, geom, held_over=[b.core_sites for b in carried])

    staged = replace(state, registry=registry)
    split = split_interaction(staged, k)
    pairs = np.argwhere(np.triu(split.per != 0))
    generator = build_generator(state.E, split.per, registry, pairs.tolist(), scale=k)

    omega = orthogonal_exp(generator)
    H1 = conjugate(state.matrix, omega)

    block_rotations = [jacobi_block_diagonalize(H1, block.sites)[0] for block in registry.small_blocks]
    O = compose(block_rotations, n)
    H2 = conjugate(H1, O) if block_rotations else H1

    E = np.diag(H2).copy()
    J = H2 - np.diag(E)
    R = accumulate(state.R, accumulate(omega, O))

    below_shell = entering_view.site_distances[pairs[:, 0], pairs[:, 1]] < shell_lo
    metrics = StepMetrics(
        step=k,
        scale_length=shell_hi,
        resonant_pairs=len(links),
        condition_ii_pairs=sum(1 for link in links if link.condition == "II"),
        num_blocks=len(registry.blocks),
        num_small=len(registry.small_blocks),
        num_large=len(registry.large_blocks),
        block_sizes=[b.volume for b in registry.blocks],
        per_entries=int(len(pairs)),
        leftover_entries=int(below_shell.sum()),
        max_offdiag_before=state.max_offdiag,
        max_offdiag=float(np.abs(J).max()),
        generator_norm=generator.norm_max,
        orth_residual=R.orth_residual,
    )
    logger.debug(
        f"step {k}: {metrics.resonant_pairs} resonant pairs, {metrics.num_blocks} blocks "
        f"({metrics.num_large} large), max|J| {metrics.max_offdiag_before:.3e} -> {metrics.max_offdiag:.3e}"
    )
    return replace(
        state,
        E=E,
        J=J,
        R=R,
        registry=registry,
        k=k,
        history=state.history + (registry,),
        metrics=state.metrics + (metrics,),
    )


def _cleanup(state: ScaleState, threshold: float) -> Tuple[ScaleState, int]:
    """Diagonalize whatever the step budget left above tolerance."""
    n = state.geometry.size
    above = np.abs(state.J) > threshold
    if not above.any():
        return state, 0

    clusters = UnionFind()
    for x, y in np.argwhere(np.triu(above)):
        clusters.union(int(x), int(y))
    for block in state.registry.large_blocks:
        if any(s in clusters.parent for s in block.sites):
            anchor = min(block.sites)
            for s in block.sites:
                clusters.union(anchor, s)
    groups = clusters.components()

    H = state.matrix
    rotations = [jacobi_block_diagonalize(H, group, sort=False)[0] for group in groups]
    O = compose(rotations, n)
    H = conjugate(H, O)
    R = accumulate(state.R, O)

    if np.any(np.abs(H - np.diag(np.diag(H))) > threshold):
        logger.info(f"cluster cleanup left entries above {threshold:.3e}; diagonalizing the full residual")
        full, _ = jacobi_block_diagonalize(H, range(n), sort=False)
        H = conjugate(H, full)
        R = accumulate(R, full)

    E = np.diag(H).copy()
    return replace(state, E=E, J=H - np.diag(E), R=R), len(groups)


def run_to_convergence(H: Hamiltonian, sched: Schedule) -> FinalDiagonalization:
    """
    Iterate scale steps until max|J| <= off_diag_tol * ||H||_max or the step budget runs out,
    then diagonalize the remaining clusters exactly.

    Args:
        H: Hamiltonian to diagonalize.
        sched: Scale schedule and resonance parameters.

    Returns:
        FinalDiagonalization with eigenvalues, eigenvectors (columns of R) and labels.
    """
    threshold = sched.off_diag_tol * H.norm_max
    state = ScaleState.initial(H, sched)
    while state.k < sched.max_steps and state.max_offdiag > threshold:
        state = perform_step(state)

    state, clusters = _cleanup(state, threshold)
    if clusters:
        logger.debug(f"cleanup diagonalized {clusters} clusters after {state.k} steps")

    final = FinalDiagonalization(
        eigenvalues=state.E,
        R=state.R,
        labels=np.arange(0),
        steps_used=state.k,
        metrics=state.metrics,
        history=state.history,
        cleanup_clusters=clusters,
        max_offdiag=state.max_offdiag,
    )
    return replace(final, labels=assign_labels(final, state.history))


def assign_labels(final: FinalDiagonalization, history: Sequence[BlockRegistry]) -> np.ndarray:
    """
    One-to-one state -> site map.

    Every block ever formed is merged into one site set; inside it, sites in
    lexicographic order take the set's states in ascending energy. Other
    states go, largest amplitude first, to their best free site outside all
    blocks, ties to the lower index.

    Returns:
        labels with labels[alpha] = site of state alpha.

    Raises:
        LabelingError: if the assignment is not a bijection.
    """
    R = final.R.matrix
    n = R.shape[0]
    eigenvalues = np.asarray(final.eigenvalues)

    merged = UnionFind()
    for registry in history:
        for block in registry.blocks:
            sites = sorted(block.sites)
            for s in sites:
                merged.union(sites[0], s)

    labels = np.full(n, -1, dtype=np.int64)
    in_block = np.zeros(n, dtype=bool)
    for sites in merged.components():
        states = sorted(sites, key=lambda a: (eigenvalues[a], a))
        for site, state in zip(sites, states):
            labels[state] = site
        in_block[sites] = True

    available = ~in_block
    amplitude = np.abs(R)
    free_states = np.flatnonzero(~in_block)
    peak = amplitude[np.ix_(available, free_states)].max(axis=0) if free_states.size else np.array([])
    for state in free_states[np.lexsort((free_states, -peak))]:
        if not available.any():
            raise LabelingError(f"no free site left for state {state}")
        column = np.where(available, amplitude[:, state], -1.0)
        site = int(np.argmax(column))
        labels[state] = site
        available[site] = False

    if not np.array_equal(np.sort(labels), np.arange(n)):
        raise LabelingError(f"labels are not a permutation of 0..{n - 1}")
    return labels


__all__ = [
    "FinalDiagonalization",
    "InteractionSplit",
    "Schedule",
    "ScaleState",
    "StepMetrics",
    "assign_labels",
    "perform_step",
    "run_to_convergence",
    "scale_length",
    "split_interaction",
]
