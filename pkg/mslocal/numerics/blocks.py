from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, Dict, Iterable, List, Optional, Sequence, Tuple

import logging
import math
import numpy as np

from mslocal.numerics.errors import InvariantViolation
from mslocal.numerics.lattice import ContractedMetricView, LatticeGeometry
from mslocal.numerics.model import Hamiltonian
from mslocal.numerics.scales import collar_radius, scale_length, shell_bounds
from mslocal.numerics.unionfind import UnionFind

if TYPE_CHECKING:
    from mslocal.numerics.driver import ScaleState

logger = logging.getLogger(__name__)

DEFAULT_DELTA = 1 / 20


@dataclass(frozen=True)
class ResonanceParams:
    """
    Thresholds of the resonance tests.

    epsilon defaults to J0**delta and M to 2D; s_exponent is carried for
    provenance only, the matrix-level tests never use it.
    """

    j0: float
    epsilon: float
    delta: float = DEFAULT_DELTA
    M: float = 2.0
    s_exponent: float = 0.5

    @classmethod
    def for_coupling(
        cls,
        j0: float,
        D: int,
        delta: Optional[float] = None,
        M: Optional[float] = None,
        epsilon: Optional[float] = None,
    ) -> "ResonanceParams":
        delta = DEFAULT_DELTA if delta is None else delta
        M = 2.0 * D if M is None else M
        epsilon = j0**delta if epsilon is None else epsilon
        return cls(j0=float(j0), epsilon=float(epsilon), delta=float(delta), M=float(M))

    @property
    def ratio(self) -> float:
        """J0 / epsilon, the per-unit-length smallness of perturbative couplings."""
        if self.j0 == 0:
            return 0.0
        if self.epsilon == 0:
            return math.inf
        return self.j0 / self.epsilon

    def small_volume_limit(self, step: int) -> float:
        length = 2.0 if step == 1 else scale_length(step)
        return math.exp(self.M * length ** (2 / 3))


@dataclass(frozen=True)
class ResonantLink:
    x: int
    y: int
    distance: int
    condition: str  # "I" (small gap) or "II" (large coupling-to-gap ratio)


@dataclass(frozen=True)
class ResonantBlock:
    id: int
    core_sites: frozenset
    collar_sites: frozenset
    scale_created: int
    is_small: bool

    def __post_init__(self):
        if self.core_sites & self.collar_sites:
            raise InvariantViolation(f"block {self.id}: core and collar overlap")

    @property
    def sites(self) -> frozenset:
        return self.core_sites | self.collar_sites

    @property
    def volume(self) -> int:
        return len(self.core_sites) + len(self.collar_sites)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "scale": self.scale_created,
            "is_small": self.is_small,
            "core": sorted(self.core_sites),
            "collar": sorted(self.collar_sites),
        }


@dataclass(frozen=True)
class BlockRegistry:
    blocks: Tuple[ResonantBlock, ...] = ()
    carried_large: Tuple[int, ...] = ()
    step: int = 0

    def __post_init__(self):
        seen = set()
        for block in self.blocks:
            if seen & block.sites:
                raise InvariantViolation("registry blocks must be site-disjoint")
            seen |= block.sites

    @classmethod
    def empty(cls) -> "BlockRegistry":
        return cls()

    @cached_property
    def site_to_block(self) -> Dict[int, int]:
        return {site: block.id for block in self.blocks for site in block.sites}

    @cached_property
    def _by_id(self) -> Dict[int, ResonantBlock]:
        return {block.id: block for block in self.blocks}

    def block_of(self, x: int) -> Optional[ResonantBlock]:
        block_id = self.site_to_block.get(int(x))
        return None if block_id is None else self._by_id[block_id]

    @property
    def small_blocks(self) -> List[ResonantBlock]:
        return [b for b in self.blocks if b.is_small]

    @property
    def large_blocks(self) -> List[ResonantBlock]:
        return [b for b in self.blocks if not b.is_small]

    @cached_property
    def covered(self) -> frozenset:
        """The collared resonant region (S-bar of this step)."""
        return frozenset(self.site_to_block)

    def view(self, geometry: LatticeGeometry) -> ContractedMetricView:
        return ContractedMetricView.from_groups(geometry, [b.sites for b in self.blocks])

    def to_json(self) -> List[dict]:
        return [b.to_dict() for b in self.blocks]


def detect_resonant_pairs_step1(H: Hamiltonian, params: ResonanceParams) -> List[ResonantLink]:
    """Nearest-neighbour pairs with |v_x - v_y| < epsilon."""
    v = H.potential
    x, y = H.geometry.edges[:, 0], H.geometry.edges[:, 1]
    resonant = np.abs(v[x] - v[y]) < params.epsilon
    return [ResonantLink(int(a), int(b), 1, "I") for a, b in zip(x[resonant], y[resonant])]


def resonance_conditions(
    gap: np.ndarray, coupling: np.ndarray, distance: np.ndarray, params: ResonanceParams
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Evaluate both resonance conditions elementwise.

    Condition I: gap < eps**d, with an exact zero gap always resonant.
    Condition II: |coupling| > (J0/eps)**d * gap.
    """
    gap = np.abs(gap)
    with np.errstate(over="ignore", invalid="ignore"):
        cond1 = (gap < params.epsilon**distance) | (gap == 0)
        cond2 = np.abs(coupling) > (params.ratio**distance) * gap
    return cond1, np.nan_to_num(cond2, nan=False).astype(bool) & ~cond1


def detect_resonances_step_k(state: "ScaleState", k: int) -> List[ResonantLink]:
    """
    Resonant state pairs in the shell of step k, measured against the registry entering the step.

    Pairs inside one block are at distance 0 and never tested; pairs touching
    a held-over large block are excluded.
    """
    if k < 2:
        raise ValueError(f"general resonance detection starts at step 2, got {k}")
    registry = state.registry
    view = registry.view(state.geometry)
    lo, hi = shell_bounds(k)
    dist = view.site_distances

    excluded = np.zeros(state.geometry.size, dtype=bool)
    for block in registry.large_blocks:
        excluded[list(block.sites)] = True

    candidate = np.triu((dist >= lo) & (dist < hi), k=1)
    candidate &= ~excluded[:, None] & ~excluded[None, :]
    x, y = np.nonzero(candidate)
    if x.size == 0:
        return []

    E = state.E
    cond1, cond2 = resonance_conditions(E[x] - E[y], state.J[x, y], dist[x, y], state.schedule.params)
    links = []
    for a, b, d, c1, c2 in zip(x, y, dist[x, y], cond1, cond2):
        if c1 or c2:
            links.append(ResonantLink(int(a), int(b), int(d), "I" if c1 else "II"))
    logger.debug(f"step {k}: {len(links)} resonant pairs out of {x.size} shell pairs")
    return links


def form_blocks(
    resonant_pairs: Iterable[ResonantLink],
    carried_large: Sequence[ResonantBlock],
    view: ContractedMetricView,
) -> List[frozenset]:
    """
    Connected components of resonant pairs, as block cores.

    Endpoints are sites or whole blocks (the contraction groups of `view`).
    Components touching a held-over large block absorb its core; untouched
    large blocks are carried through as components of their own.
    """
    groups = UnionFind()
    for link in resonant_pairs:
        groups.union(view.group_of(link.x), view.group_of(link.y))
    components = [
        frozenset(int(s) for g in comp for s in view.members[g]) for comp in groups.components()
    ]

    merged = UnionFind()
    for i in range(len(components)):
        merged.add(("c", i))
    for block in carried_large:
        merged.add(("L", block.id))
        for i, comp in enumerate(components):
            if comp & block.sites:
                merged.union(("c", i), ("L", block.id))

    large_by_id = {block.id: block for block in carried_large}
    cores = []
    for members in merged.components():
        core = set()
        for kind, key in members:
            core |= components[key] if kind == "c" else large_by_id[key].core_sites
        cores.append(frozenset(core))
    return sorted(cores, key=min)


def classify_and_collar(
    components: Sequence[Iterable[int]],
    k: int,
    params: ResonanceParams,
    geom: LatticeGeometry,
    held_over: Sequence[frozenset] = (),
) -> BlockRegistry:
    """
    Collar each core by all sites at L1 distance < L_k, merge components whose collared
    regions meet, and classify by collared volume.

    Args:
        components: Block cores, pairwise disjoint.
        k: Step number (collar width and volume threshold depend on it).
        params: Resonance parameters (M enters the volume threshold).
        geom: Lattice geometry.
        held_over: Cores of large blocks carried from earlier steps; blocks containing one
            are listed in the registry's carried_large.

    Returns:
        BlockRegistry of site-disjoint blocks.
    """
    cores = [frozenset(int(s) for s in comp) for comp in components if comp]
    radius = collar_radius(k)
    balls = [geom.ball(core, radius) for core in cores]

    merge = UnionFind()
    owner: Dict[int, int] = {}
    for i, ball in enumerate(balls):
        merge.add(i)
        for site in ball:
            if site in owner:
                merge.union(owner[site], i)
            else:
                owner[site] = i

    limit = params.small_volume_limit(k)
    blocks = []
    carried = []
    merged = sorted(merge.components(), key=lambda idx: min(min(cores[i]) for i in idx))
    for block_id, indices in enumerate(merged):
        core = frozenset().union(*(cores[i] for i in indices))
        collared = frozenset().union(*(balls[i] for i in indices))
        blocks.append(
            ResonantBlock(
                id=block_id,
                core_sites=core,
                collar_sites=collared - core,
                scale_created=k,
                is_small=len(collared) <= limit,
            )
        )
        if any(h <= core for h in held_over):
            carried.append(block_id)
    return BlockRegistry(blocks=tuple(blocks), carried_large=tuple(carried), step=k)


def same_block(x: int, y: int, reg: BlockRegistry) -> bool:
    """True iff x and y lie in one collared block; for x == y, whether x is in any block."""
    bx = reg.site_to_block.get(int(x))
    return bx is not None and bx == reg.site_to_block.get(int(y))
