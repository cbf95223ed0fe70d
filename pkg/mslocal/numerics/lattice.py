from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, List, Sequence, Tuple

import logging
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from mslocal.numerics.errors import DimensionError, InvalidSiteError, InvariantViolation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LatticeGeometry:
    """
    Rectangular box of Z^D with open boundaries.

    Sites are addressed by their row-major flat index, so the natural integer
    order of sites is the lexicographic order of their coordinates.
    """

    dims: Tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        if not dims or any(n < 1 for n in dims):
            raise DimensionError(f"dims must be a non-empty list of positive integers, got {self.dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def D(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    @cached_property
    def coordinates(self) -> np.ndarray:
        """(size, D) array; row x holds the coordinates of site x."""
        return np.stack(np.unravel_index(np.arange(self.size), self.dims), axis=1)

    def check_site(self, x: int) -> int:
        if not 0 <= int(x) < self.size:
            raise InvalidSiteError(f"site {x} outside lattice of size {self.size}")
        return int(x)

    def index_of(self, coords: Sequence[int]) -> int:
        coords = tuple(int(c) for c in coords)
        if len(coords) != self.D or any(not 0 <= c < n for c, n in zip(coords, self.dims)):
            raise InvalidSiteError(f"coordinates {coords} outside lattice {self.dims}")
        return int(np.ravel_multi_index(coords, self.dims))

    def coords_of(self, x: int) -> Tuple[int, ...]:
        return tuple(int(c) for c in self.coordinates[self.check_site(x)])

    def l1_distance(self, x: int, y: int) -> int:
        cx = self.coordinates[self.check_site(x)]
        cy = self.coordinates[self.check_site(y)]
        return int(np.abs(cx - cy).sum())

    @cached_property
    def distance_matrix(self) -> np.ndarray:
        """All-pairs L1 distances."""
        c = self.coordinates.astype(np.int32)
        return np.abs(c[:, None, :] - c[None, :, :]).sum(axis=-1)

    @cached_property
    def edges(self) -> np.ndarray:
        """Nearest-neighbour pairs (x, y) with x < y, in lexicographic order."""
        x, y = np.nonzero(np.triu(self.distance_matrix == 1))
        return np.stack([x, y], axis=1)

    @property
    def center(self) -> int:
        return self.index_of([n // 2 for n in self.dims])

    def ball(self, sites: Iterable[int], radius: float) -> frozenset:
        """Sites within L1 distance <= radius of any of the given sites."""
        sites = [self.check_site(s) for s in sites]
        if not sites:
            return frozenset()
        nearest = self.distance_matrix[sites].min(axis=0)
        return frozenset(np.flatnonzero(nearest <= radius).tolist())


@dataclass(frozen=True, eq=False)
class ContractedMetricView:
    """
    Lattice metric in which each contraction group (a block) collapses to a point.

    Group ids are canonical: numbered in order of their smallest site, so the
    trivial contraction has group id == site index.
    """

    geometry: LatticeGeometry
    contraction: np.ndarray

    def __post_init__(self):
        contraction = np.asarray(self.contraction, dtype=np.int64)
        if contraction.shape != (self.geometry.size,):
            raise DimensionError(
                f"contraction map has shape {contraction.shape}, expected ({self.geometry.size},)"
            )
        _, first_site, inverse = np.unique(contraction, return_index=True, return_inverse=True)
        rank = np.empty(len(first_site), dtype=np.int64)
        rank[np.argsort(first_site)] = np.arange(len(first_site))
        canonical = rank[inverse.reshape(-1)]
        canonical.setflags(write=False)
        object.__setattr__(self, "contraction", canonical)

    @classmethod
    def trivial(cls, geometry: LatticeGeometry) -> "ContractedMetricView":
        return cls(geometry, np.arange(geometry.size))

    @classmethod
    def from_groups(cls, geometry: LatticeGeometry, groups: Iterable[Iterable[int]]) -> "ContractedMetricView":
        contraction = np.arange(geometry.size)
        seen = set()
        for group in groups:
            members = sorted(geometry.check_site(s) for s in group)
            if not members:
                continue
            if seen.intersection(members):
                raise InvariantViolation("contraction groups must be disjoint")
            seen.update(members)
            contraction[members] = members[0]
        return cls(geometry, contraction)

    @property
    def num_groups(self) -> int:
        return int(self.contraction.max()) + 1 if self.contraction.size else 0

    def group_of(self, x: int) -> int:
        return int(self.contraction[self.geometry.check_site(x)])

    @cached_property
    def members(self) -> List[np.ndarray]:
        order = np.argsort(self.contraction, kind="stable")
        bounds = np.searchsorted(self.contraction[order], np.arange(self.num_groups + 1))
        return [order[bounds[g]:bounds[g + 1]] for g in range(self.num_groups)]

    @cached_property
    def group_distances(self) -> np.ndarray:
        """Breadth-first-search distances between groups on the contracted adjacency graph."""
        edges = self.geometry.edges
        gu = self.contraction[edges[:, 0]]
        gv = self.contraction[edges[:, 1]]
        keep = gu != gv
        n = self.num_groups
        graph = csr_matrix((np.ones(int(keep.sum())), (gu[keep], gv[keep])), shape=(n, n))
        dist = shortest_path(graph, directed=False, unweighted=True)
        # rectangles are connected, so no infinities survive
        return dist.astype(np.int64)

    @cached_property
    def site_distances(self) -> np.ndarray:
        return self.group_distances[np.ix_(self.contraction, self.contraction)]


def l1_distance(geometry: LatticeGeometry, x: int, y: int) -> int:
    return geometry.l1_distance(x, y)


def contracted_distance(x: int, y: int, view: ContractedMetricView) -> int:
    gx, gy = view.group_of(x), view.group_of(y)
    return int(view.group_distances[gx, gy])


def pairs_in_shell(view: ContractedMetricView, d_lo: float, d_hi: float) -> List[Tuple[int, int]]:
    """
    Unordered pairs of distinct groups (a < b) whose contracted distance d obeys d_lo <= d < d_hi.

    Args:
        view: Contracted metric to measure in.
        d_lo: Inclusive lower bound, real-valued.
        d_hi: Exclusive upper bound, real-valued.

    Returns:
        List of (group_a, group_b) in lexicographic order.
    """
    if d_lo < 0:
        raise ValueError(f"shell lower bound must be nonnegative, got {d_lo}")
    dist = view.group_distances
    a, b = np.triu_indices(view.num_groups, k=1)
    d = dist[a, b]
    mask = (d >= d_lo) & (d < d_hi)
    return list(zip(a[mask].tolist(), b[mask].tolist()))
