from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import logging
import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from mslocal.numerics.errors import ConfigError, DimensionError
from mslocal.numerics.lattice import LatticeGeometry

logger = logging.getLogger(__name__)


class DisorderKind(str, Enum):
    UNIFORM = "uniform"


class DisorderConfig(BaseModel):
    """Distribution of the on-site potential; only bounded densities are supported."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: DisorderKind = DisorderKind.UNIFORM
    lo: float = 0.0
    hi: float = 1.0
    master_seed: int = 0

    @model_validator(mode="after")
    def _check_support(self):
        if not self.hi > self.lo:
            raise ValueError(f"disorder support needs hi > lo, got lo={self.lo}, hi={self.hi}")
        return self

    @property
    def density_bound(self) -> float:
        return 1.0 / (self.hi - self.lo)


def sample_stream(cfg: DisorderConfig, sample_index: int) -> np.random.Generator:
    """Independent generator for one sample, keyed by (master_seed, sample_index)."""
    if sample_index < 0:
        raise ValueError(f"sample_index must be nonnegative, got {sample_index}")
    seed = np.random.SeedSequence([cfg.master_seed & 0xFFFFFFFFFFFFFFFF, sample_index])
    return np.random.default_rng(seed)


def sample_potential(geom: LatticeGeometry, cfg: DisorderConfig, sample_index: int) -> np.ndarray:
    rng = sample_stream(cfg, sample_index)
    if cfg.kind is DisorderKind.UNIFORM:
        return rng.uniform(cfg.lo, cfg.hi, size=geom.size)
    raise ConfigError(f"unsupported disorder kind {cfg.kind!r}")


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    geometry: LatticeGeometry
    potential: np.ndarray
    j0: float
    matrix: np.ndarray

    @property
    def norm_max(self) -> float:
        return float(np.abs(self.matrix).max()) if self.matrix.size else 0.0


def build_hamiltonian(geom: LatticeGeometry, potential: Sequence[float], j0: float) -> Hamiltonian:
    """
    Anderson tight-binding matrix: potential on the diagonal, -J0 between L1 neighbours.

    Args:
        geom: Lattice the sites live on.
        potential: On-site energies v_x, one per site.
        j0: Hopping strength, J0 >= 0.

    Returns:
        Hamiltonian with a dense, exactly symmetric matrix.
    """
    potential = np.asarray(potential, dtype=float)
    if potential.shape != (geom.size,):
        raise DimensionError(f"potential has shape {potential.shape}, lattice has {geom.size} sites")
    if j0 < 0:
        raise ValueError(f"J0 must be nonnegative, got {j0}")

    matrix = np.diag(potential)
    x, y = geom.edges[:, 0], geom.edges[:, 1]
    matrix[x, y] = -j0
    matrix[y, x] = -j0
    potential = potential.copy()
    potential.setflags(write=False)
    return Hamiltonian(geometry=geom, potential=potential, j0=float(j0), matrix=matrix)
