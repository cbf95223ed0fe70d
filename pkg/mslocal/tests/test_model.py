import pytest
import numpy as np

from mslocal.numerics.errors import ConfigError, DimensionError
from mslocal.numerics.lattice import LatticeGeometry
from mslocal.numerics.model import DisorderConfig, build_hamiltonian, sample_potential, sample_stream
from mslocal.numerics.unionfind import UnionFind

# --- Test build_hamiltonian ---
def test_two_site_hamiltonian(two_site_nonresonant):
    np.testing.assert_array_equal(two_site_nonresonant.matrix, [[0.0, -0.01], [-0.01, 1.0]])
    assert two_site_nonresonant.norm_max == 1.0


def test_hamiltonian_is_symmetric_with_hopping_on_edges(rng):
    geom = LatticeGeometry((3, 3))
    v = rng.uniform(size=geom.size)
    H = build_hamiltonian(geom, v, 0.05)
    np.testing.assert_array_equal(H.matrix, H.matrix.T)
    np.testing.assert_array_equal(np.diag(H.matrix), v)
    assert np.count_nonzero(H.matrix - np.diag(v)) == 2 * len(geom.edges)


def test_hamiltonian_potential_is_frozen(chain10):
    H = build_hamiltonian(chain10, np.zeros(10), 0.1)
    with pytest.raises(ValueError):
        H.potential[0] = 1.0


def test_hamiltonian_rejects_bad_inputs(chain10):
    with pytest.raises(DimensionError):
        build_hamiltonian(chain10, np.zeros(9), 0.1)
    with pytest.raises(ValueError):
        build_hamiltonian(chain10, np.zeros(10), -0.1)

# --- Test disorder sampling ---
def test_samples_are_reproducible(chain10):
    cfg = DisorderConfig(master_seed=42)
    np.testing.assert_array_equal(sample_potential(chain10, cfg, 3), sample_potential(chain10, cfg, 3))
    assert not np.array_equal(sample_potential(chain10, cfg, 3), sample_potential(chain10, cfg, 4))


def test_samples_respect_support(chain10):
    cfg = DisorderConfig(lo=-2.0, hi=2.0)
    v = sample_potential(chain10, cfg, 0)
    assert v.min() >= -2.0 and v.max() < 2.0
    assert cfg.density_bound == 0.25


def test_seed_streams_differ_by_master_seed(chain10):
    a = sample_potential(chain10, DisorderConfig(master_seed=1), 0)
    b = sample_potential(chain10, DisorderConfig(master_seed=2), 0)
    assert not np.array_equal(a, b)


def test_disorder_config_validation():
    with pytest.raises(ValueError):
        DisorderConfig(lo=1.0, hi=0.0)
    with pytest.raises(ValueError):
        DisorderConfig(kind="uniform", width=3)
    with pytest.raises(ValueError):
        sample_stream(DisorderConfig(), -1)


def test_unknown_disorder_kind_is_a_config_error(chain10):
    unchecked = DisorderConfig.model_construct(kind="cauchy", lo=0.0, hi=1.0, master_seed=0)
    with pytest.raises(ConfigError, match="cauchy"):
        sample_potential(chain10, unchecked, 0)

# --- Test UnionFind ---
def test_union_find_components_are_ordered():
    uf = UnionFind()
    uf.union(5, 6)
    uf.union(1, 0)
    uf.union(6, 9)
    uf.add(3)
    assert uf.components() == [[0, 1], [3], [5, 6, 9]]
    assert uf.find(9) == 5


def test_union_find_is_order_independent():
    pairs = [(0, 1), (4, 5), (1, 2), (7, 4)]
    forward, backward = UnionFind(), UnionFind()
    for x, y in pairs:
        forward.union(x, y)
    for x, y in reversed(pairs):
        backward.union(y, x)
    assert forward.components() == backward.components()
