from dataclasses import replace

import pytest
import numpy as np

from mslocal.numerics.blocks import BlockRegistry, ResonanceParams, ResonantBlock
from mslocal.numerics.driver import (
    Schedule,
    ScaleState,
    assign_labels,
    perform_step,
    run_to_convergence,
    scale_length,
    split_interaction,
)
from mslocal.numerics.lattice import LatticeGeometry
from mslocal.numerics.model import DisorderConfig, build_hamiltonian, sample_potential
from mslocal.numerics.oracle import dense_jacobi_eigensolve, eigenvector_residual, spectrum_compare
from mslocal.numerics.rotor import orthogonality_residual
from mslocal.numerics.scales import collar_radius, shell_bounds


def random_hamiltonian(dims, j0, seed=7, sample=0):
    geom = LatticeGeometry(dims)
    v = sample_potential(geom, DisorderConfig(master_seed=seed), sample)
    return build_hamiltonian(geom, v, j0)

# --- Test scale schedule ---
def test_scale_length_values():
    assert scale_length(0) == 1
    assert scale_length(1) == 1.875
    assert scale_length(4) == 12.359619140625
    with pytest.raises(ValueError):
        scale_length(-1)


def test_shells_and_collars():
    assert shell_bounds(1) == (1.0, 1.875)
    assert shell_bounds(2) == (1.875, 3.515625)
    assert [collar_radius(k) for k in (1, 2, 3, 4)] == [1, 3, 6, 12]
    with pytest.raises(ValueError):
        shell_bounds(0)


def test_schedule_stores_geometric_lengths():
    sched = Schedule(params=ResonanceParams(j0=0.01, epsilon=0.5), max_steps=10)
    assert sched.L[0] == 1.0
    assert len(sched.L) == 12
    for a, b in zip(sched.L, sched.L[1:]):
        assert b / a == pytest.approx(15 / 8, rel=1e-15)
    assert sched.epsilon == 0.5


def test_schedule_validation():
    params = ResonanceParams(j0=0.01, epsilon=0.5)
    with pytest.raises(ValueError):
        Schedule(params=params, max_steps=-1)
    with pytest.raises(ValueError):
        Schedule(params=params, off_diag_tol=0.0)

# --- Test ScaleState ---
def test_initial_state_splits_diagonal(two_site_nonresonant):
    sched = Schedule.for_hamiltonian(two_site_nonresonant)
    state = ScaleState.initial(two_site_nonresonant, sched)
    np.testing.assert_array_equal(state.E, [0.0, 1.0])
    assert np.all(np.diag(state.J) == 0)
    np.testing.assert_array_equal(state.matrix, two_site_nonresonant.matrix)
    assert state.k == 0

# --- Test split_interaction ---
def test_split_without_blocks_is_all_perturbative(two_site_nonresonant):
    state = ScaleState.initial(two_site_nonresonant, Schedule.for_hamiltonian(two_site_nonresonant))
    split = split_interaction(state, 1)
    np.testing.assert_array_equal(split.per, state.J)
    assert not split.res.any() and not split.sint.any() and not split.lint.any()


def test_split_is_an_exact_partition(rng):
    n = 8
    geom = LatticeGeometry((n,))
    J = rng.normal(size=(n, n)) * 0.01
    J = (J + J.T) / 2
    np.fill_diagonal(J, 0.0)
    H = build_hamiltonian(geom, rng.uniform(size=n), 0.01)
    state = ScaleState.initial(H, Schedule(params=ResonanceParams(j0=0.01, epsilon=0.1)))
    registry = BlockRegistry(
        blocks=(
            ResonantBlock(id=0, core_sites=frozenset({0, 1}), collar_sites=frozenset({2}), scale_created=1, is_small=True),
            ResonantBlock(id=1, core_sites=frozenset({5}), collar_sites=frozenset({4, 6}), scale_created=1, is_small=False),
        ),
        step=1,
    )
    state = replace(state, J=J, registry=registry)
    split = split_interaction(state, 1)

    assert np.array_equal(split.per + split.res + split.sint + split.lint, J)
    assert split.sint[0, 2] == J[0, 2]
    assert split.lint[4, 6] == J[4, 6]
    assert not split.per[[0, 1, 2, 4, 5, 6], :].any()
    assert split.res[2, 3] == J[2, 3]
    # distance 4 is beyond the step-1 shell
    assert split.res[3, 7] == J[3, 7]


def test_split_sends_resonant_shell_pairs_to_res():
    H = build_hamiltonian(LatticeGeometry((3,)), [0.0, 0.05, 1.0], 0.01)
    state = ScaleState.initial(H, Schedule(params=ResonanceParams(j0=0.01, epsilon=0.5)))
    split = split_interaction(state, 1)
    assert split.res[0, 1] == -0.01
    assert split.per[1, 2] == -0.01

# --- Test perform_step ---
def test_step_on_zero_interaction_only_counts():
    H = build_hamiltonian(LatticeGeometry((4,)), [0.1, 0.4, 0.2, 0.9], 0.0)
    state = ScaleState.initial(H, Schedule.for_hamiltonian(H))
    after = perform_step(state)
    assert after.k == 1
    assert after.R is state.R
    np.testing.assert_array_equal(after.E, state.E)


def test_step_on_nonresonant_pair(two_site_nonresonant):
    state = ScaleState.initial(two_site_nonresonant, Schedule.for_hamiltonian(two_site_nonresonant))
    after = perform_step(state)
    assert abs(after.J[0, 1]) <= 2e-4
    assert after.registry.blocks == ()
    assert after.metrics[0].per_entries == 1
    assert after.metrics[0].generator_norm == pytest.approx(0.01)


def test_step_on_resonant_pair(two_site_resonant):
    state = ScaleState.initial(two_site_resonant, Schedule.for_hamiltonian(two_site_resonant))
    after = perform_step(state)
    assert abs(after.J[0, 1]) <= 1e-13
    (only,) = after.registry.blocks
    assert only.is_small and only.sites == frozenset({0, 1})
    np.testing.assert_allclose(after.E, [0.49, 0.51], atol=1e-12)


def test_steps_preserve_spectrum_and_orthogonality():
    H = random_hamiltonian((12,), 0.05)
    reference = np.linalg.eigvalsh(H.matrix)
    state = ScaleState.initial(H, Schedule.for_hamiltonian(H, delta=0.5))
    for _ in range(4):
        state = perform_step(state)
        assert np.all(np.diag(state.J) == 0)
        assert spectrum_compare(np.linalg.eigvalsh(state.matrix), reference) < 1e-9
        assert orthogonality_residual(state.R.matrix) < 1e-10
        np.testing.assert_allclose(state.R.matrix.T @ H.matrix @ state.R.matrix, state.matrix, atol=1e-9)
    assert [m.step for m in state.metrics] == [1, 2, 3, 4]


def test_steps_are_deterministic():
    H = random_hamiltonian((10,), 0.05)
    sched = Schedule.for_hamiltonian(H, delta=0.5)
    first = run_to_convergence(H, sched)
    second = run_to_convergence(H, sched)
    assert [m.model_dump() for m in first.metrics] == [m.model_dump() for m in second.metrics]
    np.testing.assert_array_equal(first.R.matrix, second.R.matrix)

# --- Test run_to_convergence ---
def test_no_hopping_terminates_immediately():
    H = random_hamiltonian((6,), 0.0)
    final = run_to_convergence(H, Schedule.for_hamiltonian(H))
    assert final.steps_used == 0
    np.testing.assert_array_equal(final.eigenvalues, H.potential)
    np.testing.assert_array_equal(final.R.matrix, np.eye(6))
    np.testing.assert_array_equal(final.labels, np.arange(6))


@pytest.mark.parametrize(
    "dims, j0, delta",
    [
        ((16,), 0.02, None),
        ((16,), 0.05, 0.5),
        ((5, 5), 0.02, 0.5),
        ((24,), 0.01, 1.0),
        ((64,), 0.05, 0.5),
        ((12, 12), 0.02, 0.5),
    ],
)
def test_pipeline_matches_oracle(dims, j0, delta):
    H = random_hamiltonian(dims, j0)
    sched = Schedule.for_hamiltonian(H, delta=delta)
    final = run_to_convergence(H, sched)
    oracle = dense_jacobi_eigensolve(H.matrix)

    assert spectrum_compare(final.eigenvalues, oracle.eigenvalues) < 1e-9
    assert eigenvector_residual(H.matrix, final.eigenvalues, final.eigenvectors) < 1e-8
    assert final.max_offdiag <= sched.off_diag_tol * H.norm_max
    assert orthogonality_residual(final.R.matrix) < 1e-10
    assert sorted(final.labels.tolist()) == list(range(H.geometry.size))


def test_step_budget_exhaustion_falls_back_to_cleanup():
    H = random_hamiltonian((12,), 0.05)
    sched = Schedule.for_hamiltonian(H, delta=0.5, max_steps=1)
    final = run_to_convergence(H, sched)
    assert final.steps_used == 1
    assert final.cleanup_clusters >= 1
    assert spectrum_compare(final.eigenvalues, np.linalg.eigvalsh(H.matrix)) < 1e-9
    assert final.max_offdiag <= sched.off_diag_tol * H.norm_max


def test_off_diagonal_decays_on_spaced_chain():
    H = build_hamiltonian(LatticeGeometry((8,)), np.arange(8.0), 0.01)
    final = run_to_convergence(H, Schedule.for_hamiltonian(H, delta=0.5))
    maxima = [m.max_offdiag for m in final.metrics]
    assert all(m.resonant_pairs == 0 for m in final.metrics)
    assert maxima[0] < 0.01
    assert all(b < a for a, b in zip(maxima, maxima[1:]))

# --- Test assign_labels ---
def test_labels_follow_dominant_amplitude():
    H = build_hamiltonian(LatticeGeometry((4,)), [0.0, 1.0, 2.0, 3.0], 0.01)
    final = run_to_convergence(H, Schedule.for_hamiltonian(H, delta=0.5))
    assert all(not registry.blocks for registry in final.history)
    np.testing.assert_array_equal(final.labels, np.arange(4))
    np.testing.assert_array_equal(np.argmax(np.abs(final.R.matrix), axis=0), final.labels)


def test_nonresonant_pair_labels_identity(two_site_nonresonant):
    final = run_to_convergence(two_site_nonresonant, Schedule.for_hamiltonian(two_site_nonresonant))
    np.testing.assert_array_equal(final.labels, [0, 1])


def test_resonant_block_labels_by_energy(two_site_resonant):
    final = run_to_convergence(two_site_resonant, Schedule.for_hamiltonian(two_site_resonant))
    low, high = int(np.argmin(final.eigenvalues)), int(np.argmax(final.eigenvalues))
    assert final.eigenvalues[low] == pytest.approx(0.49)
    assert final.eigenvalues[high] == pytest.approx(0.51)
    assert final.labels[low] == 0
    assert final.labels[high] == 1


def test_assign_labels_is_recomputable():
    H = random_hamiltonian((10,), 0.05)
    final = run_to_convergence(H, Schedule.for_hamiltonian(H, delta=0.5))
    np.testing.assert_array_equal(assign_labels(final, final.history), final.labels)
