import logging
import numpy as np

from mslocal import __version__
from mslocal.harness.runner import diagonalize, run_samples
from mslocal.harness.schemas import ExperimentConfig, SampleTrace, VolumeConvergenceReport, VolumeRow
from mslocal.harness.stats import fit_log_slope, mean_and_stderr
from mslocal.numerics.lattice import LatticeGeometry
from mslocal.numerics.model import build_hamiltonian, sample_potential

logger = logging.getLogger(__name__)


def centered_box(half_width: int, D: int) -> LatticeGeometry:
    """The box [-K, K]^D, stored with coordinates shifted by K."""
    return LatticeGeometry((2 * half_width + 1,) * D)


def embedding(inner: LatticeGeometry, outer: LatticeGeometry) -> np.ndarray:
    """Flat index in `outer` of every site of `inner`, both boxes sharing a center."""
    offset = (np.array(outer.dims) - np.array(inner.dims)) // 2
    coords = inner.coordinates + offset[None, :]
    return np.ravel_multi_index(tuple(coords.T), outer.dims)


def volume_sample(cfg: ExperimentConfig, sample_index: int) -> dict:
    D = len(cfg.dims)
    k_max = max(cfg.volumes)
    outer = centered_box(k_max, D)
    potential = sample_potential(outer, cfg.disorder_config, sample_index)

    energies, states, traces = {}, {}, []
    for K in cfg.volumes:
        inner = centered_box(K, D)
        sites = embedding(inner, outer)
        final = diagonalize(cfg, build_hamiltonian(inner, potential[sites], cfg.j0))
        alpha = int(np.flatnonzero(final.labels == inner.center)[0])
        phi = np.zeros(outer.size)
        phi[sites] = final.eigenvectors[:, alpha]
        energies[K], states[K] = float(final.eigenvalues[alpha]), phi
        if K == k_max:
            traces = list(final.metrics)

    reference_energy, reference_state = energies[k_max], states[k_max]
    return {
        "trace": traces,
        "energy_diff": {K: abs(energies[K] - reference_energy) for K in cfg.volumes},
        "state_diff": {
            K: float(min(np.abs(states[K] - reference_state).max(), np.abs(states[K] + reference_state).max()))
            for K in cfg.volumes
        },
    }


def run_volume_convergence_experiment(cfg: ExperimentConfig) -> VolumeConvergenceReport:
    """
    Convergence of the center site's energy and eigenfunction as the box grows.

    One potential is sampled on the largest box [-K_max, K_max]^D and restricted
    to the smaller ones; eigenfunctions are compared up to a global sign.

    Args:
        cfg: Experiment configuration (dims only sets the dimension).

    Returns:
        VolumeConvergenceReport with one row per half-width K.
    """
    successes, failures = run_samples(cfg, volume_sample)
    rows = []
    for K in cfg.volumes:
        if not successes:
            break
        energy, energy_se = mean_and_stderr([result["energy_diff"][K] for _, result in successes])
        state, state_se = mean_and_stderr([result["state_diff"][K] for _, result in successes])
        rows.append(
            VolumeRow(
                half_width=K,
                energy_diff=energy,
                energy_stderr=energy_se,
                eigenfunction_diff=state,
                eigenfunction_stderr=state_se,
                samples=len(successes),
            )
        )

    inner_rows = [row for row in rows if row.half_width < max(cfg.volumes)]
    summary = {
        "energy_rate": fit_log_slope([r.half_width for r in inner_rows], [r.energy_diff for r in inner_rows]),
        "eigenfunction_rate": fit_log_slope(
            [r.half_width for r in inner_rows], [r.eigenfunction_diff for r in inner_rows]
        ),
    }
    logger.info(f"Volume convergence: {len(successes)} samples, energy rate {summary['energy_rate']:.4g}")

    return VolumeConvergenceReport(
        experiment=cfg.experiment,
        config=cfg,
        version=__version__,
        samples_ok=len(successes),
        failures=failures,
        summary=summary,
        traces=[SampleTrace(sample_index=i, metrics=result["trace"]) for i, result in successes],
        rows=rows,
    )
