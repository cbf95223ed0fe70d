from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List, Tuple

import logging
import numpy as np
from tqdm import tqdm

from mslocal.harness.schemas import ExperimentConfig, SampleFailure
from mslocal.numerics.driver import FinalDiagonalization, Schedule, run_to_convergence
from mslocal.numerics.lattice import LatticeGeometry
from mslocal.numerics.model import Hamiltonian, build_hamiltonian, sample_potential

logger = logging.getLogger(__name__)

SampleTask = Callable[[ExperimentConfig, int], Any]


def build_sample(cfg: ExperimentConfig, sample_index: int) -> Hamiltonian:
    geom = LatticeGeometry(tuple(cfg.dims))
    potential = sample_potential(geom, cfg.disorder_config, sample_index)
    return build_hamiltonian(geom, potential, cfg.j0)


def schedule_for(cfg: ExperimentConfig, H: Hamiltonian) -> Schedule:
    return Schedule.for_hamiltonian(
        H,
        delta=cfg.delta,
        M=cfg.M,
        epsilon=cfg.epsilon,
        off_diag_tol=cfg.tol,
        max_steps=cfg.max_steps,
    )


def diagonalize(cfg: ExperimentConfig, H: Hamiltonian) -> FinalDiagonalization:
    return run_to_convergence(H, schedule_for(cfg, H))


def reference_pairs(geom: LatticeGeometry) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Site pairs the distance statistics are taken over: every pair x <= y in one
    dimension, pairs anchored at the box center otherwise.

    Returns:
        (x, y, L1 distance) arrays.
    """
    if geom.D == 1:
        x, y = np.triu_indices(geom.size)
    else:
        y = np.arange(geom.size)
        x = np.full_like(y, geom.center)
    return x, y, geom.distance_matrix[x, y].astype(np.int64)


def _guarded(task: SampleTask, cfg: ExperimentConfig, sample_index: int):
    try:
        return sample_index, task(cfg, sample_index), None
    except Exception as e:
        logger.error(f"Sample {sample_index} failed: {e}", exc_info=True)
        return sample_index, None, SampleFailure(
            sample_index=sample_index, error_type=type(e).__name__, message=str(e)
        )


def run_samples(cfg: ExperimentConfig, task: SampleTask) -> Tuple[List[Tuple[int, Any]], List[SampleFailure]]:
    """
    Run task(cfg, i) for every sample index, in-process or on a worker pool.

    Args:
        cfg: Experiment configuration, shared read-only by all samples.
        task: Module-level callable so it can be sent to worker processes.

    Returns:
        (successes as (index, result) sorted by index, failures sorted by index)
    """
    indices = range(cfg.num_samples)
    progress = tqdm(total=cfg.num_samples, desc=cfg.experiment.value, disable=None)
    outcomes = []
    try:
        if cfg.workers == 1:
            for i in indices:
                outcomes.append(_guarded(task, cfg, i))
                progress.update()
        else:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                futures = [pool.submit(_guarded, task, cfg, i) for i in indices]
                for future in futures:
                    outcomes.append(future.result())
                    progress.update()
    finally:
        progress.close()

    outcomes.sort(key=lambda item: item[0])
    successes = [(i, result) for i, result, failure in outcomes if failure is None]
    failures = [failure for _, _, failure in outcomes if failure is not None]
    if failures:
        logger.info(f"{len(failures)} of {cfg.num_samples} samples failed")
    return successes, failures
