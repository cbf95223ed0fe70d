import logging
import numpy as np

from mslocal import __version__
from mslocal.harness.runner import build_sample, diagonalize, reference_pairs, run_samples
from mslocal.harness.schemas import CorrelatorReport, CorrelatorRow, ExperimentConfig, SampleTrace
from mslocal.harness.stats import fit_log_slope, mean_and_stderr
from mslocal.numerics.oracle import correlator_matrix, dense_jacobi_eigensolve

logger = logging.getLogger(__name__)


def propagator_sup(eigenvalues: np.ndarray, eigenvectors: np.ndarray, times) -> np.ndarray:
    """sup over the time grid of |exp(-itH)(x, y)|, for all site pairs."""
    sup = np.zeros((eigenvectors.shape[0],) * 2)
    for t in times:
        phases = np.exp(-1j * t * eigenvalues)
        sup = np.maximum(sup, np.abs((eigenvectors * phases[None, :]) @ eigenvectors.T))
    return sup


def correlator_sample(cfg: ExperimentConfig, sample_index: int) -> dict:
    H = build_sample(cfg, sample_index)
    final = diagonalize(cfg, H)
    x, y, d = reference_pairs(H.geometry)
    Q = correlator_matrix(final.eigenvectors)

    result = {
        "trace": list(final.metrics),
        "distance": d,
        "q": Q[x, y],
        "propagator": None,
        "oracle_deviation": None,
    }
    if cfg.propagator_times:
        result["propagator"] = propagator_sup(final.eigenvalues, final.eigenvectors, cfg.propagator_times)[x, y]
    if cfg.cross_check:
        oracle = correlator_matrix(dense_jacobi_eigensolve(H.matrix).eigenvectors)
        result["oracle_deviation"] = float(np.abs(oracle[x, y] - Q[x, y]).max())
    return result


def run_correlator_experiment(cfg: ExperimentConfig) -> CorrelatorReport:
    """
    Mean eigenfunction correlator by distance, with tail frequencies and a fitted decay rate.

    Args:
        cfg: Experiment configuration.

    Returns:
        CorrelatorReport with one row per distance.
    """
    successes, failures = run_samples(cfg, correlator_sample)
    rows = []
    if successes:
        distances = successes[0][1]["distance"]
        for dist in np.unique(distances):
            at = distances == dist
            per_sample = [result["q"][at].mean() for _, result in successes]
            pooled = np.concatenate([result["q"][at] for _, result in successes])
            threshold = cfg.j0 ** (cfg.kappa * dist / 2)
            mean, stderr = mean_and_stderr(per_sample)
            propagator = None
            if cfg.propagator_times:
                propagator = float(np.mean([result["propagator"][at].mean() for _, result in successes]))
            rows.append(
                CorrelatorRow(
                    distance=int(dist),
                    mean=mean,
                    stderr=stderr,
                    tail_threshold=threshold,
                    tail_frequency=float(np.mean(pooled > threshold)),
                    kappa_bound=cfg.j0 ** (cfg.kappa * dist),
                    pairs=int(at.sum()),
                    samples=len(successes),
                    propagator_sup=propagator,
                )
            )

    decaying = [row for row in rows if row.distance >= 1]
    summary = {
        "fitted_rate": fit_log_slope([r.distance for r in decaying], [r.mean for r in decaying]),
        "kappa": cfg.kappa,
    }
    deviations = [result["oracle_deviation"] for _, result in successes if result["oracle_deviation"] is not None]
    if deviations:
        summary["max_oracle_deviation"] = float(max(deviations))
    logger.info(f"Correlator experiment: {len(successes)} samples, fitted rate {summary['fitted_rate']:.4g}")

    return CorrelatorReport(
        experiment=cfg.experiment,
        config=cfg,
        version=__version__,
        samples_ok=len(successes),
        failures=failures,
        summary=summary,
        traces=[SampleTrace(sample_index=i, metrics=result["trace"]) for i, result in successes],
        rows=rows,
    )
