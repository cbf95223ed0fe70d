import logging
import numpy as np

from mslocal import __version__
from mslocal.harness.runner import build_sample, reference_pairs, run_samples, schedule_for
from mslocal.harness.schemas import ExperimentConfig, PercolationReport, PercolationRow, SampleTrace
from mslocal.harness.stats import proportion_stderr
from mslocal.numerics.blocks import detect_resonant_pairs_step1, same_block
from mslocal.numerics.driver import run_to_convergence

logger = logging.getLogger(__name__)


def percolation_sample(cfg: ExperimentConfig, sample_index: int) -> dict:
    H = build_sample(cfg, sample_index)
    sched = schedule_for(cfg, H)
    final = run_to_convergence(H, sched)

    x, y, d = reference_pairs(H.geometry)
    off = d >= 1
    x, y, d = x[off], y[off], d[off]
    events = np.array(
        [[same_block(a, b, registry) for a, b in zip(x.tolist(), y.tolist())] for registry in final.history],
        dtype=bool,
    ).reshape(len(final.history), len(x))

    return {
        "trace": list(final.metrics),
        "distance": d,
        "events": events,
        "links": len(detect_resonant_pairs_step1(H, sched.params)),
        "edges": len(H.geometry.edges),
        "epsilon": sched.epsilon,
        "snapshots": [
            {"sample_index": sample_index, "step": k, "blocks": registry.to_json()}
            for k, registry in enumerate(final.history, start=1)
        ],
    }


def run_percolation_experiment(cfg: ExperimentConfig) -> PercolationReport:
    """
    Empirical frequency that two sites share a collared block, by step and distance.

    A sample that converged before step k contributes no block at that step.

    Args:
        cfg: Experiment configuration.

    Returns:
        PercolationReport with one row per (step, distance).
    """
    successes, failures = run_samples(cfg, percolation_sample)
    rows = []
    summary = {}
    if successes:
        distances = successes[0][1]["distance"]
        steps = max(result["events"].shape[0] for _, result in successes)
        for step in range(1, steps + 1):
            for dist in np.unique(distances):
                at = distances == dist
                hits = sum(
                    int(result["events"][step - 1, at].sum())
                    for _, result in successes
                    if result["events"].shape[0] >= step
                )
                trials = int(at.sum()) * len(successes)
                rows.append(
                    PercolationRow(
                        step=step,
                        distance=int(dist),
                        frequency=hits / trials,
                        stderr=proportion_stderr(hits, trials),
                        hits=hits,
                        trials=trials,
                    )
                )

        links = sum(result["links"] for _, result in successes)
        edges = sum(result["edges"] for _, result in successes)
        epsilon = successes[0][1]["epsilon"]
        summary["link_frequency"] = links / edges if edges else 0.0
        summary["link_bound"] = 2 * cfg.disorder.density_bound * epsilon
        summary["steps"] = float(steps)
    logger.info(f"Percolation experiment: {len(successes)} samples, {len(rows)} rows")

    return PercolationReport(
        experiment=cfg.experiment,
        config=cfg,
        version=__version__,
        samples_ok=len(successes),
        failures=failures,
        summary=summary,
        traces=[SampleTrace(sample_index=i, metrics=result["trace"]) for i, result in successes],
        rows=rows,
        block_snapshots=[snap for _, result in successes for snap in result["snapshots"]],
    )
