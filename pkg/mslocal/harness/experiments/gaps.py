import logging
import numpy as np

from mslocal import __version__
from mslocal.harness.runner import build_sample, diagonalize, run_samples
from mslocal.harness.schemas import ExperimentConfig, GapReport, GapRow, SampleTrace
from mslocal.harness.stats import quantile_summary
from mslocal.numerics.oracle import min_gap

logger = logging.getLogger(__name__)


def gap_sample(cfg: ExperimentConfig, sample_index: int) -> dict:
    final = diagonalize(cfg, build_sample(cfg, sample_index))
    return {
        "trace": list(final.metrics),
        "min_gap": min_gap(final.eigenvalues),
        "steps_used": final.steps_used,
    }


def run_gap_experiment(cfg: ExperimentConfig) -> GapReport:
    """Smallest level spacing per sample, with its quantiles and the fraction of exact degeneracies."""
    successes, failures = run_samples(cfg, gap_sample)
    rows = [
        GapRow(sample_index=i, min_gap=result["min_gap"], steps_used=result["steps_used"])
        for i, result in successes
    ]
    gaps = np.array([row.min_gap for row in rows])
    summary = quantile_summary(gaps, prefix="gap_")
    summary["zero_fraction"] = float(np.mean(gaps == 0)) if gaps.size else 0.0
    logger.info(f"Gap experiment: {len(rows)} samples, smallest gap {summary.get('gap_min')}")

    return GapReport(
        experiment=cfg.experiment,
        config=cfg,
        version=__version__,
        samples_ok=len(successes),
        failures=failures,
        summary=summary,
        traces=[SampleTrace(sample_index=i, metrics=result["trace"]) for i, result in successes],
        rows=rows,
    )
