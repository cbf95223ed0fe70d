import logging
import math
import numpy as np

from mslocal import __version__
from mslocal.harness.runner import build_sample, run_samples, schedule_for
from mslocal.harness.schemas import ConvergenceReport, ConvergenceRow, ExperimentConfig, SampleTrace
from mslocal.harness.stats import fit_log_slope, geometric_mean
from mslocal.numerics.driver import run_to_convergence
from mslocal.numerics.scales import scale_length

logger = logging.getLogger(__name__)


def convergence_sample(cfg: ExperimentConfig, sample_index: int) -> dict:
    H = build_sample(cfg, sample_index)
    sched = schedule_for(cfg, H)
    final = run_to_convergence(H, sched)
    trace = [m.max_offdiag for m in final.metrics]
    padded = trace + [final.max_offdiag] * (cfg.max_steps - len(trace))
    first = final.metrics[0] if final.metrics else None
    return {
        "trace": list(final.metrics),
        "max_offdiag": padded[: cfg.max_steps],
        "ratio": sched.params.ratio,
        "epsilon": sched.epsilon,
        "step1_nonresonant": first is not None and first.resonant_pairs == 0,
        "step1_max": first.max_offdiag if first is not None else final.max_offdiag,
    }


def run_convergence_experiment(cfg: ExperimentConfig) -> ConvergenceReport:
    """
    Decay of max|J| per step against the predicted (J0/eps)^{L_k}.

    Samples that stop early are padded with their final residual.
    """
    successes, failures = run_samples(cfg, convergence_sample)
    rows = []
    summary = {}
    if successes:
        ratio = successes[0][1]["ratio"]
        table = np.array([result["max_offdiag"] for _, result in successes]).reshape(len(successes), cfg.max_steps)
        for step in range(1, cfg.max_steps + 1):
            column = table[:, step - 1]
            length = scale_length(step)
            predicted = ratio**length
            geomean = geometric_mean(column)
            rows.append(
                ConvergenceRow(
                    step=step,
                    scale_length=length,
                    median_max_offdiag=float(np.median(column)),
                    geomean_max_offdiag=geomean,
                    predicted_bound=predicted,
                    ratio=geomean / predicted if predicted > 0 else 0.0,
                    samples=len(successes),
                )
            )

        summary["fitted_slope"] = fit_log_slope([r.scale_length for r in rows], [r.median_max_offdiag for r in rows])
        summary["half_log_ratio"] = 0.5 * math.log(ratio) if ratio > 0 else float("-inf")
        epsilon = successes[0][1]["epsilon"]
        clean = [result["step1_max"] for _, result in successes if result["step1_nonresonant"]]
        if clean and epsilon > 0:
            bound = 10 * cfg.j0**2 / epsilon
            summary["step1_bound"] = bound
            summary["step1_within_bound"] = float(np.mean(np.array(clean) <= bound))
    logger.info(f"Convergence experiment: {len(successes)} samples over {cfg.max_steps} steps")

    return ConvergenceReport(
        experiment=cfg.experiment,
        config=cfg,
        version=__version__,
        samples_ok=len(successes),
        failures=failures,
        summary=summary,
        traces=[SampleTrace(sample_index=i, metrics=result["trace"]) for i, result in successes],
        rows=rows,
    )
