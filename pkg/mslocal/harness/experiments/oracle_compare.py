import logging
import numpy as np

from mslocal import __version__
from mslocal.harness.runner import build_sample, diagonalize, run_samples
from mslocal.harness.schemas import ExperimentConfig, OracleCompareReport, OracleCompareRow, SampleTrace
from mslocal.numerics.oracle import dense_jacobi_eigensolve, eigenvector_residual, spectrum_compare
from mslocal.numerics.rotor import orthogonality_residual

logger = logging.getLogger(__name__)

SPECTRUM_TOL = 1e-9
RESIDUAL_TOL = 1e-8


def oracle_compare_sample(cfg: ExperimentConfig, sample_index: int) -> dict:
    H = build_sample(cfg, sample_index)
    final = diagonalize(cfg, H)
    oracle = dense_jacobi_eigensolve(H.matrix)

    diff = spectrum_compare(final.eigenvalues, oracle.eigenvalues)
    residual = eigenvector_residual(H.matrix, final.eigenvalues, final.eigenvectors)
    bijective = bool(np.array_equal(np.sort(final.labels), np.arange(H.geometry.size)))
    row = OracleCompareRow(
        sample_index=sample_index,
        spectrum_diff=diff,
        eigenvector_residual=residual,
        oracle_residual=oracle.residual,
        orth_residual=orthogonality_residual(final.eigenvectors),
        labels_bijective=bijective,
        steps_used=final.steps_used,
        cleanup_clusters=final.cleanup_clusters,
        passed=diff < SPECTRUM_TOL and residual < RESIDUAL_TOL and bijective,
    )
    return {"trace": list(final.metrics), "row": row}


def run_oracle_compare(cfg: ExperimentConfig) -> OracleCompareReport:
    successes, failures = run_samples(cfg, oracle_compare_sample)
    rows = [result["row"] for _, result in successes]
    summary = {
        "pass_fraction": float(np.mean([row.passed for row in rows])) if rows else 0.0,
        "max_spectrum_diff": max((row.spectrum_diff for row in rows), default=None),
        "max_eigenvector_residual": max((row.eigenvector_residual for row in rows), default=None),
    }
    logger.info(f"Oracle comparison: {sum(row.passed for row in rows)} of {len(rows)} samples pass")

    return OracleCompareReport(
        experiment=cfg.experiment,
        config=cfg,
        version=__version__,
        samples_ok=len(successes),
        failures=failures,
        summary=summary,
        traces=[SampleTrace(sample_index=i, metrics=result["trace"]) for i, result in successes],
        rows=rows,
    )
