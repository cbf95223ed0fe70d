from typing import Callable, Dict

from mslocal.harness.experiments import (
    run_convergence_experiment,
    run_correlator_experiment,
    run_gap_experiment,
    run_oracle_compare,
    run_percolation_experiment,
    run_volume_convergence_experiment,
)
from mslocal.harness.schemas import ExperimentConfig, ExperimentKind, ExperimentReport

EXPERIMENTS: Dict[ExperimentKind, Callable[[ExperimentConfig], ExperimentReport]] = {
    ExperimentKind.CORRELATOR: run_correlator_experiment,
    ExperimentKind.PERCOLATION: run_percolation_experiment,
    ExperimentKind.CONVERGENCE: run_convergence_experiment,
    ExperimentKind.VOLUME_CONVERGENCE: run_volume_convergence_experiment,
    ExperimentKind.ORACLE_COMPARE: run_oracle_compare,
    ExperimentKind.GAPS: run_gap_experiment,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    return EXPERIMENTS[cfg.experiment](cfg)
