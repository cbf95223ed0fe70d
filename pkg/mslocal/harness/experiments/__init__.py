from .correlator import run_correlator_experiment
from .percolation import run_percolation_experiment
from .convergence import run_convergence_experiment
from .volume import run_volume_convergence_experiment
from .gaps import run_gap_experiment
from .oracle_compare import run_oracle_compare
