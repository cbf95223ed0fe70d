from .lattice import ContractedMetricView, LatticeGeometry, contracted_distance, l1_distance, pairs_in_shell
from .model import DisorderConfig, DisorderKind, Hamiltonian, build_hamiltonian, sample_potential
from .blocks import (
    BlockRegistry,
    ResonanceParams,
    ResonantBlock,
    classify_and_collar,
    detect_resonant_pairs_step1,
    detect_resonances_step_k,
    form_blocks,
    same_block,
)
from .rotor import (
    Generator,
    OrthogonalRotation,
    accumulate,
    build_generator,
    conjugate,
    jacobi_block_diagonalize,
    orthogonal_exp,
)
from .driver import (
    FinalDiagonalization,
    Schedule,
    ScaleState,
    StepMetrics,
    assign_labels,
    perform_step,
    run_to_convergence,
    scale_length,
    split_interaction,
)
from .oracle import EigenDecomposition, dense_jacobi_eigensolve, exact_correlator, min_gap, spectrum_compare
