from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from mslocal.numerics.driver import DEFAULT_MAX_STEPS, DEFAULT_OFF_DIAG_TOL, StepMetrics
from mslocal.numerics.model import DisorderConfig


class ExperimentKind(str, Enum):
    CORRELATOR = "correlator"
    PERCOLATION = "percolation"
    CONVERGENCE = "convergence"
    VOLUME_CONVERGENCE = "volume_convergence"
    ORACLE_COMPARE = "oracle_compare"
    GAPS = "gaps"


# Schemas for experiment configuration
class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    experiment: ExperimentKind
    dims: List[int] = Field(default_factory=lambda: [32])
    j0: float = Field(0.05, ge=0)
    disorder: DisorderConfig = Field(default_factory=DisorderConfig)
    master_seed: int = 0
    num_samples: int = Field(100, ge=1)
    delta: Optional[float] = Field(None, gt=0)
    M: Optional[float] = Field(None, gt=0)
    epsilon: Optional[float] = Field(None, ge=0)
    tol: float = Field(DEFAULT_OFF_DIAG_TOL, gt=0)
    max_steps: int = Field(DEFAULT_MAX_STEPS, ge=0)
    kappa: float = Field(0.25, gt=0)
    volumes: List[int] = Field(default_factory=lambda: [8, 12, 16, 20, 24])
    propagator_times: List[float] = Field(default_factory=list)
    cross_check: bool = True
    workers: int = Field(1, ge=1)
    failure_threshold: float = Field(0.0, ge=0, le=1)
    output: Optional[str] = None

    @field_validator("dims")
    @classmethod
    def _check_dims(cls, dims):
        if not dims or any(n < 1 for n in dims):
            raise ValueError(f"dims must be a non-empty list of positive integers, got {dims}")
        return dims

    @field_validator("volumes")
    @classmethod
    def _check_volumes(cls, volumes):
        if not volumes or any(k < 1 for k in volumes):
            raise ValueError(f"volumes must be positive half-widths, got {volumes}")
        return sorted(set(volumes))

    @model_validator(mode="after")
    def _check_experiment(self):
        if self.experiment is ExperimentKind.VOLUME_CONVERGENCE and len(self.dims) not in (1, 2):
            raise ValueError("volume convergence runs in one or two dimensions")
        if "master_seed" not in self.disorder.model_fields_set:
            self.disorder = self.disorder.model_copy(update={"master_seed": self.master_seed})
        elif self.disorder.master_seed != self.master_seed:
            raise ValueError(
                f"disorder.master_seed={self.disorder.master_seed} disagrees with master_seed={self.master_seed}; "
                "set the seed once at the top level"
            )
        return self

    @property
    def disorder_config(self) -> DisorderConfig:
        """Disorder distribution keyed by the run's master seed."""
        return self.disorder


# Schemas for sample bookkeeping
class SampleFailure(BaseModel):
    sample_index: int
    error_type: str
    message: str


class SampleTrace(BaseModel):
    sample_index: int
    metrics: List[StepMetrics]


# Report rows
class CorrelatorRow(BaseModel):
    distance: int
    mean: float
    stderr: float
    tail_threshold: float
    tail_frequency: float
    kappa_bound: float
    pairs: int
    samples: int
    propagator_sup: Optional[float] = None


class PercolationRow(BaseModel):
    step: int
    distance: int
    frequency: float = Field(ge=0, le=1)
    stderr: float
    hits: int
    trials: int


class ConvergenceRow(BaseModel):
    step: int
    scale_length: float
    median_max_offdiag: float
    geomean_max_offdiag: float
    predicted_bound: float
    ratio: float
    samples: int


class VolumeRow(BaseModel):
    half_width: int
    energy_diff: float
    energy_stderr: float
    eigenfunction_diff: float
    eigenfunction_stderr: float
    samples: int


class GapRow(BaseModel):
    sample_index: int
    min_gap: float
    steps_used: int


class OracleCompareRow(BaseModel):
    sample_index: int
    spectrum_diff: float
    eigenvector_residual: float
    oracle_residual: float
    orth_residual: float
    labels_bijective: bool
    steps_used: int
    cleanup_clusters: int
    passed: bool


# Reports
class ExperimentReport(BaseModel):
    experiment: ExperimentKind
    config: ExperimentConfig
    version: str
    samples_ok: int
    failures: List[SampleFailure] = []
    summary: Dict[str, Optional[float]] = {}
    traces: List[SampleTrace] = []

    @property
    def failure_fraction(self) -> float:
        total = self.samples_ok + len(self.failures)
        return len(self.failures) / total if total else 0.0

    def table(self) -> List[dict]:
        return [row.model_dump() for row in getattr(self, "rows", [])]


class CorrelatorReport(ExperimentReport):
    rows: List[CorrelatorRow] = []


class PercolationReport(ExperimentReport):
    rows: List[PercolationRow] = []
    block_snapshots: List[dict] = []


class ConvergenceReport(ExperimentReport):
    rows: List[ConvergenceRow] = []


class VolumeConvergenceReport(ExperimentReport):
    rows: List[VolumeRow] = []


class GapReport(ExperimentReport):
    rows: List[GapRow] = []


class OracleCompareReport(ExperimentReport):
    rows: List[OracleCompareRow] = []
