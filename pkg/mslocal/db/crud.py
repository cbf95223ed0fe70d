from sqlalchemy.orm import Session
from typing import List, Optional
import json
import math

from mslocal.harness.schemas import ExperimentReport
from . import models


def finite_summary(summary: dict) -> dict:
    """Summary with non-finite values replaced by None so it stores as strict JSON."""
    return {k: (v if v is None or math.isfinite(v) else None) for k, v in summary.items()}


# Experiment run CRUD operations
def create_run(db: Session, report: ExperimentReport, output_path: Optional[str] = None) -> models.ExperimentRun:
    """Record a finished experiment and its sample failures in the ledger"""
    db_run = models.ExperimentRun(
        id=models.generate_id(),
        experiment=report.experiment.value,
        version=report.version,
        config_json=report.config.model_dump_json(),
        summary_json=json.dumps(finite_summary(report.summary)),
        num_samples=report.config.num_samples,
        samples_ok=report.samples_ok,
        failure_fraction=report.failure_fraction,
        output_path=output_path,
    )
    for failure in report.failures:
        db_run.failures.append(
            models.RunFailure(
                sample_index=failure.sample_index,
                error_type=failure.error_type,
                message=failure.message,
            )
        )

    db.add(db_run)
    db.commit()
    db.refresh(db_run)
    return db_run

def get_run(db: Session, run_id: str) -> Optional[models.ExperimentRun]:
    """Get an experiment run by ID"""
    return db.query(models.ExperimentRun).filter(models.ExperimentRun.id == run_id).first()

def list_runs(
    db: Session,
    skip: int = 0,
    limit: int = 100,
    experiment: Optional[str] = None
) -> List[models.ExperimentRun]:
    """
    List recorded runs, newest first.
    Args:
        db: SQLAlchemy Session
        skip: Number of runs to skip
        limit: Maximum number of runs to return
        experiment: Only return runs of this experiment kind
    Returns:
        List of ExperimentRun objects
    """
    query = db.query(models.ExperimentRun)
    if experiment:
        query = query.filter(models.ExperimentRun.experiment == experiment)
    return query.order_by(models.ExperimentRun.created_at.desc()).offset(skip).limit(limit).all()

def delete_run(db: Session, run_id: str) -> bool:
    """Delete a run and its failures"""
    db_run = get_run(db, run_id)
    if not db_run:
        return False
    db.delete(db_run)
    db.commit()
    return True

def to_response(db_run: models.ExperimentRun) -> models.RunResponse:
    return models.RunResponse(
        id=db_run.id,
        experiment=db_run.experiment,
        version=db_run.version,
        num_samples=db_run.num_samples,
        samples_ok=db_run.samples_ok,
        failure_fraction=db_run.failure_fraction,
        output_path=db_run.output_path,
        created_at=db_run.created_at,
        config=json.loads(db_run.config_json),
        summary=json.loads(db_run.summary_json),
        failures=[models.RunFailureResponse.model_validate(f) for f in db_run.failures],
    )
