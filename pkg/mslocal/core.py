from fastapi import APIRouter, HTTPException, Depends
from typing import Optional, List
from mslocal.db import crud
from mslocal.db.models import ExperimentResponse, RunResponse, get_db
from mslocal.harness import run_experiment
from mslocal.harness.schemas import ExperimentConfig
from sqlalchemy.orm import Session

import logging

# Configure logging
logger = logging.getLogger(__name__)
logging.basicConfig(level=logging.INFO)
logger.info('Loading runs api router')

# Upper bound on work done inside one request
MAX_API_SAMPLES = 200

# Create FastAPI router
runs_router = APIRouter()

# GET /api/runs
@runs_router.get("/runs", response_model=List[RunResponse])
def list_runs(
    skip: int = 0,
    limit: int = 100,
    experiment: Optional[str] = None,
    db: Session = Depends(get_db)
):
    try:
        return [crud.to_response(run) for run in crud.list_runs(db, skip=skip, limit=limit, experiment=experiment)]
    except Exception as e:
        logger.error(f"Error listing runs: {e}", exc_info=True)
        raise HTTPException(status_code=500, detail=f"Failed to list runs: {str(e)}")

# GET /api/runs/{run_id}
@runs_router.get("/runs/{run_id}", response_model=RunResponse)
def get_run(run_id: str, db: Session = Depends(get_db)):
    db_run = crud.get_run(db, run_id)
    if not db_run:
        raise HTTPException(status_code=404, detail="Run not found")
    return crud.to_response(db_run)

# DELETE /api/runs/{run_id}
@runs_router.delete("/runs/{run_id}")
def delete_run(run_id: str, db: Session = Depends(get_db)):
    if not crud.delete_run(db, run_id):
        raise HTTPException(status_code=404, detail="Run not found")
    return {"deleted": run_id}

# POST /api/experiments
@runs_router.post("/experiments", response_model=ExperimentResponse)
def create_experiment(cfg: ExperimentConfig, db: Session = Depends(get_db)):
    if cfg.num_samples > MAX_API_SAMPLES:
        raise HTTPException(status_code=422, detail=f"num_samples is limited to {MAX_API_SAMPLES} over HTTP")
    try:
        report = run_experiment(cfg.model_copy(update={"workers": 1}))
        db_run = crud.create_run(db, report)
        return ExperimentResponse(
            run_id=db_run.id,
            experiment=report.experiment.value,
            samples_ok=report.samples_ok,
            failures=len(report.failures),
            summary=crud.finite_summary(report.summary),
            rows=report.table(),
        )
    except Exception as e:
        logger.error(f"Error running experiment {cfg.experiment.value}: {e}", exc_info=True)
        raise HTTPException(status_code=500, detail=f"Failed to run experiment: {str(e)}")
