from sqlalchemy import create_engine, Column, String, Text, DateTime, Integer, Float, ForeignKey
from sqlalchemy.orm import declarative_base, sessionmaker, relationship
from sqlalchemy.sql import func
from pydantic import BaseModel, ConfigDict
from typing import List, Optional, Dict, Any
from dotenv import load_dotenv
import datetime
import uuid
import os

load_dotenv()

# SQLAlchemy setup
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SQLITE_DB_PATH = os.path.join(BASE_DIR, 'mslocal_runs.db')
DATABASE_URL = os.getenv("MSLOCAL_DATABASE_URL", f"sqlite:///{SQLITE_DB_PATH.replace(os.sep, '/')}")
engine = create_engine(DATABASE_URL, connect_args={"check_same_thread": False} if DATABASE_URL.startswith("sqlite") else {})
SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)
Base = declarative_base()

# Database dependency
def get_db():
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()

# SQLAlchemy ORM Models
class ExperimentRun(Base):
    __tablename__ = "experiment_runs"
    id = Column(String, primary_key=True, index=True)
    experiment = Column(String, index=True)  # e.g., "correlator", "percolation"
    version = Column(String)
    config_json = Column(Text)
    summary_json = Column(Text)
    num_samples = Column(Integer)
    samples_ok = Column(Integer)
    failure_fraction = Column(Float)
    output_path = Column(String, nullable=True)
    created_at = Column(DateTime, default=func.now())
    failures = relationship("RunFailure", back_populates="run", cascade="all, delete-orphan")

class RunFailure(Base):
    __tablename__ = "run_failures"
    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(String, ForeignKey("experiment_runs.id"), index=True)
    sample_index = Column(Integer)
    error_type = Column(String)
    message = Column(Text)
    run = relationship("ExperimentRun", back_populates="failures")

# Pydantic Models for API
class RunFailureResponse(BaseModel):
    sample_index: int
    error_type: str
    message: str

    model_config = ConfigDict(from_attributes=True)

class RunResponse(BaseModel):
    id: str
    experiment: str
    version: str
    num_samples: int
    samples_ok: int
    failure_fraction: float
    output_path: Optional[str] = None
    created_at: datetime.datetime
    config: Dict[str, Any]
    summary: Dict[str, Any]
    failures: List[RunFailureResponse] = []

class ExperimentResponse(BaseModel):
    run_id: Optional[str] = None
    experiment: str
    samples_ok: int
    failures: int
    summary: Dict[str, Any]
    rows: List[Dict[str, Any]]

# Helper functions
def create_tables():
    Base.metadata.create_all(bind=engine)

def generate_id():
    return str(uuid.uuid4())
