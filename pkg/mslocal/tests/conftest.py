import os
import tempfile

# keep the ledger created on app import out of the package directory
os.environ.setdefault(
    "MSLOCAL_DATABASE_URL", f"sqlite:///{os.path.join(tempfile.gettempdir(), 'mslocal_test_runs.db')}"
)
os.environ.setdefault("MSLOCAL_API_KEY", "test-api-key")

import numpy as np
import pytest
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker
from sqlalchemy.pool import StaticPool

from mslocal.db.models import Base
from mslocal.numerics.lattice import LatticeGeometry
from mslocal.numerics.model import build_hamiltonian


@pytest.fixture
def chain10():
    return LatticeGeometry((10,))


@pytest.fixture
def two_site_nonresonant():
    return build_hamiltonian(LatticeGeometry((2,)), [0.0, 1.0], 0.01)


@pytest.fixture
def two_site_resonant():
    return build_hamiltonian(LatticeGeometry((2,)), [0.5, 0.5], 0.01)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def db_session():
    engine = create_engine("sqlite://", connect_args={"check_same_thread": False}, poolclass=StaticPool)
    Base.metadata.create_all(bind=engine)
    Session = sessionmaker(autocommit=False, autoflush=False, bind=engine)
    db = Session()
    try:
        yield db
    finally:
        db.close()
