from fastapi import FastAPI, Depends, HTTPException, status
from fastapi.middleware.cors import CORSMiddleware
from fastapi.security import APIKeyHeader
from dotenv import load_dotenv
from mslocal import __version__
from mslocal.core import runs_router
from mslocal.db.models import create_tables
from typing import List
import logging
import os

load_dotenv()

logger = logging.getLogger(__name__)

API_KEY_NAME = "X-API-Key"
DEFAULT_ALLOWED_ORIGINS = "http://localhost:3000,http://127.0.0.1:3000"


def required_api_key() -> str:
    """The service refuses to start without MSLOCAL_API_KEY."""
    key = os.getenv("MSLOCAL_API_KEY", "").strip()
    if not key:
        raise RuntimeError("MSLOCAL_API_KEY is not set; export it or add it to .env before starting the service")
    return key


def allowed_origins() -> List[str]:
    raw = os.getenv("MSLOCAL_ALLOWED_ORIGINS", DEFAULT_ALLOWED_ORIGINS)
    origins = [origin.strip() for origin in raw.split(",") if origin.strip()]
    if "*" in origins:
        raise RuntimeError("MSLOCAL_ALLOWED_ORIGINS must list explicit origins, not '*'")
    logger.info(f"CORS origins: {origins}")
    return origins


# Configuration
API_KEY = required_api_key()

app = FastAPI(title="mslocal runs", version=__version__, docs_url="/api/docs", redoc_url="/api/redoc")

# CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=allowed_origins(),
    allow_credentials=False,
    allow_methods=["GET", "POST", "DELETE"],
    allow_headers=[API_KEY_NAME, "Content-Type"],
)

# API Key validation
api_key_header = APIKeyHeader(name=API_KEY_NAME, auto_error=False)

async def verify_api_key(api_key: str = Depends(api_key_header)):
    if api_key != API_KEY:
        raise HTTPException(
            status_code=status.HTTP_403_FORBIDDEN,
            detail="Invalid API Key",
        )
    return api_key

# DB init
create_tables()

# Mount routers with API key protection
app.include_router(runs_router, prefix="/api", dependencies=[Depends(verify_api_key)])

@app.get("/")
def root():
    return {"status": "mslocal runs service running", "version": __version__}

@app.get("/health")
async def health_check():
    return {"status": "healthy"}


if __name__ == "__main__":
    import uvicorn
    port = int(os.getenv("PORT", 8000))
    uvicorn.run("mslocal.main:app", host="0.0.0.0", port=port)
