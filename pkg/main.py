from fastapi import FastAPI

from app.core.config import ENVIRONMENT, LOG_LEVEL
from app.core.log import get_logger, setup_logging
from app.core.middleware import setup_middleware
from app.models.projection import CATALOG_KINDS
from routes.indicatrix import router as indicatrix_router
from routes.optimisation import router as optimisation_router
from routes.quasiconformal import router as quasiconformal_router

VERSION = "1.0.0"

setup_logging(LOG_LEVEL)
logger = get_logger(__name__)

app = FastAPI(
    title="Tissot Distortion API",
    description="Map projection distortion analysis: indicatrix fields, distortion minimization and quasiconformal dilatation",
    version=VERSION,
)
setup_middleware(app)

app.include_router(indicatrix_router, prefix="/api", tags=["Indicatrix"])
app.include_router(optimisation_router, prefix="/api", tags=["Distortion Optimisation"])
app.include_router(quasiconformal_router, prefix="/api", tags=["Quasiconformal Analysis"])

logger.info("✅ Tissot Distortion API ready (%s)", ENVIRONMENT)


@app.get("/")
def root():
    return {
        "message": "Tissot Distortion API is running",
        "version": VERSION,
        "projections": [kind.value for kind in CATALOG_KINDS],
    }


@app.get("/health")
def health_check():
    return {"status": "healthy", "service": "tissot-distortion-api", "version": VERSION}
