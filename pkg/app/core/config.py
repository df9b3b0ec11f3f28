import math
import os

from dotenv import load_dotenv

from app.core.log import get_logger

load_dotenv()

logger = get_logger(__name__)


def _float_setting(name: str, default: str) -> float:
    raw_value = os.getenv(name, default)
    try:
        value = float(raw_value)
    except ValueError:
        raise ValueError(f"❌ {name} must be a number, got {raw_value!r}")

    if not math.isfinite(value) or value <= 0:
        raise ValueError(f"❌ {name} must be a positive finite number, got {raw_value!r}")
    return value


def _int_setting(name: str, default: str) -> int:
    raw_value = os.getenv(name, default)
    try:
        value = int(raw_value)
    except ValueError:
        raise ValueError(f"❌ {name} must be an integer, got {raw_value!r}")

    if value < 1:
        raise ValueError(f"❌ {name} must be at least 1, got {raw_value!r}")
    return value


ENVIRONMENT = os.getenv("ENVIRONMENT", "development")
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()

# Numerical settings
JACOBIAN_STEP = _float_setting("JACOBIAN_STEP", "1e-6")
CONFORMAL_TOLERANCE = _float_setting("CONFORMAL_TOLERANCE", "1e-9")
SOLVER_TOLERANCE = _float_setting("SOLVER_TOLERANCE", "1e-10")
SOLVER_MAX_ITERATIONS = _int_setting("SOLVER_MAX_ITERATIONS", "50000")
TISSOT_LUNE_HALF_WIDTH = _float_setting("TISSOT_LUNE_HALF_WIDTH", "0.35")
DEFAULT_SURFACE = os.getenv("DEFAULT_SURFACE", "sphere").strip().lower()

# Unit equatorial radius; flattening is what distinguishes the models.
SURFACE_PRESETS = {
    "sphere": {"kind": "sphere", "radius": 1.0, "flattening": 0.0},
    "international": {"kind": "ellipsoid", "radius": 1.0, "inverse_flattening": 297.0},
    "wgs84": {"kind": "ellipsoid", "radius": 1.0, "inverse_flattening": 298.257223563},
    "clarke1880": {"kind": "ellipsoid", "radius": 1.0, "inverse_flattening": 293.465},
}

if DEFAULT_SURFACE not in SURFACE_PRESETS:
    raise ValueError(
        f"❌ DEFAULT_SURFACE must be one of {', '.join(sorted(SURFACE_PRESETS))}, got {DEFAULT_SURFACE!r}"
    )


# HTTP surface configuration
def get_allowed_origins():
    """Get allowed origins from environment variable with proper defaults"""
    origins_env = os.getenv("ALLOWED_ORIGINS", "")

    if origins_env:
        origins = [origin.strip() for origin in origins_env.split(",") if origin.strip()]
    else:
        origins = [
            "http://localhost:3000",
            "http://localhost:8000",
            "http://127.0.0.1:3000",
            "http://127.0.0.1:8000",
        ]

    logger.info("🌐 CORS allowed origins: %s", origins)
    return origins


def get_trusted_hosts():
    """Get trusted hosts from environment variable with proper defaults"""
    hosts_env = os.getenv("TRUSTED_HOSTS", "")

    if hosts_env:
        hosts = [host.strip() for host in hosts_env.split(",") if host.strip()]
    else:
        hosts = ["localhost", "127.0.0.1", "*.localhost", "testserver"]

    logger.info("🔒 Trusted hosts: %s", hosts)
    return hosts
