from typing import Any, Dict, Optional, Union

from fastapi import HTTPException
from fastapi.encoders import jsonable_encoder
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ValidationError

from app.core.config import DEFAULT_SURFACE
from app.core.errors import ConvergenceError, DistortionError, ExpressionParseError
from app.core.log import get_logger
from app.models.geo import GeoPoint, Surface
from app.models.projection import ProjectionDef
from app.services.projection_service import projection_from_config, resolve_projection

logger = get_logger(__name__)


class ProjectionRequest(BaseModel):
    projection: Union[str, Dict[str, Any]] = "plate_carree"
    surface: Optional[Union[str, Dict[str, Any]]] = None
    center_lat_deg: float = 0.0
    center_lon_deg: float = 0.0


def resolve_surface(surface: Optional[Union[str, Dict[str, Any]]]) -> Surface:
    try:
        if surface is None:
            return Surface.preset(DEFAULT_SURFACE)
        if isinstance(surface, str):
            return Surface.preset(surface)
        return Surface.from_config(surface)
    except ValueError as error:
        raise HTTPException(status_code=400, detail=f"Invalid surface: {error}")


def resolve_request_projection(request: ProjectionRequest) -> ProjectionDef:
    """Catalog name, inline 'x = ...; y = ...' text, or a projection config object. File paths are not accepted."""
    surface = resolve_surface(request.surface)
    try:
        center = GeoPoint.from_degrees(request.center_lat_deg, request.center_lon_deg)
        if isinstance(request.projection, dict):
            return projection_from_config(request.projection, surface)
        return resolve_projection(request.projection, surface, center, allow_files=False)
    except ExpressionParseError as error:
        raise HTTPException(status_code=400, detail={"error": str(error), "position": error.position})
    except (ValidationError, ValueError) as error:
        if isinstance(error, DistortionError):
            raise
        raise HTTPException(status_code=400, detail=str(error))


def domain_error_response(error: Exception, action: str) -> JSONResponse:
    """422 for domain and convergence errors, the way the API has always reported failures."""
    logger.warning("❌ %s failed: %s", action, error)
    content = {"success": False, "error": str(error), "error_type": type(error).__name__}
    if isinstance(error, ConvergenceError):
        content.update({"residual": error.residual, "iterations": error.iterations})
    return JSONResponse(status_code=422, content=jsonable_encoder(content))


def success_response(payload: Dict[str, Any]) -> JSONResponse:
    return JSONResponse(content=jsonable_encoder({"success": True, **payload}))
