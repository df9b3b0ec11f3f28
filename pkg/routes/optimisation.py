import math
from typing import Dict, List, Optional

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, ValidationError

from app.core.errors import ConvergenceError, DistortionError
from app.models.fields import GridSpec, PlanarRegion, RegionSpec
from app.services.chebyshev_service import CROSSING, chebyshev_solve
from app.services.darboux_service import ellipse_boundary_check, fit_darboux_conic
from app.services.distortion_service import planar_lambda_field
from app.services.report_service import chebyshev_payload, darboux_payload
from app.services.surface_service import gaussian_curvature, principal_radii
from routes.request_helpers import (
    ProjectionRequest,
    domain_error_response,
    resolve_request_projection,
    resolve_surface,
    success_response,
)

router = APIRouter()

MAX_SOLVER_NODES = 257


class ChebyshevRequest(BaseModel):
    vertices: Optional[List[Dict[str, float]]] = None
    disk_radius: float = 1.0
    nodes: int = 65
    curvature: Optional[float] = None
    boundary_value: float = 0.0
    boundary_mode: str = CROSSING
    surface: Optional[str] = None
    central_lat_deg: float = 0.0


class DarbouxRequest(ProjectionRequest):
    vertices: List[Dict[str, float]]
    center: Optional[Dict[str, float]] = None
    nodes: int = 41
    level: Optional[float] = None


@router.post("/optimisation/chebyshev")
async def solve_chebyshev(request: ChebyshevRequest):
    if not 3 <= request.nodes <= MAX_SOLVER_NODES:
        raise HTTPException(status_code=400, detail=f"nodes must be between 3 and {MAX_SOLVER_NODES}")

    try:
        if request.vertices:
            region = PlanarRegion.from_config({"vertices": request.vertices})
        else:
            region = PlanarRegion.disk(request.disk_radius)
        grid = GridSpec.covering(region.polygon(), request.nodes)
    except (ValidationError, ValueError) as error:
        raise HTTPException(status_code=400, detail=str(error))

    surface = resolve_surface(request.surface)
    curvature = request.curvature
    if curvature is None:
        curvature = gaussian_curvature(surface, math.radians(request.central_lat_deg))

    try:
        result = chebyshev_solve(
            region,
            grid,
            curvature=curvature,
            boundary_value=request.boundary_value,
            boundary_mode=request.boundary_mode,
        )
    except (DistortionError, ConvergenceError) as error:
        return domain_error_response(error, "Chebyshev solve")
    except ValueError as error:
        raise HTTPException(status_code=400, detail=str(error))

    return success_response({"solution": chebyshev_payload(result), "curvature": curvature})


@router.post("/optimisation/darboux")
async def fit_darboux(request: DarbouxRequest):
    definition = resolve_request_projection(request)
    try:
        region = RegionSpec.from_config({"vertices": request.vertices, "center": request.center})
    except ValidationError as error:
        raise HTTPException(status_code=400, detail=str(error))

    try:
        field = planar_lambda_field(definition, region, request.nodes)
        radius_m, radius_n = principal_radii(definition.surface, region.center.lat)
        conic = fit_darboux_conic(field, radius_m, radius_n)
        level = request.level if request.level is not None else float(field.masked_values().max())
        check = ellipse_boundary_check(conic, level)
    except DistortionError as error:
        return domain_error_response(error, "Darboux fit")

    return success_response(darboux_payload(conic, check))
