from typing import Any, Dict, List, Optional

from fastapi import APIRouter, HTTPException
from fastapi.responses import Response
from pydantic import ValidationError

from app.core.errors import DistortionError, RegionError
from app.models.fields import GridSpec, RegionSpec
from app.models.geo import GeoPoint
from app.models.render import GraticuleSpec, RenderOptions
from app.services.distortion_service import distortion_report
from app.services.export_service import export_csv
from app.services.field_service import sample_field
from app.services.report_service import indicatrix_payload
from app.services.svg_service import render_svg
from routes.request_helpers import (
    ProjectionRequest,
    domain_error_response,
    resolve_request_projection,
    success_response,
)

router = APIRouter()


class AnalyzeRequest(ProjectionRequest):
    lat_deg: float
    lon_deg: float = 0.0
    mode: str = "analytic"


class FieldRequest(ProjectionRequest):
    graticule: GraticuleSpec = GraticuleSpec()


class ReportRequest(ProjectionRequest):
    vertices: List[Dict[str, float]]
    center: Optional[Dict[str, float]] = None
    grid: GridSpec


@router.post("/indicatrix/analyze")
async def analyze_point(request: AnalyzeRequest):
    definition = resolve_request_projection(request)
    try:
        point = GeoPoint.from_degrees(request.lat_deg, request.lon_deg)
    except ValidationError as error:
        raise HTTPException(status_code=400, detail=str(error))

    if request.mode not in ("analytic", "numeric"):
        raise HTTPException(status_code=400, detail="Invalid mode. Allowed: analytic, numeric")

    try:
        return success_response(indicatrix_payload(definition, point, request.mode))
    except DistortionError as error:
        return domain_error_response(error, "Indicatrix analysis")


@router.post("/indicatrix/field")
async def field_csv(request: FieldRequest):
    definition = resolve_request_projection(request)
    sampled = sample_field(definition, request.graticule)
    return Response(
        content=export_csv(sampled.samples),
        media_type="text/csv",
        headers={"X-Skipped-Samples": str(sampled.skipped)},
    )


@router.post("/indicatrix/render")
async def field_svg(request: FieldRequest):
    definition = resolve_request_projection(request)
    sampled = sample_field(definition, request.graticule)
    if not sampled.samples:
        return domain_error_response(DistortionError("No graticule intersection lies in the projection's domain"), "Render")

    svg = render_svg(sampled.samples, request.graticule, RenderOptions(projection=definition))
    return Response(content=svg, media_type="image/svg+xml")


@router.post("/indicatrix/report")
async def region_report(request: ReportRequest):
    definition = resolve_request_projection(request)
    config: Dict[str, Any] = {"vertices": request.vertices, "center": request.center}
    try:
        region = RegionSpec.from_config(config)
        report = distortion_report(definition, region, request.grid)
    except ValidationError as error:
        raise HTTPException(status_code=400, detail=str(error))
    except (RegionError, DistortionError) as error:
        return domain_error_response(error, "Distortion report")

    return success_response({"report": report.model_dump()})
