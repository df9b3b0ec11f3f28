from typing import Any, Dict

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, ValidationError

from app.core.errors import DistortionError, ExpressionParseError
from app.models.planar import RectanglePair
from app.services.quasiconformal_service import (
    characteristics,
    default_grid,
    grotzsch_affine,
    grotzsch_experiment,
    planar_map_from_config,
    sup_dilatation,
)
from app.services.report_service import characteristics_payload
from routes.request_helpers import domain_error_response, success_response

router = APIRouter()

MAX_TRIALS = 1000


class CharacteristicsRequest(BaseModel):
    map: Dict[str, Any]
    x: float
    y: float


class DilatationRequest(BaseModel):
    map: Dict[str, Any]
    nodes: int = 21


class GrotzschRequest(BaseModel):
    src: str = "1x1"
    dst: str = "2x1"
    trials: int = 100
    seed: int = 42


def load_map(config: Dict[str, Any]):
    try:
        return planar_map_from_config(config)
    except ExpressionParseError as error:
        raise HTTPException(status_code=400, detail={"error": str(error), "position": error.position})
    except (ValidationError, ValueError, TypeError) as error:
        raise HTTPException(status_code=400, detail=f"Invalid map: {error}")


@router.post("/qc/characteristics")
async def map_characteristics(request: CharacteristicsRequest):
    planar_map = load_map(request.map)
    try:
        return success_response({"characteristics": characteristics_payload(characteristics(planar_map, request.x, request.y))})
    except DistortionError as error:
        return domain_error_response(error, "Characteristics")


@router.post("/qc/sup-dilatation")
async def map_sup_dilatation(request: DilatationRequest):
    planar_map = load_map(request.map)
    try:
        grid = default_grid(planar_map.domain, request.nodes)
        return success_response({"sup_dilatation": sup_dilatation(planar_map, grid), "nodes": request.nodes})
    except ValidationError as error:
        raise HTTPException(status_code=400, detail=str(error))
    except DistortionError as error:
        return domain_error_response(error, "Sup dilatation")


@router.post("/qc/grotzsch")
async def grotzsch(request: GrotzschRequest):
    if not 1 <= request.trials <= MAX_TRIALS:
        raise HTTPException(status_code=400, detail=f"trials must be between 1 and {MAX_TRIALS}")
    try:
        pair = RectanglePair.parse(request.src, request.dst)
    except (ValidationError, ValueError) as error:
        raise HTTPException(status_code=400, detail=str(error))

    _, affine_k = grotzsch_affine(pair)
    report = grotzsch_experiment(pair, request.trials, request.seed)
    return success_response({"K": affine_k, "experiment": report.summary()})
