"""JSON-ready payloads shared by the HTTP routes and the command line."""

import math
from typing import Any, Dict

import numpy as np

from app.core.errors import DistortionError
from app.models.fields import BoundaryCheck, ChebyshevResult, DarbouxConic
from app.models.geo import GeoPoint
from app.models.planar import Characteristics
from app.models.projection import ProjectionDef
from app.services.indicatrix_service import distortion_ellipse, parallelogram_ratios, principal_tangents
from app.services.projection_service import project


def indicatrix_payload(definition: ProjectionDef, p: GeoPoint, mode: str = "analytic") -> Dict[str, Any]:
    plane = project(definition, p)
    indicatrix = distortion_ellipse(definition, p, mode)
    tangents = principal_tangents(definition, p)

    payload = {
        "projection": definition.metadata(),
        "point": {"lat_deg": p.lat_deg, "lon_deg": p.lon_deg},
        "plane": {"x": plane.x, "y": plane.y},
        "indicatrix": indicatrix.model_dump(),
        "lambda": indicatrix.lam,
        "principal_tangents": tangents.model_dump(),
        "magnification": math.sqrt(indicatrix.area_scale) if indicatrix.non_unique else None,
    }

    try:
        ratios = parallelogram_ratios(definition, definition.surface, p)
        payload["parallelogram"] = {**ratios.model_dump(), "meridian_scale": ratios.meridian_scale, "parallel_scale": ratios.parallel_scale}
    except DistortionError:
        payload["parallelogram"] = None
    return payload


def chebyshev_payload(result: ChebyshevResult) -> Dict[str, Any]:
    u = result.u.masked_values()
    magnification = result.magnification.masked_values()
    grid = result.u.grid
    centre = None
    try:
        centre = result.u.value_at(0.5 * (grid.x_min + grid.x_max), 0.5 * (grid.y_min + grid.y_max))
    except DistortionError:
        pass

    return {
        "boundary_value": result.boundary_value,
        "boundary_mode": result.boundary_mode,
        "iterations": result.iterations,
        "residual": result.residual,
        "relaxation": result.relaxation,
        "unknowns": result.unknowns,
        "nodes": result.u.node_count,
        "u_min": float(np.min(u)),
        "u_max": float(np.max(u)),
        "u_centre": None if centre is None or math.isnan(centre) else centre,
        "magnification_min": float(np.min(magnification)),
        "magnification_max": float(np.max(magnification)),
    }


def darboux_payload(conic: DarbouxConic, check: BoundaryCheck) -> Dict[str, Any]:
    return {
        "conic": {**conic.model_dump(), "base": conic.base},
        "boundary_check": check.model_dump(),
    }


def characteristics_payload(chars: Characteristics) -> Dict[str, Any]:
    return {**chars.model_dump(), "mu_abs": chars.mu_abs}
