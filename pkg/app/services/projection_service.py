import json
import math
import os
import warnings
from typing import Any, Dict, Optional, Tuple

from app.core.config import TISSOT_LUNE_HALF_WIDTH
from app.core.errors import DegeneratePointError, OutOfDomainError
from app.core.log import get_logger
from app.models.distortion import Jacobian2
from app.models.geo import HALF_PI, GeoPoint, PlanePoint, Surface, normalize_longitude
from app.models.projection import CATALOG_KINDS, PROJECTION_VARIABLES, ProjectionDef, ProjectionKind
from app.services.surface_service import meridian_arc, meridian_radius, parallel_radius
from app.utils.expression_parser import compile_expression, format_expression, parse_assignments

logger = get_logger(__name__)

MERCATOR_POLE_MARGIN = 1e-12
STEREOGRAPHIC_ANTIPODE_MARGIN = 1e-12
CASSINI_SINGULAR_MARGIN = 1e-14


def _offset(definition: ProjectionDef, p: GeoPoint) -> Tuple[float, float]:
    """(l, m): latitude and longitude measured from the mean meridian."""
    return p.lat, normalize_longitude(p.lon - definition.center.lon)


def _check_mercator(l: float):
    if abs(l) >= HALF_PI - MERCATOR_POLE_MARGIN:
        raise OutOfDomainError(f"Mercator is undefined at the poles (lat={math.degrees(l):.6f}°)")


def _stereographic_denominator(definition: ProjectionDef, l: float, m: float) -> float:
    lat0 = definition.center.lat
    denominator = 1.0 + math.sin(lat0) * math.sin(l) + math.cos(lat0) * math.cos(l) * math.cos(m)
    if denominator <= STEREOGRAPHIC_ANTIPODE_MARGIN:
        raise OutOfDomainError("Stereographic projection is undefined at the antipode of its center")
    return denominator


def _check_tissot_lune(m: float):
    if abs(m) > HALF_PI:
        raise OutOfDomainError(f"Tissot projection needs |m| <= 90°, got {math.degrees(m):.6f}°")
    if abs(m) > TISSOT_LUNE_HALF_WIDTH:
        warnings.warn(
            f"⚠️ |m| = {abs(m):.4f} rad exceeds the lune half-width {TISSOT_LUNE_HALF_WIDTH} rad; "
            "the truncated series is unreliable here",
            RuntimeWarning,
            stacklevel=3,
        )


def _custom_expressions(definition: ProjectionDef):
    return (
        compile_expression(definition.expressions["x"], PROJECTION_VARIABLES),
        compile_expression(definition.expressions["y"], PROJECTION_VARIABLES),
    )


def tissot_projection(surface: Surface, center_lat: float, p: GeoPoint, center_lon: float = 0.0) -> PlanePoint:
    """
    Tissot's second-order projection about the central point.

    x = s + r m^2 sin(l) / 2 and y = r m (1 + m^2 cos(2l) / 6) where s is the
    meridian arc from the central parallel and r the radius of the parallel.
    x runs along the mean meridian, y along the parallel.
    """
    l, m = p.lat, normalize_longitude(p.lon - center_lon)
    _check_tissot_lune(m)

    s = meridian_arc(surface, center_lat, l)
    r = parallel_radius(surface, l)
    x = s + 0.5 * r * m * m * math.sin(l)
    y = r * m * (1.0 + m * m * math.cos(2.0 * l) / 6.0)
    return PlanePoint(x=x, y=y)


def project(definition: ProjectionDef, p: GeoPoint) -> PlanePoint:
    surface = definition.surface
    radius = surface.equatorial_radius
    l, m = _offset(definition, p)
    kind = definition.kind

    if kind == ProjectionKind.PLATE_CARREE:
        return PlanePoint(x=radius * m, y=meridian_arc(surface, 0.0, l))

    if kind == ProjectionKind.MERCATOR:
        _check_mercator(l)
        return PlanePoint(x=radius * m, y=radius * math.log(math.tan(0.25 * math.pi + 0.5 * l)))

    if kind == ProjectionKind.SINUSOIDAL:
        return PlanePoint(x=radius * m * math.cos(l), y=radius * l)

    if kind == ProjectionKind.CASSINI:
        b = max(-1.0, min(1.0, math.cos(l) * math.sin(m)))
        return PlanePoint(
            x=radius * math.asin(b),
            y=radius * math.atan2(math.sin(l), math.cos(l) * math.cos(m)),
        )

    if kind == ProjectionKind.STEREOGRAPHIC:
        lat0 = definition.center.lat
        k = 2.0 * radius / _stereographic_denominator(definition, l, m)
        return PlanePoint(
            x=k * math.cos(l) * math.sin(m),
            y=k * (math.cos(lat0) * math.sin(l) - math.sin(lat0) * math.cos(l) * math.cos(m)),
        )

    if kind == ProjectionKind.TISSOT:
        return tissot_projection(surface, definition.center.lat, p, definition.center.lon)

    x_expr, y_expr = _custom_expressions(definition)
    return PlanePoint(x=radius * x_expr.value(l, m), y=radius * y_expr.value(l, m))


def analytic_partials(definition: ProjectionDef, p: GeoPoint) -> Jacobian2:
    """Closed-form partial derivatives of project() with respect to l and m."""
    surface = definition.surface
    radius = surface.equatorial_radius
    l, m = _offset(definition, p)
    kind = definition.kind
    sin_l, cos_l = math.sin(l), math.cos(l)
    sin_m, cos_m = math.sin(m), math.cos(m)

    if kind == ProjectionKind.PLATE_CARREE:
        return Jacobian2(dxdl=0.0, dxdm=radius, dydl=meridian_radius(surface, l), dydm=0.0)

    if kind == ProjectionKind.MERCATOR:
        _check_mercator(l)
        return Jacobian2(dxdl=0.0, dxdm=radius, dydl=radius / cos_l, dydm=0.0)

    if kind == ProjectionKind.SINUSOIDAL:
        return Jacobian2(dxdl=-radius * m * sin_l, dxdm=radius * cos_l, dydl=radius, dydm=0.0)

    if kind == ProjectionKind.CASSINI:
        b = cos_l * sin_m
        one_minus_b2 = 1.0 - b * b
        if one_minus_b2 <= CASSINI_SINGULAR_MARGIN:
            raise DegeneratePointError("Cassini projection is singular 90° from the central meridian on the equator")
        root = math.sqrt(one_minus_b2)
        return Jacobian2(
            dxdl=-radius * sin_l * sin_m / root,
            dxdm=radius * cos_l * cos_m / root,
            dydl=radius * cos_m / one_minus_b2,
            dydm=radius * sin_l * cos_l * sin_m / one_minus_b2,
        )

    if kind == ProjectionKind.STEREOGRAPHIC:
        lat0 = definition.center.lat
        sin_0, cos_0 = math.sin(lat0), math.cos(lat0)
        d = _stereographic_denominator(definition, l, m)
        d_l = sin_0 * cos_l - cos_0 * sin_l * cos_m
        d_m = -cos_0 * cos_l * sin_m
        k = 2.0 * radius / d
        k_l = -2.0 * radius * d_l / (d * d)
        k_m = -2.0 * radius * d_m / (d * d)
        north = cos_0 * sin_l - sin_0 * cos_l * cos_m
        return Jacobian2(
            dxdl=k_l * cos_l * sin_m - k * sin_l * sin_m,
            dxdm=k_m * cos_l * sin_m + k * cos_l * cos_m,
            dydl=k_l * north + k * (cos_0 * cos_l + sin_0 * sin_l * cos_m),
            dydm=k_m * north + k * sin_0 * cos_l * sin_m,
        )

    if kind == ProjectionKind.TISSOT:
        _check_tissot_lune(m)
        radius_m = meridian_radius(surface, l)
        r = parallel_radius(surface, l)
        r_l = -radius_m * sin_l
        m2 = m * m
        series = 1.0 + m2 * math.cos(2.0 * l) / 6.0
        return Jacobian2(
            dxdl=radius_m + 0.5 * m2 * (r_l * sin_l + r * cos_l),
            dxdm=r * m * sin_l,
            dydl=r_l * m * series - r * m * m2 * math.sin(2.0 * l) / 3.0,
            dydm=r * (1.0 + 0.5 * m2 * math.cos(2.0 * l)),
        )

    x_expr, y_expr = _custom_expressions(definition)
    return Jacobian2(
        dxdl=radius * x_expr.partial(0, l, m),
        dxdm=radius * x_expr.partial(1, l, m),
        dydl=radius * y_expr.partial(0, l, m),
        dydm=radius * y_expr.partial(1, l, m),
    )


def parse_custom_projection(
    config: str,
    surface: Optional[Surface] = None,
    center: Optional[GeoPoint] = None,
    projection_id: str = "custom",
) -> ProjectionDef:
    """Build a custom projection from text such as 'x = m*cos(l); y = l'."""
    trees = parse_assignments(config, ("x", "y"), PROJECTION_VARIABLES)
    return ProjectionDef(
        id=projection_id,
        kind=ProjectionKind.CUSTOM,
        center=center or GeoPoint(lat=0.0, lon=0.0),
        surface=surface or Surface.sphere(),
        expressions={name: format_expression(tree) for name, tree in trees.items()},
    )


def serialize_custom_projection(definition: ProjectionDef) -> str:
    if definition.kind != ProjectionKind.CUSTOM:
        raise ValueError(f"{definition.kind.value} is a catalog projection and has no expressions")
    return f"x = {definition.expressions['x']}; y = {definition.expressions['y']}"


def projection_from_config(config: Dict[str, Any], surface: Optional[Surface] = None) -> ProjectionDef:
    """Build from {id, kind, center: {lat_deg, lon_deg}, surface: {...}, expressions?: {x, y}}."""
    if not isinstance(config, dict):
        raise ValueError("projection config must be a JSON object")

    if config.get("surface") is not None:
        surface = Surface.from_config(config["surface"])
    center = GeoPoint.from_config(config.get("center") or {})
    kind = ProjectionKind(config.get("kind", "custom" if config.get("expressions") else ""))
    projection_id = str(config.get("id", kind.value))

    expressions = config.get("expressions")
    if kind == ProjectionKind.CUSTOM:
        if not isinstance(expressions, dict):
            raise ValueError("custom projections need an 'expressions' object with x and y")
        text = f"x = {expressions.get('x', '')}; y = {expressions.get('y', '')}"
        return parse_custom_projection(text, surface, center, projection_id)

    return ProjectionDef(
        id=projection_id,
        kind=kind,
        center=center,
        surface=surface or Surface.sphere(),
    )


def resolve_projection(
    name: str,
    surface: Optional[Surface] = None,
    center: Optional[GeoPoint] = None,
    allow_files: bool = True,
) -> ProjectionDef:
    """
    Resolve a catalog name, a .json config path, or inline 'x = ...; y = ...' text.

    With allow_files=False the filesystem is never touched and any path is an
    unknown projection.
    """
    text = (name or "").strip()
    center = center or GeoPoint(lat=0.0, lon=0.0)
    surface = surface or Surface.sphere()

    if text in {kind.value for kind in CATALOG_KINDS}:
        return ProjectionDef(id=text, kind=ProjectionKind(text), center=center, surface=surface)

    if allow_files and (text.endswith(".json") or os.path.isfile(text)):
        if not os.path.isfile(text):
            raise ValueError(f"Projection config not found: {text}")
        with open(text, "r", encoding="utf-8") as handle:
            config = json.load(handle)
        logger.info("✅ Loaded projection config %s", text)
        return projection_from_config(config, surface)

    if "=" in text:
        return parse_custom_projection(text, surface, center)

    allowed = ", ".join(kind.value for kind in CATALOG_KINDS)
    if allow_files:
        allowed += ", a .json path"
    raise ValueError(f"Unknown projection {name!r}. Allowed: {allowed}, or 'x = ...; y = ...'")
