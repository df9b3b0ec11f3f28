import math
from typing import Optional

from app.core.errors import DegeneratePointError, OutOfDomainError
from app.core.log import get_logger
from app.models.geo import GeoPoint
from app.models.projection import ProjectionDef
from app.models.render import FieldSample, GraticuleSpec, SampledField
from app.services.indicatrix_service import distortion_ellipse
from app.services.projection_service import project

logger = get_logger(__name__)

DISPLAY_SCALE_FRACTION = 0.25


def sample_field(definition: ProjectionDef, grat: GraticuleSpec) -> SampledField:
    """Indicatrices at graticule intersections; points outside the projection's domain are skipped."""
    samples = []
    skipped = 0

    for point in grat.intersections():
        try:
            plane = project(definition, point)
        except OutOfDomainError as exc:
            logger.debug("Skipping %.6f°, %.6f°: %s", point.lat_deg, point.lon_deg, exc)
            skipped += 1
            continue

        try:
            indicatrix = distortion_ellipse(definition, point)
        except DegeneratePointError:
            indicatrix = None
        except OutOfDomainError:
            skipped += 1
            continue
        samples.append(FieldSample(geo=point, plane=plane, ind=indicatrix))

    if skipped:
        logger.info("⚠️ %d graticule intersections outside the %s domain were skipped", skipped, definition.id)
    logger.info("✅ Sampled %d indicatrices for %s", len(samples), definition.id)
    return SampledField(samples=samples, skipped=skipped)


def default_display_scale(definition: Optional[ProjectionDef], grat: GraticuleSpec) -> float:
    """A quarter of the smaller graticule step, measured on the map at the graticule centre."""
    step = min(grat.lat_step, grat.lon_step)
    fallback = DISPLAY_SCALE_FRACTION * math.radians(step)
    if definition is None:
        return fallback

    lat = 0.5 * (grat.lat_min + grat.lat_max)
    lon = 0.5 * (grat.lon_min + grat.lon_max)
    upper = min(lat + 0.5 * step, 90.0)
    lower = upper - step
    try:
        north = project(definition, GeoPoint.from_degrees(upper, lon))
        south = project(definition, GeoPoint.from_degrees(lower, lon))
    except OutOfDomainError:
        return fallback * definition.surface.equatorial_radius

    length = math.hypot(north.x - south.x, north.y - south.y)
    return DISPLAY_SCALE_FRACTION * length if length > 0 else fallback * definition.surface.equatorial_radius
