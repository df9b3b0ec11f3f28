"""
Scale-error fields over regions.

lambda = sqrt(a b) - 1 at every in-region node, with companion channels a - 1,
b - 1, omega and area scale. Geographic grids use x = longitude, y = latitude
in degrees; planar grids use the central-point chart (alpha east, beta north).
"""

import math
from typing import Tuple, Union

import numpy as np

from app.core.errors import DegeneratePointError, OutOfDomainError, RegionError
from app.core.log import get_logger
from app.models.fields import DistortionReport, GridSpec, PlanarRegion, RegionSpec, ScalarField
from app.models.geo import GeoPoint, Surface
from app.models.projection import ProjectionDef
from app.services.indicatrix_service import distortion_ellipse
from app.services.surface_service import latitude_from_meridian_arc, meridian_arc, parallel_radius

logger = get_logger(__name__)

CHANNELS = ("a_minus_1", "b_minus_1", "omega", "area_scale")


def chart_coordinates(surface: Surface, center: GeoPoint, p: GeoPoint) -> Tuple[float, float]:
    """(alpha, beta): parallel-scaled longitude offset and meridian arc from the central point."""
    d_lon = math.remainder(p.lon - center.lon, 2.0 * math.pi)
    return parallel_radius(surface, center.lat) * d_lon, meridian_arc(surface, center.lat, p.lat)


def geo_from_chart(surface: Surface, center: GeoPoint, alpha: float, beta: float) -> GeoPoint:
    r0 = parallel_radius(surface, center.lat)
    if r0 == 0:
        raise DegeneratePointError("The central-point chart is undefined at a pole")
    lat = latitude_from_meridian_arc(surface, center.lat, beta)
    return GeoPoint(lat=lat, lon=center.lon + alpha / r0)


def planar_region_from_geo(region: RegionSpec, surface: Surface) -> PlanarRegion:
    points = [chart_coordinates(surface, region.center, vertex) for vertex in region.vertices]
    return PlanarRegion.from_points(points, (0.0, 0.0))


def _sample(definition: ProjectionDef, points, mask: np.ndarray, grid: GridSpec) -> ScalarField:
    shape = (grid.ny, grid.nx)
    values = np.full(shape, np.nan)
    channels = {name: np.full(shape, np.nan) for name in CHANNELS}
    keep = mask.copy()
    skipped = 0

    for j, i in zip(*np.nonzero(mask)):
        try:
            indicatrix = distortion_ellipse(definition, points(j, i))
        except (DegeneratePointError, OutOfDomainError) as exc:
            logger.debug("Skipping node (%d, %d): %s", j, i, exc)
            keep[j, i] = False
            skipped += 1
            continue

        values[j, i] = indicatrix.lam
        channels["a_minus_1"][j, i] = indicatrix.a - 1.0
        channels["b_minus_1"][j, i] = indicatrix.b - 1.0
        channels["omega"][j, i] = indicatrix.omega
        channels["area_scale"][j, i] = indicatrix.area_scale

    if skipped:
        logger.info("⚠️ %d of %d region nodes were degenerate or out of domain", skipped, int(mask.sum()))
    return ScalarField.masked(grid, values, keep, **channels)


def lambda_field(definition: ProjectionDef, region: RegionSpec, grid: GridSpec) -> ScalarField:
    lon_deg, lat_deg = grid.mesh()
    mask = region.contains(lon_deg, lat_deg)
    return _sample(
        definition,
        lambda j, i: GeoPoint.from_degrees(lat_deg[j, i], lon_deg[j, i]),
        mask,
        grid,
    )


def planar_lambda_field(
    definition: ProjectionDef,
    region: RegionSpec,
    nodes: Union[int, GridSpec] = 41,
) -> ScalarField:
    """lambda on a grid of chart coordinates about the region's central point."""
    surface = definition.surface
    planar = planar_region_from_geo(region, surface)
    grid = nodes if isinstance(nodes, GridSpec) else GridSpec.covering(planar.polygon(), nodes)

    alpha, beta = grid.mesh()
    mask = planar.contains(alpha, beta)
    center = region.center
    return _sample(definition, lambda j, i: geo_from_chart(surface, center, alpha[j, i], beta[j, i]), mask, grid)


def distortion_report(definition: ProjectionDef, region: RegionSpec, grid: GridSpec) -> DistortionReport:
    lon_deg, lat_deg = grid.mesh()
    region_nodes = int(region.contains(lon_deg, lat_deg).sum())
    if region_nodes == 0:
        raise RegionError("Region contains no grid nodes")

    field = lambda_field(definition, region, grid)
    if field.node_count == 0:
        raise RegionError("Every node of the region is degenerate or out of domain")

    abs_lambda = np.abs(field.masked_values())
    area_scale = field.masked_values("area_scale")
    report = DistortionReport(
        projection=definition.id,
        node_count=field.node_count,
        skipped_count=region_nodes - field.node_count,
        sup_abs_lambda=float(abs_lambda.max()),
        mean_abs_lambda=float(abs_lambda.mean()),
        sup_omega=float(field.masked_values("omega").max()),
        area_scale_min=float(area_scale.min()),
        area_scale_max=float(area_scale.max()),
        sup_a=float(field.masked_values("a_minus_1").max() + 1.0),
        min_b=float(field.masked_values("b_minus_1").min() + 1.0),
    )
    logger.info("✅ Distortion report for %s over %d nodes", definition.id, report.node_count)
    return report
