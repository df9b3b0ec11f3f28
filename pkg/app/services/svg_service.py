import math
from typing import Iterable, List, Optional, Tuple

import numpy as np
import svgwrite

from app.core.errors import OutOfDomainError
from app.core.log import get_logger
from app.models.geo import GeoPoint
from app.models.projection import ProjectionDef
from app.models.render import FieldSample, GraticuleSpec, RenderOptions
from app.services.field_service import default_display_scale
from app.services.projection_service import project
from app.utils.formatting import format_number

logger = get_logger(__name__)

XML_DECLARATION = '<?xml version="1.0" encoding="utf-8" ?>\n'
MARGIN_FRACTION = 0.05
LINE_COLOUR = "#9e9e9e"
ELLIPSE_COLOUR = "#c62828"
MARKER_COLOUR = "#1565c0"


def _display_matrix(definition: Optional[ProjectionDef]) -> np.ndarray:
    """Map coordinates to SVG user units: y flipped, Tissot's meridian axis made vertical."""
    if definition is not None and definition.swaps_axes:
        return np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.array([[1.0, 0.0], [0.0, -1.0]])


def _graticule_lines(definition: ProjectionDef, grat: GraticuleSpec, step: float) -> List[List[Tuple[float, float]]]:
    """Projected meridians and parallels, split where they leave the projection's domain."""
    lines = []

    def trace(points: Iterable[GeoPoint]):
        current = []
        for point in points:
            try:
                plane = project(definition, point)
            except OutOfDomainError:
                if len(current) > 1:
                    lines.append(current)
                current = []
                continue
            current.append((plane.x, plane.y))
        if len(current) > 1:
            lines.append(current)

    def dense(low, high):
        count = max(1, int(math.ceil((high - low) / step - 1e-9)))
        return [low + (high - low) * k / count for k in range(count + 1)]

    for lon in grat.longitudes():
        trace(GeoPoint.from_degrees(lat, lon) for lat in dense(grat.lat_min, grat.lat_max))
    for lat in grat.latitudes():
        trace(GeoPoint.from_degrees(lat, lon) for lon in dense(grat.lon_min, grat.lon_max))
    return lines


def _pair(point: np.ndarray) -> Tuple[str, str]:
    return format_number(float(point[0])), format_number(float(point[1]))


def render_svg(samples: List[FieldSample], grat: GraticuleSpec, options: Optional[RenderOptions] = None) -> str:
    """One SVG document: graticule polylines plus an ellipse, circle or cross per sample."""
    options = options or RenderOptions()
    definition = options.projection
    scale = options.ellipse_scale or grat.ellipse_scale or default_display_scale(definition, grat)
    matrix = _display_matrix(definition)
    stroke = format_number(options.stroke_width)

    centres = [matrix @ np.array([sample.plane.x, sample.plane.y]) for sample in samples]
    reach = [scale * (sample.ind.a if sample.ind else 1.0) for sample in samples]
    if centres:
        stacked = np.array(centres)
        radii = np.array(reach)
        low = (stacked - radii[:, None]).min(axis=0)
        high = (stacked + radii[:, None]).max(axis=0)
    else:
        low, high = np.array([-1.0, -1.0]), np.array([1.0, 1.0])
    span = np.maximum(high - low, 1e-9)
    low, span = low - MARGIN_FRACTION * span, span * (1.0 + 2.0 * MARGIN_FRACTION)

    drawing = svgwrite.Drawing(profile="full", debug=False)
    drawing.attribs["viewBox"] = " ".join(format_number(float(v)) for v in (low[0], low[1], span[0], span[1]))

    graticule = drawing.g(id="graticule", fill="none", stroke=LINE_COLOUR, **{"stroke-width": stroke})
    if definition is not None:
        for line in _graticule_lines(definition, grat, options.line_step_deg):
            points = [_pair(matrix @ np.array(point)) for point in line]
            graticule.add(drawing.polyline(points=points))
    drawing.add(graticule)

    indicatrices = drawing.g(id="indicatrices", fill="none", stroke=ELLIPSE_COLOUR, **{"stroke-width": stroke})
    for sample, centre in zip(samples, centres):
        cx, cy = _pair(centre)
        if sample.ind is None:
            size = 0.5 * scale
            for dx, dy in ((1.0, 1.0), (1.0, -1.0)):
                indicatrices.add(
                    drawing.line(
                        start=_pair(centre - size * np.array([dx, dy])),
                        end=_pair(centre + size * np.array([dx, dy])),
                        stroke=MARKER_COLOUR,
                    )
                )
            continue

        if sample.ind.non_unique:
            indicatrices.add(drawing.circle(center=(cx, cy), r=format_number(scale * sample.ind.a)))
            continue

        major = matrix @ np.array([math.cos(sample.ind.theta), math.sin(sample.ind.theta)])
        angle = math.degrees(math.atan2(major[1], major[0]))
        ellipse = drawing.ellipse(
            center=(cx, cy),
            r=(format_number(scale * sample.ind.a), format_number(scale * sample.ind.b)),
        )
        ellipse["transform"] = f"rotate({format_number(angle)} {cx} {cy})"
        indicatrices.add(ellipse)
    drawing.add(indicatrices)

    logger.info("✅ Rendered %d samples to SVG", len(samples))
    return XML_DECLARATION + drawing.tostring() + "\n"
