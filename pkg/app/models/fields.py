import math
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.errors import RegionError
from app.models.geo import GeoPoint, PlanePoint
from app.utils.geometry import is_simple_polygon, points_in_polygon, regular_polygon


class GridSpec(BaseModel):
    """Rectangular grid with inclusive, uniformly spaced axes; rows follow y."""

    model_config = ConfigDict(frozen=True)

    x_min: float
    x_max: float
    nx: int
    y_min: float
    y_max: float
    ny: int

    @field_validator("nx", "ny")
    @classmethod
    def validate_counts(cls, value):
        if value < 2:
            raise ValueError("a grid needs at least 2 nodes per axis")
        return value

    @model_validator(mode="after")
    def validate_ranges(self):
        for low, high, axis in ((self.x_min, self.x_max, "x"), (self.y_min, self.y_max, "y")):
            if not (math.isfinite(low) and math.isfinite(high)) or not high > low:
                raise ValueError(f"{axis} range must be finite and increasing")
        return self

    @classmethod
    def square(cls, low: float, high: float, nodes: int) -> "GridSpec":
        return cls(x_min=low, x_max=high, nx=nodes, y_min=low, y_max=high, ny=nodes)

    @classmethod
    def covering(cls, vertices, nodes: int, margin: float = 0.0) -> "GridSpec":
        polygon = np.asarray(vertices, dtype=float)
        low, high = polygon.min(axis=0), polygon.max(axis=0)
        pad = margin * (high - low)
        return cls(
            x_min=float(low[0] - pad[0]),
            x_max=float(high[0] + pad[0]),
            nx=nodes,
            y_min=float(low[1] - pad[1]),
            y_max=float(high[1] + pad[1]),
            ny=nodes,
        )

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """'x_min,x_max,nx,y_min,y_max,ny' or a single node count 'n' (unit box)."""
        parts = [part.strip() for part in text.split(",")]
        if len(parts) == 1:
            return cls.square(-1.0, 1.0, int(parts[0]))
        if len(parts) != 6:
            raise ValueError("grid must be 'n' or 'x_min,x_max,nx,y_min,y_max,ny'")
        return cls(
            x_min=float(parts[0]),
            x_max=float(parts[1]),
            nx=int(parts[2]),
            y_min=float(parts[3]),
            y_max=float(parts[4]),
            ny=int(parts[5]),
        )

    @property
    def x_axis(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def y_axis(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.ny)

    @property
    def hx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def hy(self) -> float:
        return (self.y_max - self.y_min) / (self.ny - 1)

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """Node coordinates with shape (ny, nx)."""
        return np.meshgrid(self.x_axis, self.y_axis)


class ScalarField(BaseModel):
    """Values on a grid; NaN exactly where the mask is unset."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: GridSpec
    values: np.ndarray
    mask: np.ndarray
    channels: Dict[str, np.ndarray] = Field(default_factory=dict)

    @model_validator(mode="after")
    def validate_shapes(self):
        shape = (self.grid.ny, self.grid.nx)
        if self.values.shape != shape or self.mask.shape != shape:
            raise ValueError(f"field arrays must have shape {shape}")
        for name, channel in self.channels.items():
            if channel.shape != shape:
                raise ValueError(f"channel {name!r} must have shape {shape}")
        return self

    @classmethod
    def masked(cls, grid: GridSpec, values: np.ndarray, mask: np.ndarray, **channels: np.ndarray) -> "ScalarField":
        mask = np.asarray(mask, dtype=bool)
        values = np.where(mask, values, np.nan)
        channels = {name: np.where(mask, channel, np.nan) for name, channel in channels.items()}
        return cls(grid=grid, values=values, mask=mask, channels=channels)

    @property
    def node_count(self) -> int:
        return int(self.mask.sum())

    def masked_values(self, channel: Optional[str] = None) -> np.ndarray:
        source = self.values if channel is None else self.channels[channel]
        return source[self.mask]

    def value_at(self, x: float, y: float) -> float:
        """Value at the node nearest to (x, y)."""
        i = int(round((x - self.grid.x_min) / self.grid.hx))
        j = int(round((y - self.grid.y_min) / self.grid.hy))
        if not (0 <= i < self.grid.nx and 0 <= j < self.grid.ny):
            raise RegionError(f"({x}, {y}) is outside the grid")
        return float(self.values[j, i])


def _polygon_or_error(points: List[Tuple[float, float]]):
    if len(points) < 3:
        raise ValueError("a region needs a closed polygon with at least 3 vertices")
    if not is_simple_polygon(points):
        raise ValueError("region polygon must be simple (no self-intersections)")


class RegionSpec(BaseModel):
    """Closed polygon on the surface; polygon tests run in the (lon_deg, lat_deg) plane."""

    model_config = ConfigDict(frozen=True)

    vertices: List[GeoPoint]
    center: GeoPoint

    @model_validator(mode="after")
    def validate_polygon(self):
        _polygon_or_error(self.polygon_degrees())
        return self

    def polygon_degrees(self) -> List[Tuple[float, float]]:
        return [(vertex.lon_deg, vertex.lat_deg) for vertex in self.vertices]

    def contains(self, lon_deg, lat_deg) -> np.ndarray:
        return points_in_polygon(lon_deg, lat_deg, self.polygon_degrees())

    @classmethod
    def from_config(cls, config: Dict[str, Any]) -> "RegionSpec":
        """{vertices: [{lat_deg, lon_deg}], center: {lat_deg, lon_deg}}"""
        vertices = [GeoPoint.from_config(vertex) for vertex in config.get("vertices") or []]
        if len(vertices) < 3:
            raise RegionError("Region is empty: a polygon needs at least 3 vertices")
        center = GeoPoint.from_config(config["center"]) if config.get("center") else None
        if center is None:
            center = GeoPoint.from_degrees(
                float(np.mean([v.lat_deg for v in vertices])), float(np.mean([v.lon_deg for v in vertices]))
            )
        return cls(vertices=vertices, center=center)

    @classmethod
    def band(cls, lat_min_deg: float, lat_max_deg: float, lon_min_deg: float, lon_max_deg: float) -> "RegionSpec":
        corners = [
            (lat_min_deg, lon_min_deg),
            (lat_min_deg, lon_max_deg),
            (lat_max_deg, lon_max_deg),
            (lat_max_deg, lon_min_deg),
        ]
        return cls(
            vertices=[GeoPoint.from_degrees(lat, lon) for lat, lon in corners],
            center=GeoPoint.from_degrees(0.5 * (lat_min_deg + lat_max_deg), 0.5 * (lon_min_deg + lon_max_deg)),
        )


class PlanarRegion(BaseModel):
    model_config = ConfigDict(frozen=True)

    vertices: List[PlanePoint]
    center: PlanePoint = Field(default_factory=lambda: PlanePoint(x=0.0, y=0.0))

    @model_validator(mode="after")
    def validate_polygon(self):
        _polygon_or_error(self.polygon())
        return self

    def polygon(self) -> List[Tuple[float, float]]:
        return [(vertex.x, vertex.y) for vertex in self.vertices]

    def contains(self, x, y) -> np.ndarray:
        return points_in_polygon(x, y, self.polygon())

    @classmethod
    def from_points(cls, points, center: Optional[Tuple[float, float]] = None) -> "PlanarRegion":
        vertices = [PlanePoint(x=float(x), y=float(y)) for x, y in points]
        if len(vertices) < 3:
            raise RegionError("Region is empty: a polygon needs at least 3 vertices")
        if center is None:
            center = tuple(np.asarray(points, dtype=float).mean(axis=0))
        return cls(vertices=vertices, center=PlanePoint(x=float(center[0]), y=float(center[1])))

    @classmethod
    def disk(cls, radius: float = 1.0, segments: int = 1024, center: Tuple[float, float] = (0.0, 0.0)) -> "PlanarRegion":
        return cls.from_points(regular_polygon(center, radius, segments), center)

    @classmethod
    def rectangle(cls, x_min: float, x_max: float, y_min: float, y_max: float) -> "PlanarRegion":
        return cls.from_points([(x_min, y_min), (x_max, y_min), (x_max, y_max), (x_min, y_max)])

    @classmethod
    def from_config(cls, config: Dict[str, Any]) -> "PlanarRegion":
        """{vertices: [{x, y}], center?: {x, y}}"""
        points = [(float(v["x"]), float(v["y"])) for v in config.get("vertices") or []]
        center = config.get("center")
        return cls.from_points(points, (float(center["x"]), float(center["y"])) if center else None)


class DarbouxConic(BaseModel):
    """
    Quadratic scale-error model about the central point:
    base * (alpha^2 + beta^2) + A (alpha^2 - beta^2) + 2 B alpha beta with base = 1 / (4 R R').
    """

    model_config = ConfigDict(frozen=True)

    A: float
    B: float
    radius_m: float
    radius_n: float
    nodes_used: int = 0
    rms_residual: float = 0.0

    @field_validator("A", "B")
    @classmethod
    def validate_finite(cls, value):
        if not math.isfinite(value):
            raise ValueError("conic coefficients must be finite")
        return value

    @property
    def base(self) -> float:
        return 1.0 / (4.0 * self.radius_m * self.radius_n)

    def quadratic_form(self) -> np.ndarray:
        return np.array([[self.base + self.A, self.B], [self.B, self.base - self.A]])

    def evaluate(self, alpha, beta):
        alpha = np.asarray(alpha, dtype=float)
        beta = np.asarray(beta, dtype=float)
        return self.base * (alpha * alpha + beta * beta) + self.A * (alpha * alpha - beta * beta) + 2.0 * self.B * alpha * beta


class BoundaryCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    level: float
    classification: str
    eigenvalues: Tuple[float, float]
    semi_axes: Optional[Tuple[float, float]] = None
    boundary_spread: Optional[float] = None
    interior_max: Optional[float] = None
    interior_min: Optional[float] = None
    verified: bool = False


class ChebyshevResult(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    u: ScalarField
    magnification: ScalarField
    boundary_value: float
    boundary_mode: str
    iterations: int
    residual: float
    relaxation: float
    unknowns: int


class DistortionReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    projection: str
    node_count: int
    skipped_count: int
    sup_abs_lambda: float
    mean_abs_lambda: float
    sup_omega: float
    area_scale_min: float
    area_scale_max: float
    sup_a: float
    min_b: float
