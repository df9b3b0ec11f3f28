import math
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from app.models.distortion import Indicatrix
from app.models.geo import GeoPoint, PlanePoint
from app.models.projection import ProjectionDef

GRID_SLACK = 1e-9


class GraticuleSpec(BaseModel):
    """Graticule in degrees; an indicatrix is drawn at every k-th intersection."""

    model_config = ConfigDict(frozen=True)

    lat_min: float = -60.0
    lat_max: float = 60.0
    lat_step: float = 30.0
    lon_min: float = -90.0
    lon_max: float = 90.0
    lon_step: float = 30.0
    every: int = 1
    ellipse_scale: Optional[float] = None

    @field_validator("lat_step", "lon_step")
    @classmethod
    def validate_step(cls, value):
        if not math.isfinite(value) or value <= 0:
            raise ValueError("graticule steps must be positive")
        return value

    @field_validator("every")
    @classmethod
    def validate_every(cls, value):
        if value < 1:
            raise ValueError("every must be at least 1")
        return value

    @field_validator("ellipse_scale")
    @classmethod
    def validate_scale(cls, value):
        if value is not None and (not math.isfinite(value) or value <= 0):
            raise ValueError("ellipse_scale must be positive")
        return value

    @model_validator(mode="after")
    def validate_ranges(self):
        if not -90.0 <= self.lat_min <= self.lat_max <= 90.0:
            raise ValueError("latitude range must lie within [-90, 90] and be increasing")
        if not -180.0 <= self.lon_min <= self.lon_max <= 180.0:
            raise ValueError("longitude range must lie within [-180, 180] and be increasing")
        return self

    @staticmethod
    def _values(low: float, high: float, step: float) -> List[float]:
        count = int(math.floor((high - low) / step + GRID_SLACK)) + 1
        return [low + k * step for k in range(count)]

    def latitudes(self) -> List[float]:
        return self._values(self.lat_min, self.lat_max, self.lat_step)

    def longitudes(self) -> List[float]:
        return self._values(self.lon_min, self.lon_max, self.lon_step)

    def intersections(self) -> List[GeoPoint]:
        """Sampled intersections, latitude outer, longitude inner."""
        lats = self.latitudes()[:: self.every]
        lons = self.longitudes()[:: self.every]
        return [GeoPoint.from_degrees(lat, lon) for lat in lats for lon in lons]


class FieldSample(BaseModel):
    """One graticule intersection; degenerate samples carry no indicatrix."""

    model_config = ConfigDict(frozen=True)

    geo: GeoPoint
    plane: PlanePoint
    ind: Optional[Indicatrix] = None

    @property
    def degenerate(self) -> bool:
        return self.ind is None


class SampledField(BaseModel):
    model_config = ConfigDict(frozen=True)

    samples: List[FieldSample]
    skipped: int = 0


class RenderOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    projection: Optional[ProjectionDef] = None
    ellipse_scale: Optional[float] = None
    line_step_deg: float = 1.0
    stroke_width: float = 0.002

    @field_validator("line_step_deg")
    @classmethod
    def validate_line_step(cls, value):
        if not 0 < value <= 1.0:
            raise ValueError("graticule lines are sampled at most every 1°")
        return value
