import math
from enum import Enum
from typing import Any, Dict

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from app.core.config import SURFACE_PRESETS

HALF_PI = 0.5 * math.pi
LATITUDE_SLACK = 1e-12


class SurfaceKind(str, Enum):
    SPHERE = "sphere"
    ELLIPSOID = "ellipsoid"


class Surface(BaseModel):
    """Sphere or ellipsoid of revolution. Lengths are in model units (default radius 1)."""

    model_config = ConfigDict(frozen=True)

    kind: SurfaceKind = SurfaceKind.SPHERE
    equatorial_radius: float = 1.0
    flattening: float = 0.0

    @field_validator("equatorial_radius")
    @classmethod
    def validate_radius(cls, value):
        if not math.isfinite(value) or value <= 0:
            raise ValueError("equatorial_radius must be positive and finite")
        return value

    @field_validator("flattening")
    @classmethod
    def validate_flattening(cls, value):
        if not math.isfinite(value) or not 0 <= value < 1:
            raise ValueError("flattening must lie in [0, 1)")
        return value

    @model_validator(mode="after")
    def validate_sphere_flattening(self):
        if self.kind == SurfaceKind.SPHERE and self.flattening != 0:
            raise ValueError("a sphere has zero flattening; use kind 'ellipsoid'")
        return self

    @property
    def is_spherical(self) -> bool:
        return self.flattening == 0

    @property
    def eccentricity_squared(self) -> float:
        return self.flattening * (2.0 - self.flattening)

    @property
    def polar_radius(self) -> float:
        return self.equatorial_radius * (1.0 - self.flattening)

    @classmethod
    def sphere(cls, radius: float = 1.0) -> "Surface":
        return cls(kind=SurfaceKind.SPHERE, equatorial_radius=radius)

    @classmethod
    def from_config(cls, config: Dict[str, Any]) -> "Surface":
        """Build from {kind, radius, flattening | inverse_flattening}."""
        if "preset" in config:
            return cls.preset(config["preset"])

        radius = float(config.get("radius", config.get("equatorial_radius", 1.0)))

        if config.get("inverse_flattening") is not None:
            inverse = float(config["inverse_flattening"])
            if inverse <= 1:
                raise ValueError("inverse_flattening must be greater than 1")
            flattening = 1.0 / inverse
        else:
            flattening = float(config.get("flattening", 0.0))

        default_kind = SurfaceKind.ELLIPSOID if flattening > 0 else SurfaceKind.SPHERE
        kind = SurfaceKind(config.get("kind", default_kind.value))
        return cls(kind=kind, equatorial_radius=radius, flattening=flattening)

    @classmethod
    def preset(cls, name: str) -> "Surface":
        key = (name or "").strip().lower()
        if key not in SURFACE_PRESETS:
            raise ValueError(f"Unknown surface {name!r}. Allowed: {', '.join(sorted(SURFACE_PRESETS))}")
        return cls.from_config(SURFACE_PRESETS[key])


def normalize_longitude(lon: float) -> float:
    """Wrap into (-pi, pi]."""
    wrapped = math.remainder(lon, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


class GeoPoint(BaseModel):
    """Geodetic latitude and longitude in radians."""

    model_config = ConfigDict(frozen=True)

    lat: float
    lon: float = 0.0

    @field_validator("lat")
    @classmethod
    def validate_lat(cls, value):
        if not math.isfinite(value) or abs(value) > HALF_PI + LATITUDE_SLACK:
            raise ValueError("lat must lie in [-pi/2, pi/2]")
        return max(-HALF_PI, min(HALF_PI, value))

    @field_validator("lon")
    @classmethod
    def validate_lon(cls, value):
        if not math.isfinite(value):
            raise ValueError("lon must be finite")
        return normalize_longitude(value)

    @classmethod
    def from_degrees(cls, lat_deg: float, lon_deg: float = 0.0) -> "GeoPoint":
        return cls(lat=math.radians(lat_deg), lon=math.radians(lon_deg))

    @classmethod
    def from_config(cls, config: Dict[str, Any]) -> "GeoPoint":
        return cls.from_degrees(float(config.get("lat_deg", 0.0)), float(config.get("lon_deg", 0.0)))

    @property
    def lat_deg(self) -> float:
        return math.degrees(self.lat)

    @property
    def lon_deg(self) -> float:
        return math.degrees(self.lon)


class FirstFundamentalForm(BaseModel):
    """ds^2 = E dlat^2 + 2F dlat dlon + G dlon^2."""

    model_config = ConfigDict(frozen=True)

    E: float
    F: float = 0.0
    G: float

    @model_validator(mode="after")
    def validate_metric(self):
        if not self.E > 0:
            raise ValueError("E must be positive")
        if self.G < 0:
            raise ValueError("G must be non-negative")
        if self.E * self.G - self.F * self.F < -1e-15 * max(1.0, self.E * self.G):
            raise ValueError("first fundamental form must be positive semi-definite")
        return self

    @property
    def is_degenerate(self) -> bool:
        return self.G == 0 or self.E * self.G - self.F * self.F <= 0


class PlanePoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: float
    y: float

    @field_validator("x", "y")
    @classmethod
    def validate_finite(cls, value):
        if not math.isfinite(value):
            raise ValueError("plane coordinates must be finite")
        return value
