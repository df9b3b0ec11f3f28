from enum import Enum
from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.models.geo import GeoPoint, Surface
from app.utils.expression_parser import compile_expression

PROJECTION_VARIABLES = ("l", "m")


class ProjectionKind(str, Enum):
    PLATE_CARREE = "plate_carree"
    MERCATOR = "mercator"
    SINUSOIDAL = "sinusoidal"
    CASSINI = "cassini"
    STEREOGRAPHIC = "stereographic"
    TISSOT = "tissot"
    CUSTOM = "custom"


CATALOG_KINDS = tuple(kind for kind in ProjectionKind if kind != ProjectionKind.CUSTOM)
CONFORMAL_KINDS = (ProjectionKind.MERCATOR, ProjectionKind.STEREOGRAPHIC)
ELLIPSOIDAL_KINDS = (ProjectionKind.PLATE_CARREE, ProjectionKind.TISSOT, ProjectionKind.CUSTOM)


class ProjectionDef(BaseModel):
    """
    A forward projection about a central point.

    Catalog projections put x east and y north. The Tissot projection keeps x
    along the mean meridian (arc length from the central parallel) and y along
    the parallel. Custom projections hold canonical expression text in the
    variables l (latitude) and m (longitude from the mean meridian), in units
    of the equatorial radius.
    """

    model_config = ConfigDict(frozen=True)

    id: str = "projection"
    kind: ProjectionKind
    center: GeoPoint = Field(default_factory=lambda: GeoPoint(lat=0.0, lon=0.0))
    surface: Surface = Field(default_factory=Surface.sphere)
    expressions: Optional[Dict[str, str]] = None

    @field_validator("expressions")
    @classmethod
    def canonicalize_expressions(cls, value):
        if value is None:
            return value
        if set(value) != {"x", "y"}:
            raise ValueError("expressions must define exactly x and y")
        return {name: compile_expression(value[name], PROJECTION_VARIABLES).text for name in ("x", "y")}

    @model_validator(mode="after")
    def validate_kind(self):
        if self.kind == ProjectionKind.CUSTOM and self.expressions is None:
            raise ValueError("custom projections need x and y expressions")
        if self.kind != ProjectionKind.CUSTOM and self.expressions is not None:
            raise ValueError(f"{self.kind.value} does not take expressions")
        if self.kind not in ELLIPSOIDAL_KINDS and not self.surface.is_spherical:
            raise ValueError(f"{self.kind.value} is only defined on a sphere")
        return self

    @property
    def is_conformal(self) -> bool:
        return self.kind in CONFORMAL_KINDS

    @property
    def truncation_order(self) -> Optional[int]:
        """Order of the series the Tissot projection is cut at; None for closed forms."""
        return 2 if self.kind == ProjectionKind.TISSOT else None

    @property
    def swaps_axes(self) -> bool:
        return self.kind == ProjectionKind.TISSOT

    def metadata(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "center": {"lat_deg": self.center.lat_deg, "lon_deg": self.center.lon_deg},
            "surface": {
                "kind": self.surface.kind.value,
                "equatorial_radius": self.surface.equatorial_radius,
                "flattening": self.surface.flattening,
            },
            "expressions": self.expressions,
            "truncation_order": self.truncation_order,
        }
