import math
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

Direction = Tuple[float, float]


class Jacobian2(BaseModel):
    """Partial derivatives of map coordinates per radian of latitude (l) and longitude (m)."""

    model_config = ConfigDict(frozen=True)

    dxdl: float
    dxdm: float
    dydl: float
    dydm: float

    @field_validator("dxdl", "dxdm", "dydl", "dydm")
    @classmethod
    def validate_finite(cls, value):
        if not math.isfinite(value):
            raise ValueError("Jacobian entries must be finite")
        return value

    @property
    def determinant(self) -> float:
        return self.dxdl * self.dydm - self.dxdm * self.dydl

    def as_array(self) -> np.ndarray:
        """Columns are the l and m partials."""
        return np.array([[self.dxdl, self.dxdm], [self.dydl, self.dydm]], dtype=float)


class Indicatrix(BaseModel):
    """
    Tissot's ellipse at one point.

    a >= b are image lengths per ground length. theta is the major axis
    direction in the map plane measured from the map x axis. Domain directions
    are (meridian, parallel) components of unit ground tangents.
    """

    model_config = ConfigDict(frozen=True)

    a: float
    b: float
    theta: float
    omega: float
    area_scale: float
    meridian_scale: float
    parallel_scale: float
    dir_major_domain: Direction
    dir_minor_domain: Direction
    non_unique: bool = False

    @property
    def lam(self) -> float:
        return math.sqrt(self.area_scale) - 1.0


class PrincipalTangents(BaseModel):
    model_config = ConfigDict(frozen=True)

    domain: Tuple[Direction, Direction]
    image: Tuple[Direction, Direction]
    non_unique: bool = False


class ParallelogramRatios(BaseModel):
    """
    Side ratios and angles of corresponding graticule parallelograms.

    h and k are source over image (meridian and parallel sides); theta_src and
    theta_img are the angles between meridian and parallel on the surface and
    on the map. The reciprocals are the indicatrix-style image over source scales.
    """

    model_config = ConfigDict(frozen=True)

    h: float
    k: float
    theta_src: float
    theta_img: float

    @property
    def meridian_scale(self) -> float:
        return 1.0 / self.h

    @property
    def parallel_scale(self) -> float:
        return 1.0 / self.k
