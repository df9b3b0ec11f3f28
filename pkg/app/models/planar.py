import math
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.utils.expression_parser import compile_expression

PLANAR_VARIABLES = ("x", "y")


class PlanarMapKind(str, Enum):
    EXPRESSIONS = "expressions"
    AFFINE = "affine"
    PERTURBED = "perturbed"


class Rectangle(BaseModel):
    model_config = ConfigDict(frozen=True)

    x0: float = 0.0
    x1: float = 1.0
    y0: float = 0.0
    y1: float = 1.0

    @model_validator(mode="after")
    def validate_extent(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("rectangle must have x1 > x0 and y1 > y0")
        return self

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    def contains(self, x: float, y: float, slack: float = 1e-12) -> bool:
        return self.x0 - slack <= x <= self.x1 + slack and self.y0 - slack <= y <= self.y1 + slack


class SineBumps(BaseModel):
    """
    Displacement sum_{p,q} c[p][q] sin(p pi s) sin(q pi t) with s, t the
    normalized domain coordinates; it vanishes on the whole boundary frame.
    """

    model_config = ConfigDict(frozen=True)

    u_coefficients: List[List[float]]
    v_coefficients: List[List[float]]

    @model_validator(mode="after")
    def validate_tables(self):
        for table in (self.u_coefficients, self.v_coefficients):
            if not table or any(len(row) != len(table[0]) for row in table):
                raise ValueError("coefficient tables must be non-empty rectangles")
            if any(not math.isfinite(value) for row in table for value in row):
                raise ValueError("coefficients must be finite")
        return self


class PlanarMap(BaseModel):
    """A plane map (x, y) -> (u, v) on a rectangle, given by expressions or an affine part plus sine bumps."""

    model_config = ConfigDict(frozen=True)

    kind: PlanarMapKind
    domain: Rectangle = Field(default_factory=Rectangle)
    expressions: Optional[Dict[str, str]] = None
    matrix: Tuple[Tuple[float, float], Tuple[float, float]] = ((1.0, 0.0), (0.0, 1.0))
    offset: Tuple[float, float] = (0.0, 0.0)
    bumps: Optional[SineBumps] = None

    @field_validator("expressions")
    @classmethod
    def canonicalize_expressions(cls, value):
        if value is None:
            return value
        if set(value) != {"u", "v"}:
            raise ValueError("expressions must define exactly u and v")
        return {name: compile_expression(value[name], PLANAR_VARIABLES).text for name in ("u", "v")}

    @model_validator(mode="after")
    def validate_payload(self):
        if self.kind == PlanarMapKind.EXPRESSIONS and self.expressions is None:
            raise ValueError("expression maps need u and v")
        if self.kind == PlanarMapKind.PERTURBED and self.bumps is None:
            raise ValueError("perturbed maps need sine-bump coefficients")
        if self.kind != PlanarMapKind.EXPRESSIONS and self.expressions is not None:
            raise ValueError("only expression maps take expressions")
        return self

    @classmethod
    def affine(cls, matrix, offset=(0.0, 0.0), domain: Optional[Rectangle] = None) -> "PlanarMap":
        return cls(
            kind=PlanarMapKind.AFFINE,
            domain=domain or Rectangle(),
            matrix=tuple(tuple(float(v) for v in row) for row in matrix),
            offset=tuple(float(v) for v in offset),
        )


class Characteristics(BaseModel):
    """
    Dilatation p >= 1 and the direction theta (source plane) of greatest stretch.

    ellipse_angle is the major-axis direction of the small source ellipse that
    the map sends to a circle; it is perpendicular to theta. mu is the Beltrami
    coefficient f_zbar / f_z.
    """

    model_config = ConfigDict(frozen=True)

    p: float
    theta: float
    ellipse_angle: float
    mu_re: float
    mu_im: float
    non_unique: bool = False

    @property
    def mu_abs(self) -> float:
        return math.hypot(self.mu_re, self.mu_im)


class RectanglePair(BaseModel):
    model_config = ConfigDict(frozen=True)

    src_width: float
    src_height: float
    dst_width: float
    dst_height: float

    @field_validator("src_width", "src_height", "dst_width", "dst_height")
    @classmethod
    def validate_positive(cls, value):
        if not math.isfinite(value) or value <= 0:
            raise ValueError("rectangle sides must be positive")
        return value

    @property
    def stretch_ratio(self) -> float:
        return (self.dst_width / self.src_width) / (self.dst_height / self.src_height)

    @classmethod
    def parse(cls, source: str, target: str) -> "RectanglePair":
        """From 'WxH' strings."""
        (sw, sh), (dw, dh) = (_parse_size(source), _parse_size(target))
        return cls(src_width=sw, src_height=sh, dst_width=dw, dst_height=dh)


def _parse_size(text: str) -> Tuple[float, float]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise ValueError(f"Rectangle size must look like WxH, got {text!r}")
    return float(parts[0]), float(parts[1])


class GrotzschReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int
    trials: int
    affine_k: float
    min_sup_dilatation: float
    best_trial: int
    rejected_perturbations: int
    sup_dilatations: List[float]

    def summary(self) -> Dict[str, Any]:
        return self.model_dump(exclude={"sup_dilatations"})
