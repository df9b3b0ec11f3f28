"""
Tissot indicatrix computations.

The differential of a projection is normalized by the ground metric so that a
unit circle of ground lengths maps onto an ellipse with semi-axes a >= b.
Ground tangents are expressed in the orthonormal (meridian, parallel) frame.
"""

import math
from typing import Optional, Sequence, Tuple

import numpy as np

from app.core.config import CONFORMAL_TOLERANCE, JACOBIAN_STEP
from app.core.errors import DegeneratePointError, DistortionError, NotConformalError, OutOfDomainError
from app.core.log import get_logger
from app.models.distortion import Indicatrix, Jacobian2, ParallelogramRatios, PrincipalTangents
from app.models.geo import HALF_PI, FirstFundamentalForm, GeoPoint, Surface
from app.models.projection import ProjectionDef
from app.services.projection_service import analytic_partials, project
from app.services.surface_service import embed_partials, fundamental_form

logger = get_logger(__name__)

ANALYTIC = "analytic"
NUMERIC = "numeric"
STENCIL_SHRINKS = 8
DETERMINANT_FLOOR = 1e-14


def _central_difference(definition: ProjectionDef, p: GeoPoint, step: float) -> Jacobian2:
    lat_step = min(step, 0.5 * (HALF_PI - abs(p.lat)))
    if lat_step <= 0:
        raise OutOfDomainError("Latitude stencil leaves the domain at the pole")

    north = project(definition, GeoPoint(lat=p.lat + lat_step, lon=p.lon))
    south = project(definition, GeoPoint(lat=p.lat - lat_step, lon=p.lon))
    east = project(definition, GeoPoint(lat=p.lat, lon=p.lon + step))
    west = project(definition, GeoPoint(lat=p.lat, lon=p.lon - step))

    return Jacobian2(
        dxdl=(north.x - south.x) / (2.0 * lat_step),
        dxdm=(east.x - west.x) / (2.0 * step),
        dydl=(north.y - south.y) / (2.0 * lat_step),
        dydm=(east.y - west.y) / (2.0 * step),
    )


def jacobian(
    definition: ProjectionDef,
    p: GeoPoint,
    mode: str = ANALYTIC,
    step: Optional[float] = None,
) -> Jacobian2:
    """Partials of (x, y) in l and m, closed form or by central differences."""
    if mode == ANALYTIC:
        return analytic_partials(definition, p)
    if mode != NUMERIC:
        raise ValueError(f"Unknown jacobian mode {mode!r}. Allowed: {ANALYTIC}, {NUMERIC}")

    step = JACOBIAN_STEP if step is None else step
    if not step > 0:
        raise ValueError("step must be positive")

    project(definition, p)
    for _ in range(STENCIL_SHRINKS):
        try:
            return _central_difference(definition, p, step)
        except OutOfDomainError:
            step *= 0.5
    raise OutOfDomainError(f"Difference stencil leaves the domain at lat={p.lat_deg:.6f}°, lon={p.lon_deg:.6f}°")


def inverse_metric_root(form: FirstFundamentalForm) -> np.ndarray:
    """g^(-1/2); reduces to diag(1/sqrt(E), 1/sqrt(G)) for orthogonal coordinates."""
    if form.is_degenerate:
        raise DegeneratePointError("Ground metric is degenerate (pole)")
    if form.F == 0:
        return np.diag([1.0 / math.sqrt(form.E), 1.0 / math.sqrt(form.G)])

    metric = np.array([[form.E, form.F], [form.F, form.G]], dtype=float)
    eigenvalues, eigenvectors = np.linalg.eigh(metric)
    return eigenvectors @ np.diag(1.0 / np.sqrt(eigenvalues)) @ eigenvectors.T


def normalized_differential(
    definition: ProjectionDef,
    p: GeoPoint,
    mode: str = ANALYTIC,
    step: Optional[float] = None,
) -> np.ndarray:
    """2x2 map of ground tangents (meridian, parallel components) to map tangents."""
    if abs(p.lat) >= HALF_PI:
        raise DegeneratePointError("The indicatrix is undefined at the poles")

    jac = jacobian(definition, p, mode, step)
    if abs(jac.determinant) <= DETERMINANT_FLOOR * max(1.0, float(np.abs(jac.as_array()).max()) ** 2):
        raise DegeneratePointError(f"Jacobian determinant vanishes at lat={p.lat_deg:.6f}°, lon={p.lon_deg:.6f}°")

    return jac.as_array() @ inverse_metric_root(fundamental_form(definition.surface, p))


def _unit(vector: np.ndarray) -> Tuple[float, float]:
    vector = vector / np.linalg.norm(vector)
    if vector[0] < 0 or (vector[0] == 0 and vector[1] < 0):
        vector = -vector
    return float(vector[0]) + 0.0, float(vector[1]) + 0.0


def _normalize_axis_angle(angle: float) -> float:
    """Fold an axis direction into (-pi/2, pi/2]."""
    while angle <= -HALF_PI:
        angle += math.pi
    while angle > HALF_PI:
        angle -= math.pi
    return angle


def max_angle_deformation(a: float, b: float) -> float:
    """omega = 2 asin((a - b) / (a + b))."""
    if not (a > 0 and b > 0):
        raise DistortionError("Scale factors must be positive")
    return 2.0 * math.asin(abs(a - b) / (a + b))


def ellipse_from_differential(s_matrix: np.ndarray) -> Indicatrix:
    u_matrix, singular_values, vt_matrix = np.linalg.svd(s_matrix)
    a, b = float(singular_values[0]), float(singular_values[1])
    if not b > 0:
        raise DegeneratePointError("Differential is singular")

    non_unique = a / b - 1.0 < CONFORMAL_TOLERANCE
    if non_unique:
        theta = 0.0
        major, minor = (1.0, 0.0), (0.0, 1.0)
    else:
        theta = _normalize_axis_angle(math.atan2(u_matrix[1, 0], u_matrix[0, 0]))
        major, minor = _unit(vt_matrix[0]), _unit(vt_matrix[1])

    return Indicatrix(
        a=a,
        b=b,
        theta=theta,
        omega=max_angle_deformation(a, b),
        area_scale=a * b,
        meridian_scale=float(np.linalg.norm(s_matrix[:, 0])),
        parallel_scale=float(np.linalg.norm(s_matrix[:, 1])),
        dir_major_domain=major,
        dir_minor_domain=minor,
        non_unique=non_unique,
    )


def distortion_ellipse(
    definition: ProjectionDef,
    p: GeoPoint,
    mode: str = ANALYTIC,
    step: Optional[float] = None,
) -> Indicatrix:
    return ellipse_from_differential(normalized_differential(definition, p, mode, step))


def principal_tangents(definition: ProjectionDef, p: GeoPoint) -> PrincipalTangents:
    """Orthogonal ground directions whose images are orthogonal, and those images."""
    s_matrix = normalized_differential(definition, p)
    indicatrix = ellipse_from_differential(s_matrix)

    domain = (indicatrix.dir_major_domain, indicatrix.dir_minor_domain)
    image = tuple(_unit(s_matrix @ np.array(direction)) for direction in domain)
    return PrincipalTangents(domain=domain, image=image, non_unique=indicatrix.non_unique)


def magnification_ratio(definition: ProjectionDef, p: GeoPoint) -> float:
    """Direction-independent scale at a conformal point."""
    indicatrix = distortion_ellipse(definition, p)
    if not indicatrix.non_unique:
        raise NotConformalError(
            f"{definition.id} is not conformal at lat={p.lat_deg:.6f}°, lon={p.lon_deg:.6f}° "
            f"(a/b = {indicatrix.a / indicatrix.b:.12f})"
        )
    return math.sqrt(indicatrix.area_scale)


def direction_sweep_extremes(s_matrix: np.ndarray, samples: int = 10000) -> Tuple[float, float]:
    """Max and min of |S u| over evenly spaced unit directions u."""
    angles = np.arange(samples) * (math.pi / samples)
    directions = np.vstack([np.cos(angles), np.sin(angles)])
    lengths = np.linalg.norm(np.asarray(s_matrix, dtype=float) @ directions, axis=0)
    return float(lengths.max()), float(lengths.min())


def sweep_angle_deformation(a: float, b: float, samples: int = 10000) -> float:
    """Largest change of angle between a direction and the major axis, doubled."""
    if not (a > 0 and b > 0):
        raise DistortionError("Scale factors must be positive")
    angles = (np.arange(samples) + 0.5) * (HALF_PI / samples)
    images = np.arctan2(b * np.sin(angles), a * np.cos(angles))
    return float(2.0 * np.abs(angles - images).max())


def orthographic_decomposition(a: float, b: float) -> Tuple[float, float]:
    """Tilt angle and magnification reproducing the ellipse: turn the plane by acos(b/a), project, magnify by a."""
    if not (a >= b > 0):
        raise DistortionError("Need a >= b > 0")
    return math.acos(min(1.0, b / a)), a


def apply_orthographic_decomposition(a: float, b: float, direction: Sequence[float]) -> Tuple[float, float]:
    """Image of a ground vector given in the principal frame."""
    tilt, magnification = orthographic_decomposition(a, b)
    return magnification * direction[0], magnification * math.cos(tilt) * direction[1]


def _angle_between(u: np.ndarray, v: np.ndarray) -> float:
    cosine = float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))
    return math.acos(max(-1.0, min(1.0, cosine)))


def parallelogram_ratios(definition: ProjectionDef, surface: Surface, p: GeoPoint) -> ParallelogramRatios:
    """
    Side ratios h = L/L', k = M/M' and the net angles of the graticule cell at p.

    L, M are the lengths of the surface partials along the meridian and the
    parallel; L', M' are those of the map partials.
    """
    d_lat, d_lon = (np.array(vector) for vector in embed_partials(surface, p))
    source_l, source_m = float(np.linalg.norm(d_lat)), float(np.linalg.norm(d_lon))
    if source_m == 0:
        raise DegeneratePointError("Parallel has zero length at the pole")

    jac = jacobian(definition, p)
    along_meridian = np.array([jac.dxdl, jac.dydl])
    along_parallel = np.array([jac.dxdm, jac.dydm])
    image_l, image_m = float(np.linalg.norm(along_meridian)), float(np.linalg.norm(along_parallel))
    if image_l == 0 or image_m == 0:
        raise DegeneratePointError("Map partial vanishes")

    theta_src = _angle_between(d_lat, d_lon)
    theta_img = _angle_between(along_meridian, along_parallel)
    if not (0 < theta_img < math.pi):
        raise DegeneratePointError("Meridian and parallel images are parallel")

    return ParallelogramRatios(
        h=source_l / image_l,
        k=source_m / image_m,
        theta_src=theta_src,
        theta_img=theta_img,
    )


def special_case_axes(h: float, theta_src: float, theta_img: float) -> Tuple[float, float]:
    """
    Indicatrix axes when both graticule directions share the scale h (image over source).

    a = h cos(theta_img/2) / cos(theta_src/2), b = h sin(theta_img/2) / sin(theta_src/2),
    returned sorted so that a >= b.
    """
    if not h > 0:
        raise DistortionError("h must be positive")
    for angle in (theta_src, theta_img):
        if not 0 < angle < math.pi:
            raise DistortionError("Net angles must lie strictly between 0 and pi")

    first = h * math.cos(0.5 * theta_img) / math.cos(0.5 * theta_src)
    second = h * math.sin(0.5 * theta_img) / math.sin(0.5 * theta_src)
    return max(first, second), min(first, second)
