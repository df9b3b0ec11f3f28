import math
from typing import Tuple

from scipy.integrate import quad
from scipy.optimize import brentq

from app.core.errors import OutOfDomainError
from app.models.geo import HALF_PI, FirstFundamentalForm, GeoPoint, Surface

Vector3 = Tuple[float, float, float]

MERIDIAN_ARC_RTOL = 1e-12


def prime_vertical_radius(surface: Surface, lat: float) -> float:
    """N(lat), radius of curvature in the prime vertical."""
    if surface.is_spherical:
        return surface.equatorial_radius
    sin_lat = math.sin(lat)
    return surface.equatorial_radius / math.sqrt(1.0 - surface.eccentricity_squared * sin_lat * sin_lat)


def meridian_radius(surface: Surface, lat: float) -> float:
    """M(lat), radius of curvature of the meridian."""
    if surface.is_spherical:
        return surface.equatorial_radius
    e2 = surface.eccentricity_squared
    sin_lat = math.sin(lat)
    return surface.equatorial_radius * (1.0 - e2) / (1.0 - e2 * sin_lat * sin_lat) ** 1.5


def principal_radii(surface: Surface, lat: float) -> Tuple[float, float]:
    return meridian_radius(surface, lat), prime_vertical_radius(surface, lat)


def gaussian_curvature(surface: Surface, lat: float) -> float:
    radius_m, radius_n = principal_radii(surface, lat)
    return 1.0 / (radius_m * radius_n)


def parallel_radius(surface: Surface, lat: float) -> float:
    """Radius r of the parallel through lat; exactly zero at the poles."""
    if abs(lat) >= HALF_PI:
        return 0.0
    return max(0.0, prime_vertical_radius(surface, lat) * math.cos(lat))


def meridian_arc(surface: Surface, lat0: float, lat: float) -> float:
    """Signed meridian length from lat0 to lat."""
    if surface.is_spherical:
        return surface.equatorial_radius * (lat - lat0)
    if lat == lat0:
        return 0.0

    arc, _ = quad(
        lambda phi: meridian_radius(surface, phi),
        lat0,
        lat,
        epsabs=0.0,
        epsrel=MERIDIAN_ARC_RTOL,
        limit=200,
    )
    return arc


def fundamental_form(surface: Surface, p: GeoPoint) -> FirstFundamentalForm:
    if surface.is_spherical:
        radius = surface.equatorial_radius
        cos_lat = 0.0 if abs(p.lat) >= HALF_PI else math.cos(p.lat)
        return FirstFundamentalForm(E=radius * radius, F=0.0, G=(radius * cos_lat) ** 2)

    radius_m = meridian_radius(surface, p.lat)
    r = parallel_radius(surface, p.lat)
    return FirstFundamentalForm(E=radius_m * radius_m, F=0.0, G=r * r)


def embed(surface: Surface, p: GeoPoint) -> Vector3:
    """Geodetic latitude/longitude to Earth-centred Cartesian coordinates."""
    radius_n = prime_vertical_radius(surface, p.lat)
    r = parallel_radius(surface, p.lat)
    z = radius_n * (1.0 - surface.eccentricity_squared) * math.sin(p.lat)
    return r * math.cos(p.lon), r * math.sin(p.lon), z


def embed_partials(surface: Surface, p: GeoPoint) -> Tuple[Vector3, Vector3]:
    """Partial derivatives of embed with respect to latitude and longitude."""
    radius_m = meridian_radius(surface, p.lat)
    r = parallel_radius(surface, p.lat)
    sin_lat, cos_lat = math.sin(p.lat), math.cos(p.lat)
    sin_lon, cos_lon = math.sin(p.lon), math.cos(p.lon)

    # d(N cos lat)/dlat = -M sin lat, d(N (1 - e^2) sin lat)/dlat = M cos lat
    d_lat = (-radius_m * sin_lat * cos_lon, -radius_m * sin_lat * sin_lon, radius_m * cos_lat)
    d_lon = (-r * sin_lon, r * cos_lon, 0.0)
    return d_lat, d_lon


def latitude_from_meridian_arc(surface: Surface, lat0: float, arc: float) -> float:
    """Inverse of meridian_arc in its second argument."""
    if surface.is_spherical:
        lat = lat0 + arc / surface.equatorial_radius
    else:
        north = meridian_arc(surface, lat0, HALF_PI)
        south = meridian_arc(surface, lat0, -HALF_PI)
        if not south <= arc <= north:
            lat = math.copysign(math.inf, arc)
        else:
            lat = brentq(lambda phi: meridian_arc(surface, lat0, phi) - arc, -HALF_PI, HALF_PI, xtol=1e-15, rtol=1e-15)

    if abs(lat) > HALF_PI:
        raise OutOfDomainError(f"Meridian arc {arc} from lat {math.degrees(lat0):.6f}° passes the pole")
    return lat
