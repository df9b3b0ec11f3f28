import json
import math
import warnings

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.errors import ExpressionParseError, OutOfDomainError
from app.models.geo import GeoPoint, Surface
from app.models.projection import CATALOG_KINDS, ProjectionDef, ProjectionKind
from app.services.projection_service import (
    analytic_partials,
    parse_custom_projection,
    project,
    projection_from_config,
    resolve_projection,
    serialize_custom_projection,
    tissot_projection,
)
from app.services.surface_service import meridian_arc, parallel_radius
from app.utils.expression_parser import compile_expression, parse_expression

UNIT_SPHERE = Surface.sphere()
INTERNATIONAL = Surface.preset("international")


def catalog(kind: ProjectionKind, surface: Surface = UNIT_SPHERE) -> ProjectionDef:
    return ProjectionDef(id=kind.value, kind=kind, surface=surface)


def sample_grid(count: int = 5, lat_limit: float = 1.2, lon_limit: float = 1.2):
    for lat in np.linspace(-lat_limit, lat_limit, count):
        for lon in np.linspace(-lon_limit, lon_limit, count):
            yield GeoPoint(lat=float(lat), lon=float(lon))


class TestCatalog:
    def test_plate_carree(self):
        plane = project(catalog(ProjectionKind.PLATE_CARREE), GeoPoint(lat=0.3, lon=0.7))
        assert (plane.x, plane.y) == pytest.approx((0.7, 0.3))

    def test_mercator(self):
        plane = project(catalog(ProjectionKind.MERCATOR), GeoPoint(lat=math.pi / 4, lon=0.0))
        assert plane.x == 0.0
        assert plane.y == pytest.approx(0.881373587, abs=1e-9)

    def test_sinusoidal(self):
        plane = project(catalog(ProjectionKind.SINUSOIDAL), GeoPoint(lat=math.pi / 3, lon=1.0))
        assert (plane.x, plane.y) == pytest.approx((0.5, math.pi / 3))

    def test_cassini_central_meridian(self):
        plane = project(catalog(ProjectionKind.CASSINI), GeoPoint(lat=0.4, lon=0.0))
        assert (plane.x, plane.y) == pytest.approx((0.0, 0.4))

    def test_stereographic_center(self):
        plane = project(catalog(ProjectionKind.STEREOGRAPHIC), GeoPoint(lat=0.0, lon=0.0))
        assert (plane.x, plane.y) == (0.0, 0.0)

    @pytest.mark.parametrize("kind", CATALOG_KINDS)
    def test_odd_symmetry(self, kind):
        definition = catalog(kind)
        for lat, lon in ((0.3, 0.2), (-0.6, 0.1), (1.0, -0.3)):
            plane = project(definition, GeoPoint(lat=lat, lon=lon))
            mirrored = project(definition, GeoPoint(lat=-lat, lon=-lon))
            assert mirrored.x == pytest.approx(-plane.x, abs=1e-14)
            assert mirrored.y == pytest.approx(-plane.y, abs=1e-14)

    def test_mean_meridian_offset(self):
        shifted = ProjectionDef(kind=ProjectionKind.SINUSOIDAL, center=GeoPoint.from_degrees(0.0, 30.0))
        plane = project(shifted, GeoPoint.from_degrees(45.0, 30.0))
        assert plane.x == pytest.approx(0.0, abs=1e-15)

    def test_ellipsoidal_plate_carree_uses_meridian_arc(self):
        plane = project(catalog(ProjectionKind.PLATE_CARREE, INTERNATIONAL), GeoPoint(lat=0.8, lon=0.5))
        assert plane.y == pytest.approx(meridian_arc(INTERNATIONAL, 0.0, 0.8), rel=1e-14)
        assert plane.x == pytest.approx(0.5)

    def test_spherical_only_kinds_reject_ellipsoid(self):
        with pytest.raises(ValidationError):
            catalog(ProjectionKind.MERCATOR, INTERNATIONAL)

    @pytest.mark.parametrize("kind", CATALOG_KINDS)
    def test_analytic_partials_match_differences(self, kind):
        definition = catalog(kind)
        h = 1e-6
        for p in sample_grid(5, lat_limit=1.2, lon_limit=0.3):
            partials = analytic_partials(definition, p)
            north = project(definition, GeoPoint(lat=p.lat + h, lon=p.lon))
            south = project(definition, GeoPoint(lat=p.lat - h, lon=p.lon))
            east = project(definition, GeoPoint(lat=p.lat, lon=p.lon + h))
            west = project(definition, GeoPoint(lat=p.lat, lon=p.lon - h))
            assert partials.dxdl == pytest.approx((north.x - south.x) / (2 * h), abs=1e-7)
            assert partials.dydl == pytest.approx((north.y - south.y) / (2 * h), abs=1e-7)
            assert partials.dxdm == pytest.approx((east.x - west.x) / (2 * h), abs=1e-7)
            assert partials.dydm == pytest.approx((east.y - west.y) / (2 * h), abs=1e-7)


class TestDomains:
    def test_mercator_pole(self):
        with pytest.raises(OutOfDomainError):
            project(catalog(ProjectionKind.MERCATOR), GeoPoint(lat=math.pi / 2))

    def test_stereographic_antipode(self):
        with pytest.raises(OutOfDomainError):
            project(catalog(ProjectionKind.STEREOGRAPHIC), GeoPoint(lat=0.0, lon=math.pi))

    def test_tissot_beyond_quarter_turn(self):
        with pytest.raises(OutOfDomainError):
            tissot_projection(UNIT_SPHERE, 0.0, GeoPoint(lat=0.0, lon=2.0))

    def test_tissot_warns_outside_the_lune(self):
        with pytest.warns(RuntimeWarning, match="lune"):
            tissot_projection(UNIT_SPHERE, 0.0, GeoPoint(lat=0.1, lon=0.5))

    def test_tissot_inside_the_lune_is_quiet(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            tissot_projection(UNIT_SPHERE, 0.0, GeoPoint(lat=0.1, lon=0.2))

    def test_custom_domain_error_at_call_time(self):
        definition = parse_custom_projection("x = sqrt(l); y = m")
        project(definition, GeoPoint(lat=0.5, lon=0.1))
        with pytest.raises(OutOfDomainError):
            project(definition, GeoPoint(lat=-0.5, lon=0.1))


class TestTissotProjection:
    def test_center_maps_to_origin(self):
        plane = tissot_projection(UNIT_SPHERE, 0.0, GeoPoint(lat=0.0, lon=0.0))
        assert (plane.x, plane.y) == (0.0, 0.0)

    def test_along_the_parallel(self):
        plane = tissot_projection(UNIT_SPHERE, 0.0, GeoPoint(lat=0.0, lon=0.2))
        assert plane.x == pytest.approx(0.0, abs=1e-15)
        assert plane.y == pytest.approx(0.2 * (1 + 0.04 / 6), rel=1e-15)

    def test_along_the_meridian(self):
        plane = tissot_projection(UNIT_SPHERE, 0.0, GeoPoint(lat=0.3, lon=0.0))
        assert (plane.x, plane.y) == pytest.approx((0.3, 0.0))

    @pytest.mark.parametrize("surface", [UNIT_SPHERE, INTERNATIONAL])
    def test_mean_meridian_is_isometric(self, surface):
        for lat in np.linspace(-1.2, 1.2, 13):
            plane = tissot_projection(surface, 0.4, GeoPoint(lat=float(lat), lon=0.0))
            assert abs(plane.x - meridian_arc(surface, 0.4, float(lat))) < 1e-12
            assert plane.y == 0.0

    def test_second_order_formula(self):
        l, m = 0.7, 0.3
        plane = tissot_projection(INTERNATIONAL, 0.5, GeoPoint(lat=l, lon=m))
        s = meridian_arc(INTERNATIONAL, 0.5, l)
        r = parallel_radius(INTERNATIONAL, l)
        assert plane.x == pytest.approx(s + 0.5 * r * m * m * math.sin(l), rel=1e-14)
        assert plane.y == pytest.approx(r * m * (1 + m * m * math.cos(2 * l) / 6), rel=1e-14)

    def test_metadata(self):
        definition = catalog(ProjectionKind.TISSOT)
        assert definition.metadata()["truncation_order"] == 2
        assert definition.swaps_axes
        assert catalog(ProjectionKind.MERCATOR).metadata()["truncation_order"] is None


class TestCustomProjections:
    def test_identity_matches_plate_carree(self):
        custom = parse_custom_projection("x = m; y = l")
        reference = catalog(ProjectionKind.PLATE_CARREE)
        for p in sample_grid():
            assert project(custom, p) == project(reference, p)

    def test_matches_sinusoidal(self):
        custom = parse_custom_projection("x = m*cos(l); y = l")
        reference = catalog(ProjectionKind.SINUSOIDAL)
        for p in sample_grid():
            a, b = project(custom, p), project(reference, p)
            assert abs(a.x - b.x) < 1e-12 and abs(a.y - b.y) < 1e-12

    def test_parse_error_position(self):
        with pytest.raises(ExpressionParseError) as info:
            parse_custom_projection("x = q*")
        assert info.value.position == 4

    @pytest.mark.parametrize("text", [
        "x = foo(l); y = l",
        "x = m; y = (l",
        "x = m; z = l",
        "x = m",
        "x = m; x = l",
        "x = m $ 2; y = l",
        "x = ; y = l",
    ])
    def test_rejected_inputs(self, text):
        with pytest.raises(ExpressionParseError):
            parse_custom_projection(text)

    def test_round_trip(self):
        original = parse_custom_projection("x = 0.1*m*cos(l) + l^2/3; y = ln(2 + sin(l)) - sqrt(1 + m*m) + pi*e")
        text = serialize_custom_projection(original)
        reparsed = parse_custom_projection(text)

        assert serialize_custom_projection(reparsed) == text
        for p in sample_grid():
            assert project(reparsed, p) == project(original, p)

    def test_language_aliases(self):
        a = parse_expression("log(l) + l**2", ("l", "m"))
        b = parse_expression("ln(l) + l^2", ("l", "m"))
        assert a == b

    def test_power_is_right_associative(self):
        compiled = compile_expression("2^3^2", ("l", "m"))
        assert compiled.value(0.0, 0.0) == 512.0

    def test_serialize_rejects_catalog(self):
        with pytest.raises(ValueError):
            serialize_custom_projection(catalog(ProjectionKind.MERCATOR))


class TestResolve:
    def test_catalog_name(self):
        definition = resolve_projection("mercator")
        assert definition.kind == ProjectionKind.MERCATOR

    def test_inline_expressions(self):
        definition = resolve_projection("x = m; y = l")
        assert definition.kind == ProjectionKind.CUSTOM

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="Unknown projection"):
            resolve_projection("nosuch")

    def test_config_file(self, tmp_path):
        path = tmp_path / "shifted.json"
        path.write_text(json.dumps({
            "id": "shifted",
            "kind": "custom",
            "center": {"lat_deg": 0.0, "lon_deg": 10.0},
            "expressions": {"x": "m", "y": "l"},
        }))
        definition = resolve_projection(str(path))
        assert definition.id == "shifted"
        plane = project(definition, GeoPoint.from_degrees(20.0, 10.0))
        assert plane.x == pytest.approx(0.0, abs=1e-15)
        assert plane.y == pytest.approx(math.radians(20.0))

    def test_config_with_surface(self):
        definition = projection_from_config({"kind": "tissot", "surface": {"preset": "international"}})
        assert definition.surface == INTERNATIONAL

    def test_missing_config_file(self, tmp_path):
        with pytest.raises(ValueError, match="not found"):
            resolve_projection(str(tmp_path / "missing.json"))

    @pytest.mark.parametrize("filename", ["mercator_config", "mercator.json"])
    def test_files_can_be_switched_off(self, tmp_path, filename):
        path = tmp_path / filename
        path.write_text(json.dumps({"kind": "mercator"}))
        assert resolve_projection(str(path)).kind == ProjectionKind.MERCATOR
        with pytest.raises(ValueError, match="Unknown projection"):
            resolve_projection(str(path), allow_files=False)
