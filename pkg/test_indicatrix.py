import math

import numpy as np
import pytest

from app.core.errors import DegeneratePointError, DistortionError, NotConformalError
from app.models.geo import GeoPoint, Surface
from app.models.projection import ProjectionDef, ProjectionKind
from app.models.render import GraticuleSpec
from app.services.field_service import sample_field
from app.services.indicatrix_service import (
    apply_orthographic_decomposition,
    direction_sweep_extremes,
    distortion_ellipse,
    ellipse_from_differential,
    jacobian,
    magnification_ratio,
    max_angle_deformation,
    normalized_differential,
    orthographic_decomposition,
    parallelogram_ratios,
    principal_tangents,
    special_case_axes,
    sweep_angle_deformation,
)
from app.services.projection_service import parse_custom_projection

UNIT_SPHERE = Surface.sphere()
RANDOM_CUSTOM = "x = m*cos(l) + 0.1*l*l; y = l + 0.2*sin(m)"


def catalog(kind: ProjectionKind) -> ProjectionDef:
    return ProjectionDef(id=kind.value, kind=kind)


PLATE_CARREE = catalog(ProjectionKind.PLATE_CARREE)
MERCATOR = catalog(ProjectionKind.MERCATOR)
SINUSOIDAL = catalog(ProjectionKind.SINUSOIDAL)
CASSINI = catalog(ProjectionKind.CASSINI)
STEREOGRAPHIC = catalog(ProjectionKind.STEREOGRAPHIC)


def random_points(rng, count, lat_limit=1.2, lon_limit=1.4, margin=0.0):
    lats = rng.uniform(margin, lat_limit, count) * rng.choice([-1.0, 1.0], count)
    lons = rng.uniform(margin, lon_limit, count) * rng.choice([-1.0, 1.0], count)
    return [GeoPoint(lat=float(lat), lon=float(lon)) for lat, lon in zip(lats, lons)]


def angle_between(u, v) -> float:
    cosine = np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v))
    return math.acos(max(-1.0, min(1.0, float(cosine))))


class TestJacobian:
    def test_plate_carree(self):
        for p in (GeoPoint(lat=0.2, lon=0.1), GeoPoint(lat=-1.0, lon=2.0)):
            jac = jacobian(PLATE_CARREE, p)
            assert (jac.dxdl, jac.dxdm, jac.dydl, jac.dydm) == pytest.approx((0.0, 1.0, 1.0, 0.0), abs=1e-15)

    def test_mercator_secant(self):
        jac = jacobian(MERCATOR, GeoPoint(lat=math.pi / 4))
        assert jac.dydl == pytest.approx(1.41421356, abs=1e-8)

    def test_numeric_matches_analytic_on_sinusoidal(self):
        worst = 0.0
        for lat in np.linspace(-1.0, 1.0, 5):
            for lon in np.linspace(-1.0, 1.0, 5):
                p = GeoPoint(lat=float(lat), lon=float(lon))
                difference = jacobian(SINUSOIDAL, p, "analytic").as_array() - jacobian(SINUSOIDAL, p, "numeric").as_array()
                worst = max(worst, float(np.abs(difference).max()))
        assert worst < 1e-9

    @pytest.mark.parametrize("definition", [CASSINI, STEREOGRAPHIC, catalog(ProjectionKind.TISSOT)])
    def test_numeric_matches_analytic(self, definition):
        p = GeoPoint(lat=0.4, lon=0.25)
        analytic = jacobian(definition, p, "analytic").as_array()
        numeric = jacobian(definition, p, "numeric").as_array()
        assert np.abs(analytic - numeric).max() < 1e-8

    def test_custom_partials_are_symbolic(self):
        definition = parse_custom_projection(RANDOM_CUSTOM)
        p = GeoPoint(lat=0.3, lon=-0.4)
        analytic = jacobian(definition, p, "analytic")
        assert analytic.dxdl == pytest.approx(0.4 * math.sin(0.3) + 0.2 * 0.3, rel=1e-14)
        assert analytic.dydm == pytest.approx(0.2 * math.cos(-0.4), rel=1e-14)

    def test_second_order_convergence(self):
        p = GeoPoint(lat=0.5, lon=0.3)
        exact = jacobian(MERCATOR, p).as_array()
        coarse = np.abs(jacobian(MERCATOR, p, "numeric", step=1e-2).as_array() - exact).max()
        fine = np.abs(jacobian(MERCATOR, p, "numeric", step=5e-3).as_array() - exact).max()
        assert coarse / fine == pytest.approx(4.0, rel=0.02)

    def test_stencil_shrinks_near_the_pole(self):
        p = GeoPoint(lat=math.pi / 2 - 1e-7, lon=0.0)
        jac = jacobian(SINUSOIDAL, p, "numeric")
        assert jac.dydl == pytest.approx(1.0, rel=1e-6)

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            jacobian(SINUSOIDAL, GeoPoint(lat=0.1), "spline")


class TestDistortionEllipse:
    def test_mercator_circle(self):
        ind = distortion_ellipse(MERCATOR, GeoPoint(lat=math.pi / 3))
        assert ind.a == pytest.approx(2.0, abs=1e-12)
        assert ind.b == pytest.approx(2.0, abs=1e-12)
        assert ind.omega < 1e-9
        assert ind.non_unique

    def test_plate_carree_sixty_degrees(self):
        ind = distortion_ellipse(PLATE_CARREE, GeoPoint.from_degrees(60.0))
        assert ind.a == pytest.approx(2.0, abs=1e-9)
        assert ind.b == pytest.approx(1.0, abs=1e-9)
        assert ind.area_scale == pytest.approx(2.0, abs=1e-9)
        assert ind.omega == pytest.approx(2 * math.asin(1 / 3), abs=1e-9)
        assert ind.parallel_scale == pytest.approx(ind.a)
        assert ind.meridian_scale == pytest.approx(ind.b)
        assert ind.dir_major_domain == pytest.approx((0.0, 1.0))
        assert ind.dir_minor_domain == pytest.approx((1.0, 0.0))
        assert ind.theta == pytest.approx(0.0)

    def test_sinusoidal_equal_area(self):
        rng = np.random.default_rng(3)
        for p in random_points(rng, 50):
            ind = distortion_ellipse(SINUSOIDAL, p)
            assert abs(ind.a * ind.b - 1.0) < 1e-10

    def test_invariants(self):
        rng = np.random.default_rng(5)
        for definition in (PLATE_CARREE, SINUSOIDAL, CASSINI):
            for p in random_points(rng, 20):
                ind = distortion_ellipse(definition, p)
                assert ind.a >= ind.b > 0
                assert ind.area_scale == ind.a * ind.b
                assert ind.omega == pytest.approx(2 * math.asin((ind.a - ind.b) / (ind.a + ind.b)))
                assert -math.pi / 2 < ind.theta <= math.pi / 2

    def test_theta_is_image_major_axis(self):
        ind = distortion_ellipse(SINUSOIDAL, GeoPoint(lat=0.8, lon=1.0))
        s_matrix = normalized_differential(SINUSOIDAL, GeoPoint(lat=0.8, lon=1.0))
        image = s_matrix @ np.array(ind.dir_major_domain)
        cross = image[0] * math.sin(ind.theta) - image[1] * math.cos(ind.theta)
        assert abs(cross) < 1e-9 * np.linalg.norm(image)
        assert np.linalg.norm(image) == pytest.approx(ind.a)

    def test_pole_is_degenerate(self):
        with pytest.raises(DegeneratePointError):
            distortion_ellipse(PLATE_CARREE, GeoPoint(lat=math.pi / 2))

    def test_zero_determinant_is_degenerate(self):
        definition = parse_custom_projection("x = l + m; y = 2*l + 2*m")
        with pytest.raises(DegeneratePointError):
            distortion_ellipse(definition, GeoPoint(lat=0.2, lon=0.1))

    def test_cassini_singular_line(self):
        with pytest.raises(DegeneratePointError):
            distortion_ellipse(CASSINI, GeoPoint(lat=0.0, lon=math.pi / 2))

    def test_ellipsoidal_plate_carree(self):
        surface = Surface.preset("international")
        definition = ProjectionDef(kind=ProjectionKind.PLATE_CARREE, surface=surface)
        ind = distortion_ellipse(definition, GeoPoint(lat=0.0))
        assert ind.meridian_scale == pytest.approx(1.0, rel=1e-12)
        assert ind.parallel_scale == pytest.approx(1.0, rel=1e-12)


class TestAcceptanceSuites:
    GRATICULE = GraticuleSpec(lat_min=-80, lat_max=80, lat_step=5, lon_min=-180, lon_max=180, lon_step=5)

    @pytest.mark.parametrize("definition", [MERCATOR, STEREOGRAPHIC])
    def test_conformal_field_of_circles(self, definition):
        sampled = sample_field(definition, self.GRATICULE)
        assert sampled.samples
        assert not any(sample.degenerate for sample in sampled.samples)
        for sample in sampled.samples:
            assert sample.ind.omega < 1e-9
            assert abs(sample.ind.a - sample.ind.b) <= 1e-9 * sample.ind.a
            assert sample.ind.non_unique

    def test_equal_area_field(self):
        sampled = sample_field(SINUSOIDAL, self.GRATICULE)
        assert max(abs(sample.ind.area_scale - 1.0) for sample in sampled.samples) < 1e-9

    def test_principal_tangents_on_random_points(self):
        rng = np.random.default_rng(11)
        definitions = [PLATE_CARREE, SINUSOIDAL, MERCATOR, STEREOGRAPHIC, parse_custom_projection(RANDOM_CUSTOM)]
        for definition in definitions:
            for p in random_points(rng, 200, margin=0.05):
                tangents = principal_tangents(definition, p)
                assert abs(angle_between(*tangents.domain) - math.pi / 2) < 1e-8
                assert abs(angle_between(*tangents.image) - math.pi / 2) < 1e-8
                assert tangents.non_unique == definition.is_conformal

    def test_svd_matches_direction_sweep(self):
        rng = np.random.default_rng(13)
        definitions = [PLATE_CARREE, SINUSOIDAL, CASSINI, MERCATOR, parse_custom_projection(RANDOM_CUSTOM)]
        for index in range(100):
            definition = definitions[index % len(definitions)]
            p = random_points(rng, 1, lat_limit=1.0, lon_limit=1.0)[0]
            s_matrix = normalized_differential(definition, p)
            ind = ellipse_from_differential(s_matrix)
            sweep_max, sweep_min = direction_sweep_extremes(s_matrix, 10000)
            assert sweep_max == pytest.approx(ind.a, rel=1e-6)
            assert sweep_min == pytest.approx(ind.b, rel=1e-6)


class TestPrincipalTangents:
    def test_plate_carree_uses_graticule_directions(self):
        tangents = principal_tangents(PLATE_CARREE, GeoPoint(lat=math.pi / 4))
        assert {tuple(np.round(d, 12)) for d in tangents.domain} == {(1.0, 0.0), (0.0, 1.0)}
        assert abs(angle_between(*tangents.image) - math.pi / 2) < 1e-12
        assert not tangents.non_unique

    def test_mercator_is_non_unique(self):
        for lat in (-1.0, 0.0, 0.7):
            assert principal_tangents(MERCATOR, GeoPoint(lat=lat, lon=0.3)).non_unique

    def test_magnification_ratio(self):
        assert magnification_ratio(MERCATOR, GeoPoint(lat=math.pi / 3)) == pytest.approx(2.0, abs=1e-12)
        with pytest.raises(NotConformalError):
            magnification_ratio(PLATE_CARREE, GeoPoint(lat=math.pi / 3))


class TestAngleDeformation:
    @pytest.mark.parametrize("a, b, expected", [
        (1.0, 1.0, 0.0),
        (2.0, 1.0, 0.679673819),
        (3.0, 3.0, 0.0),
    ])
    def test_closed_form(self, a, b, expected):
        assert max_angle_deformation(a, b) == pytest.approx(expected, abs=1e-9)

    @pytest.mark.parametrize("a, b", [(2.0, 1.0), (1.3, 0.4), (5.0, 4.9)])
    def test_direction_sweep(self, a, b):
        assert sweep_angle_deformation(a, b, 10000) == pytest.approx(max_angle_deformation(a, b), abs=1e-4)

    @pytest.mark.parametrize("a, b", [(0.0, 1.0), (1.0, -1.0)])
    def test_nonpositive_inputs(self, a, b):
        with pytest.raises(DistortionError):
            max_angle_deformation(a, b)


class TestOrthographicDecomposition:
    def test_tilt_and_magnification(self):
        tilt, magnification = orthographic_decomposition(2.0, 1.0)
        assert tilt == pytest.approx(math.pi / 3)
        assert magnification == 2.0

    def test_unit_circle_maps_onto_the_ellipse(self):
        a, b = 1.7, 0.6
        for angle in np.linspace(0.0, 2 * math.pi, 37):
            u, v = apply_orthographic_decomposition(a, b, (math.cos(angle), math.sin(angle)))
            assert (u / a) ** 2 + (v / b) ** 2 == pytest.approx(1.0, abs=1e-12)

    def test_requires_ordered_axes(self):
        with pytest.raises(DistortionError):
            orthographic_decomposition(1.0, 2.0)


class TestParallelogramRatios:
    def test_plate_carree_equator(self):
        ratios = parallelogram_ratios(PLATE_CARREE, UNIT_SPHERE, GeoPoint(lat=0.0))
        assert ratios.h == pytest.approx(1.0)
        assert ratios.k == pytest.approx(1.0)
        assert ratios.theta_src == pytest.approx(math.pi / 2)
        assert ratios.theta_img == pytest.approx(math.pi / 2)

    def test_plate_carree_sixty_degrees(self):
        ratios = parallelogram_ratios(PLATE_CARREE, UNIT_SPHERE, GeoPoint(lat=math.pi / 3))
        assert ratios.k == pytest.approx(0.5, abs=1e-15)
        assert ratios.parallel_scale == pytest.approx(2.0)
        assert ratios.h == pytest.approx(1.0)

    @pytest.mark.parametrize("definition", [MERCATOR, STEREOGRAPHIC])
    def test_conformal_projections_have_equal_ratios(self, definition):
        rng = np.random.default_rng(17)
        for p in random_points(rng, 20):
            ratios = parallelogram_ratios(definition, UNIT_SPHERE, p)
            assert ratios.h == pytest.approx(ratios.k, rel=1e-12)

    def test_sinusoidal_net_is_oblique(self):
        ratios = parallelogram_ratios(SINUSOIDAL, UNIT_SPHERE, GeoPoint(lat=0.6, lon=0.8))
        assert ratios.theta_src == pytest.approx(math.pi / 2)
        assert abs(ratios.theta_img - math.pi / 2) > 0.1


class TestSpecialCaseAxes:
    @pytest.mark.parametrize("h, theta_src, theta_img, expected", [
        (1.0, math.pi / 2, math.pi / 2, (1.0, 1.0)),
        (2.0, math.pi / 2, math.pi / 2, (2.0, 2.0)),
        (1.0, math.pi / 2, math.pi / 3, (1.22474487, 0.70710678)),
    ])
    def test_values(self, h, theta_src, theta_img, expected):
        assert special_case_axes(h, theta_src, theta_img) == pytest.approx(expected, abs=1e-8)

    @pytest.mark.parametrize("h, theta_src, theta_img", [
        (1.0, math.pi / 2, math.pi / 3),
        (1.3, 1.1, 0.7),
        (0.8, 2.2, 1.9),
    ])
    def test_agrees_with_synthetic_linear_map(self, h, theta_src, theta_img):
        # unit sides symmetric about the x axis, stretched by h and opened to theta_img
        def pair(angle, length):
            half = 0.5 * angle
            return np.column_stack([
                length * np.array([math.cos(half), math.sin(half)]),
                length * np.array([math.cos(half), -math.sin(half)]),
            ])

        linear_map = pair(theta_img, h) @ np.linalg.inv(pair(theta_src, 1.0))
        ind = ellipse_from_differential(linear_map)
        a, b = special_case_axes(h, theta_src, theta_img)
        assert a == pytest.approx(ind.a, abs=1e-10)
        assert b == pytest.approx(ind.b, abs=1e-10)

    @pytest.mark.parametrize("h, theta_src, theta_img", [(1.0, 0.0, 1.0), (1.0, 1.0, math.pi), (0.0, 1.0, 1.0)])
    def test_invalid(self, h, theta_src, theta_img):
        with pytest.raises(DistortionError):
            special_case_axes(h, theta_src, theta_img)
