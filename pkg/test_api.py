import pytest
from fastapi.testclient import TestClient

from main import VERSION, app

client = TestClient(app)

BAND = [
    {"lat_deg": -60, "lon_deg": -30},
    {"lat_deg": -60, "lon_deg": 30},
    {"lat_deg": 60, "lon_deg": 30},
    {"lat_deg": 60, "lon_deg": -30},
]


def test_root_lists_the_catalog():
    body = client.get("/").json()
    assert body["version"] == VERSION
    assert "mercator" in body["projections"]


def test_health():
    assert client.get("/health").json() == {"status": "healthy", "service": "tissot-distortion-api", "version": VERSION}


class TestIndicatrixRoutes:
    def test_analyze(self):
        response = client.post("/api/indicatrix/analyze", json={"projection": "mercator", "lat_deg": 60})
        assert response.status_code == 200
        body = response.json()
        assert body["success"]
        assert body["indicatrix"]["a"] == pytest.approx(2.0, abs=1e-9)
        assert body["indicatrix"]["non_unique"]

    def test_analyze_custom_projection_object(self):
        projection = {"kind": "custom", "expressions": {"x": "m*cos(l)", "y": "l"}}
        response = client.post("/api/indicatrix/analyze", json={"projection": projection, "lat_deg": 30, "lon_deg": 20})
        assert response.json()["indicatrix"]["area_scale"] == pytest.approx(1.0, abs=1e-12)

    def test_unknown_projection(self):
        response = client.post("/api/indicatrix/analyze", json={"projection": "nosuch", "lat_deg": 10})
        assert response.status_code == 400

    def test_parse_error_reports_the_offset(self):
        response = client.post("/api/indicatrix/analyze", json={"projection": "x = q*", "lat_deg": 10})
        assert response.status_code == 400
        assert response.json()["detail"]["position"] == 4

    def test_projection_files_are_refused(self):
        response = client.post("/api/indicatrix/analyze", json={"projection": "/etc/proj.json", "lat_deg": 10})
        assert response.status_code == 400

    def test_existing_files_are_never_read(self, tmp_path):
        path = tmp_path / "mercator_config"
        path.write_text('{"kind": "mercator"}')
        body = {"projection": str(path), "lat_deg": 10}

        present = client.post("/api/indicatrix/analyze", json=body)
        path.unlink()
        absent = client.post("/api/indicatrix/analyze", json=body)

        assert present.status_code == 400
        assert "Unknown projection" in present.json()["detail"]
        assert present.json() == absent.json()

    def test_pole_is_a_domain_error(self):
        response = client.post("/api/indicatrix/analyze", json={"projection": "mercator", "lat_deg": 90})
        assert response.status_code == 422
        assert response.json()["success"] is False

    def test_invalid_mode(self):
        response = client.post("/api/indicatrix/analyze", json={"lat_deg": 10, "mode": "spline"})
        assert response.status_code == 400

    def test_field_csv(self):
        response = client.post("/api/indicatrix/field", json={"projection": "mercator", "graticule": {"lat_min": -90, "lat_max": 90}})
        assert response.status_code == 200
        assert response.headers["content-type"].startswith("text/csv")
        assert response.headers["x-skipped-samples"] == "14"
        assert len(response.text.splitlines()) == 36

    def test_render_svg(self):
        response = client.post("/api/indicatrix/render", json={"projection": "sinusoidal"})
        assert response.status_code == 200
        assert response.headers["content-type"].startswith("image/svg+xml")
        assert "<ellipse" in response.text

    def test_report(self):
        body = {"projection": "plate_carree", "vertices": BAND, "grid": {
            "x_min": -30, "x_max": 30, "nx": 7, "y_min": -60, "y_max": 60, "ny": 13,
        }}
        response = client.post("/api/indicatrix/report", json=body)
        assert response.status_code == 200
        assert response.json()["report"]["sup_a"] == pytest.approx(2.0, abs=1e-9)

    def test_report_without_nodes(self):
        body = {"vertices": BAND, "grid": {"x_min": 100, "x_max": 110, "nx": 3, "y_min": 0, "y_max": 10, "ny": 3}}
        response = client.post("/api/indicatrix/report", json=body)
        assert response.status_code == 422
        assert response.json()["error_type"] == "RegionError"


class TestOptimisationRoutes:
    def test_chebyshev_disk(self):
        response = client.post("/api/optimisation/chebyshev", json={"nodes": 33, "curvature": 1.0})
        assert response.status_code == 200
        assert response.json()["solution"]["u_centre"] == pytest.approx(-0.25, abs=1e-3)

    def test_chebyshev_node_limit(self):
        response = client.post("/api/optimisation/chebyshev", json={"nodes": 1000})
        assert response.status_code == 400

    def test_chebyshev_bad_mode(self):
        response = client.post("/api/optimisation/chebyshev", json={"nodes": 9, "boundary_mode": "dirichlet"})
        assert response.status_code == 400

    def test_darboux(self):
        vertices = [
            {"lat_deg": -5, "lon_deg": -5},
            {"lat_deg": -5, "lon_deg": 5},
            {"lat_deg": 5, "lon_deg": 5},
            {"lat_deg": 5, "lon_deg": -5},
        ]
        response = client.post(
            "/api/optimisation/darboux",
            json={"projection": "stereographic", "vertices": vertices, "nodes": 21},
        )
        assert response.status_code == 200
        assert response.json()["boundary_check"]["classification"] == "ellipse"


class TestQuasiconformalRoutes:
    def test_characteristics(self):
        response = client.post("/api/qc/characteristics", json={"map": {"affine": [[2, 0], [0, 1]]}, "x": 0.5, "y": 0.5})
        assert response.status_code == 200
        assert response.json()["characteristics"]["p"] == pytest.approx(2.0)

    def test_characteristics_outside_the_domain(self):
        response = client.post("/api/qc/characteristics", json={"map": {"affine": [[2, 0], [0, 1]]}, "x": 3.0, "y": 0.5})
        assert response.status_code == 422

    def test_sup_dilatation(self):
        body = {"map": {"expressions": {"u": "x + 0.1*x*x", "v": "y"}}, "nodes": 11}
        response = client.post("/api/qc/sup-dilatation", json=body)
        assert response.json()["sup_dilatation"] == pytest.approx(1.2)

    def test_invalid_map(self):
        response = client.post("/api/qc/sup-dilatation", json={"map": {"expressions": {"u": "x +", "v": "y"}}})
        assert response.status_code == 400

    def test_grotzsch(self):
        response = client.post("/api/qc/grotzsch", json={"src": "1x1", "dst": "2x1", "trials": 5})
        assert response.status_code == 200
        assert response.json()["K"] == 2.0

    def test_trial_limit(self):
        response = client.post("/api/qc/grotzsch", json={"trials": 5000})
        assert response.status_code == 400
