"""
Command-line entry point for the distortion toolkit.

Angles are degrees on the command line and in every file; reports are JSON on
stdout (or --out), fields are CSV and plots SVG.

Examples:
  python scripts/tissot_cli.py analyze --projection mercator --lat 60 --lon 0
  python scripts/tissot_cli.py field --projection cassini --out cassini.csv
  python scripts/tissot_cli.py render --projection tissot --center-lat 45 --lat-min 30 --lat-max 60 --lat-step 5
  python scripts/tissot_cli.py report --projection sinusoidal --band=-60,60,-90,90
  python scripts/tissot_cli.py chebyshev --grid 129 --curvature 1
  python scripts/tissot_cli.py grotzsch --src 1x1 --dst 2x1 --trials 100 --seed 42

Exit status: 0 on success, 1 on usage errors, 2 on domain or convergence errors.
"""

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

# Allow script to import app modules when run from project root or scripts folder
PROJECT_ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(PROJECT_ROOT))

from app.core.config import DEFAULT_SURFACE
from app.core.errors import ConvergenceError, DistortionError, ExpressionParseError
from app.core.log import get_logger, setup_logging
from app.models.fields import GridSpec, PlanarRegion, RegionSpec
from app.models.geo import GeoPoint, Surface
from app.models.planar import Rectangle, RectanglePair
from app.models.render import GraticuleSpec, RenderOptions
from app.services.chebyshev_service import BOUNDARY_MODES, CROSSING, chebyshev_solve
from app.services.darboux_service import ellipse_boundary_check, fit_darboux_conic
from app.services.distortion_service import distortion_report, planar_lambda_field, planar_region_from_geo
from app.services.export_service import export_csv, export_field_csv
from app.services.field_service import sample_field
from app.services.projection_service import resolve_projection
from app.services.quasiconformal_service import (
    characteristics,
    default_grid,
    grotzsch_affine,
    grotzsch_experiment,
    limit_ratio,
    parse_planar_map,
    planar_map_from_config,
    sup_dilatation,
)
from app.services.report_service import characteristics_payload, chebyshev_payload, darboux_payload, indicatrix_payload
from app.services.surface_service import principal_radii
from app.services.svg_service import render_svg

logger = get_logger("app.cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2


class UsageError(Exception):
    pass


class CommandParser(argparse.ArgumentParser):
    """argparse with usage errors raised instead of exiting with status 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def to_json(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def load_json(path: str) -> Dict[str, Any]:
    if not os.path.isfile(path):
        raise UsageError(f"File not found: {path}")
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def parse_floats(text: str, count: int, name: str) -> List[float]:
    try:
        values = [float(part) for part in text.split(",")]
    except ValueError:
        raise UsageError(f"{name} must be {count} comma-separated numbers, got {text!r}")
    if len(values) != count:
        raise UsageError(f"{name} must be {count} comma-separated numbers, got {text!r}")
    return values


def load_surface(args) -> Surface:
    name = args.surface or DEFAULT_SURFACE
    if name.endswith(".json"):
        return Surface.from_config(load_json(name))
    return Surface.preset(name)


def load_projection(args):
    center = GeoPoint.from_degrees(args.center_lat, args.center_lon)
    return resolve_projection(args.projection, load_surface(args), center)


def load_region(args) -> RegionSpec:
    if args.region:
        return RegionSpec.from_config(load_json(args.region))
    if args.band:
        lat_min, lat_max, lon_min, lon_max = parse_floats(args.band, 4, "--band")
        return RegionSpec.band(lat_min, lat_max, lon_min, lon_max)
    raise UsageError("A region is required: pass --region FILE or --band=LAT_MIN,LAT_MAX,LON_MIN,LON_MAX")


def load_grid(text: Optional[str], vertices, default_nodes: int) -> GridSpec:
    if not text:
        return GridSpec.covering(vertices, default_nodes)
    if "," not in text:
        return GridSpec.covering(vertices, int(text))
    return GridSpec.parse(text)


def graticule_from(args) -> GraticuleSpec:
    return GraticuleSpec(
        lat_min=args.lat_min,
        lat_max=args.lat_max,
        lat_step=args.lat_step,
        lon_min=args.lon_min,
        lon_max=args.lon_max,
        lon_step=args.lon_step,
        every=args.every,
        ellipse_scale=args.scale,
    )


def run_analyze(args) -> str:
    definition = load_projection(args)
    point = GeoPoint.from_degrees(args.lat, args.lon)
    return to_json(indicatrix_payload(definition, point, args.mode))


def run_field(args) -> str:
    definition = load_projection(args)
    sampled = sample_field(definition, graticule_from(args))
    return export_csv(sampled.samples)


def run_render(args) -> str:
    definition = load_projection(args)
    grat = graticule_from(args)
    sampled = sample_field(definition, grat)
    if not sampled.samples:
        raise DistortionError("No graticule intersection lies in the projection's domain")
    return render_svg(sampled.samples, grat, RenderOptions(projection=definition))


def run_report(args) -> str:
    definition = load_projection(args)
    region = load_region(args)
    grid = load_grid(args.grid, region.polygon_degrees(), 41)
    return to_json({"report": distortion_report(definition, region, grid).model_dump()})


def run_chebyshev(args) -> str:
    surface = load_surface(args)
    central_lat = 0.0
    if args.region:
        config = load_json(args.region)
        vertices = config.get("vertices") or []
        if vertices and "lat_deg" in vertices[0]:
            geo_region = RegionSpec.from_config(config)
            region = planar_region_from_geo(geo_region, surface)
            central_lat = geo_region.center.lat
        else:
            region = PlanarRegion.from_config(config)
    else:
        region = PlanarRegion.disk(args.radius)

    grid = load_grid(args.grid, region.polygon(), 65)
    result = chebyshev_solve(
        region,
        grid,
        curvature=args.curvature,
        boundary_value=args.boundary_value,
        boundary_mode=args.boundary_mode,
        surface=surface,
        central_lat=central_lat,
    )
    if args.csv:
        write_output(export_field_csv(result.u), args.csv)
    return to_json({"solution": chebyshev_payload(result)})


def run_darboux(args) -> str:
    definition = load_projection(args)
    region = load_region(args)
    nodes = int(args.grid) if args.grid else 41
    field = planar_lambda_field(definition, region, nodes)
    radius_m, radius_n = principal_radii(definition.surface, region.center.lat)
    conic = fit_darboux_conic(field, radius_m, radius_n)
    level = args.level if args.level is not None else float(field.masked_values().max())
    return to_json(darboux_payload(conic, ellipse_boundary_check(conic, level)))


def run_qc(args) -> str:
    domain = None
    if args.domain:
        x0, x1, y0, y1 = parse_floats(args.domain, 4, "--domain")
        domain = Rectangle(x0=x0, x1=x1, y0=y0, y1=y1)

    if args.map.endswith(".json"):
        planar_map = planar_map_from_config(load_json(args.map))
    else:
        planar_map = parse_planar_map(args.map, domain)

    if args.at:
        x, y = parse_floats(args.at, 2, "--at")
        payload = {"characteristics": characteristics_payload(characteristics(planar_map, x, y))}
        if args.limit_size:
            payload["limit_ratio"] = limit_ratio(planar_map, x, y, args.limit_size)
        return to_json(payload)

    nodes = int(args.grid) if args.grid else 21
    return to_json({"sup_dilatation": sup_dilatation(planar_map, default_grid(planar_map.domain, nodes)), "nodes": nodes})


def run_grotzsch(args) -> str:
    pair = RectanglePair.parse(args.src, args.dst)
    _, affine_k = grotzsch_affine(pair)
    report = grotzsch_experiment(pair, args.trials, args.seed, nodes=int(args.grid) if args.grid else 17)
    return to_json({"K": affine_k, "experiment": report.summary()})


def write_output(text: str, path: Optional[str]) -> None:
    if not path:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
    logger.info("✅ Wrote %s", path)


def add_projection_flags(parser):
    parser.add_argument("--projection", default="plate_carree", help="catalog name, .json config, or 'x = ...; y = ...'")
    parser.add_argument("--center-lat", type=float, default=0.0, help="central latitude in degrees")
    parser.add_argument("--center-lon", type=float, default=0.0, help="central (mean) meridian in degrees")


def add_graticule_flags(parser):
    parser.add_argument("--lat-min", type=float, default=-60.0)
    parser.add_argument("--lat-max", type=float, default=60.0)
    parser.add_argument("--lat-step", type=float, default=30.0)
    parser.add_argument("--lon-min", type=float, default=-90.0)
    parser.add_argument("--lon-max", type=float, default=90.0)
    parser.add_argument("--lon-step", type=float, default=30.0)
    parser.add_argument("--every", type=int, default=1, help="draw an indicatrix at every k-th intersection")
    parser.add_argument("--scale", type=float, default=None, help="ellipse display scale")


def add_region_flags(parser):
    parser.add_argument("--region", help="region .json file")
    parser.add_argument("--band", help="LAT_MIN,LAT_MAX,LON_MIN,LON_MAX in degrees (use --band=...)")


def build_parser() -> CommandParser:
    parser = CommandParser(prog="tissot_cli", description="Map projection distortion toolkit")
    parser.add_argument("--surface", default=None, help="surface preset name or .json config")
    parser.add_argument("--out", default=None, help="write output to this file instead of stdout")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--grid", default=None, help="node count or x_min,x_max,nx,y_min,y_max,ny (use --grid=...)")
    parser.add_argument("--log-level", default=None)

    commands = parser.add_subparsers(dest="command", metavar="command")
    commands.required = True

    # shared flags may also follow the subcommand
    shared = CommandParser(add_help=False)
    shared.add_argument("--surface", default=argparse.SUPPRESS)
    shared.add_argument("--out", default=argparse.SUPPRESS)
    shared.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    shared.add_argument("--grid", default=argparse.SUPPRESS)
    shared.add_argument("--log-level", default=argparse.SUPPRESS)

    analyze = commands.add_parser("analyze", parents=[shared], help="indicatrix at one point")
    add_projection_flags(analyze)
    analyze.add_argument("--lat", type=float, required=True)
    analyze.add_argument("--lon", type=float, default=0.0)
    analyze.add_argument("--mode", choices=("analytic", "numeric"), default="analytic")
    analyze.set_defaults(handler=run_analyze)

    field = commands.add_parser("field", parents=[shared], help="indicatrix field as CSV")
    add_projection_flags(field)
    add_graticule_flags(field)
    field.set_defaults(handler=run_field)

    render = commands.add_parser("render", parents=[shared], help="indicatrix field as SVG")
    add_projection_flags(render)
    add_graticule_flags(render)
    render.set_defaults(handler=run_render)

    report = commands.add_parser("report", parents=[shared], help="distortion summary over a region")
    add_projection_flags(report)
    add_region_flags(report)
    report.set_defaults(handler=run_report)

    chebyshev = commands.add_parser("chebyshev", parents=[shared], help="optimal conformal magnification")
    chebyshev.add_argument("--region", help="planar or geographic region .json file (default: unit disk)")
    chebyshev.add_argument("--radius", type=float, default=1.0, help="disk radius when no region is given")
    chebyshev.add_argument("--curvature", type=float, default=None, help="default: Gaussian curvature at the centre")
    chebyshev.add_argument("--boundary-value", type=float, default=0.0)
    chebyshev.add_argument("--boundary-mode", choices=BOUNDARY_MODES, default=CROSSING)
    chebyshev.add_argument("--csv", default=None, help="also write the solution field to this CSV file")
    chebyshev.set_defaults(handler=run_chebyshev)

    darboux = commands.add_parser("darboux", parents=[shared], help="fit the quadratic scale-error model")
    add_projection_flags(darboux)
    add_region_flags(darboux)
    darboux.add_argument("--level", type=float, default=None, help="level for the boundary check (default: max lambda)")
    darboux.set_defaults(handler=run_darboux)

    qc = commands.add_parser("qc", parents=[shared], help="dilatation of a planar map")
    qc.add_argument("--map", required=True, help=".json map config or 'u = ...; v = ...'")
    qc.add_argument("--domain", default=None, help="X0,X1,Y0,Y1 for inline maps (default unit square)")
    qc.add_argument("--at", default=None, help="X,Y: report characteristics at this point")
    qc.add_argument("--limit-size", type=float, default=None, help="also report the limit ratio for this ellipse size")
    qc.set_defaults(handler=run_qc)

    grotzsch = commands.add_parser("grotzsch", parents=[shared], help="rectangle dilatation experiment")
    grotzsch.add_argument("--src", required=True, help="source rectangle WxH")
    grotzsch.add_argument("--dst", required=True, help="target rectangle WxH")
    grotzsch.add_argument("--trials", type=int, default=100)
    grotzsch.set_defaults(handler=run_grotzsch)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as error:
        print(error, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exit_request:
        return int(exit_request.code or 0)

    setup_logging(args.log_level)

    try:
        output = args.handler(args)
    except UsageError as error:
        print(f"❌ {error}", file=sys.stderr)
        return EXIT_USAGE
    except ExpressionParseError as error:
        print(f"❌ {error}", file=sys.stderr)
        return EXIT_USAGE
    except (DistortionError, ConvergenceError) as error:
        print(f"❌ {error}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ValueError, OSError) as error:
        print(f"❌ {error}", file=sys.stderr)
        return EXIT_USAGE

    write_output(output, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
