import math
from typing import Any, Dict, Optional, Tuple

import numpy as np

from app.core.config import CONFORMAL_TOLERANCE
from app.core.errors import DegeneratePointError, OutOfDomainError
from app.core.log import get_logger
from app.models.fields import GridSpec
from app.models.planar import (
    PLANAR_VARIABLES,
    Characteristics,
    GrotzschReport,
    PlanarMap,
    PlanarMapKind,
    Rectangle,
    RectanglePair,
    SineBumps,
)
from app.utils.expression_parser import compile_expression, format_expression, parse_assignments

logger = get_logger(__name__)

DEFAULT_NODES = 21
BUMP_MODES = 3
AMPLITUDE_FRACTION = 0.2
MAX_HALVINGS = 12


def parse_planar_map(text: str, domain: Optional[Rectangle] = None) -> PlanarMap:
    """From 'u = ...; v = ...' in the variables x and y."""
    trees = parse_assignments(text, ("u", "v"), PLANAR_VARIABLES)
    return PlanarMap(
        kind=PlanarMapKind.EXPRESSIONS,
        domain=domain or Rectangle(),
        expressions={name: format_expression(tree) for name, tree in trees.items()},
    )


def planar_map_from_config(config: Dict[str, Any]) -> PlanarMap:
    """{expressions: {u, v}, domain: {x0, x1, y0, y1}} or {affine: [[..],[..]], offset: [tx, ty]}."""
    domain = Rectangle(**config["domain"]) if config.get("domain") else Rectangle()
    if config.get("expressions"):
        expressions = config["expressions"]
        return parse_planar_map(f"u = {expressions.get('u', '')}; v = {expressions.get('v', '')}", domain)
    if config.get("affine"):
        return PlanarMap.affine(config["affine"], config.get("offset", (0.0, 0.0)), domain)
    raise ValueError("planar map config needs 'expressions' or 'affine'")


def _bump_terms(bumps: SineBumps, domain: Rectangle, x, y):
    """Displacements and their x, y derivatives, vectorized over points."""
    s = (np.asarray(x, dtype=float) - domain.x0) / domain.width
    t = (np.asarray(y, dtype=float) - domain.y0) / domain.height
    results = []
    for table in (bumps.u_coefficients, bumps.v_coefficients):
        value = np.zeros(np.broadcast(s, t).shape)
        d_x = np.zeros_like(value)
        d_y = np.zeros_like(value)
        for p, row in enumerate(table, start=1):
            sin_s, cos_s = np.sin(p * math.pi * s), np.cos(p * math.pi * s)
            for q, coefficient in enumerate(row, start=1):
                if coefficient == 0:
                    continue
                sin_t, cos_t = np.sin(q * math.pi * t), np.cos(q * math.pi * t)
                value += coefficient * sin_s * sin_t
                d_x += coefficient * (p * math.pi / domain.width) * cos_s * sin_t
                d_y += coefficient * (q * math.pi / domain.height) * sin_s * cos_t
        results.append((value, d_x, d_y))
    return results


def evaluate(planar_map: PlanarMap, x: float, y: float) -> Tuple[float, float]:
    if planar_map.kind == PlanarMapKind.EXPRESSIONS:
        u_expr = compile_expression(planar_map.expressions["u"], PLANAR_VARIABLES)
        v_expr = compile_expression(planar_map.expressions["v"], PLANAR_VARIABLES)
        return u_expr.value(x, y), v_expr.value(x, y)

    (m11, m12), (m21, m22) = planar_map.matrix
    u = m11 * x + m12 * y + planar_map.offset[0]
    v = m21 * x + m22 * y + planar_map.offset[1]
    if planar_map.kind == PlanarMapKind.PERTURBED:
        (du, _, _), (dv, _, _) = _bump_terms(planar_map.bumps, planar_map.domain, x, y)
        u, v = u + float(du), v + float(dv)
    return u, v


def differential_grid(planar_map: PlanarMap, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Jacobians with shape xs.shape + (2, 2)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    jac = np.zeros(xs.shape + (2, 2))

    if planar_map.kind == PlanarMapKind.EXPRESSIONS:
        u_expr = compile_expression(planar_map.expressions["u"], PLANAR_VARIABLES)
        v_expr = compile_expression(planar_map.expressions["v"], PLANAR_VARIABLES)
        for index in np.ndindex(xs.shape):
            x, y = xs[index], ys[index]
            jac[index] = (
                (u_expr.partial(0, x, y), u_expr.partial(1, x, y)),
                (v_expr.partial(0, x, y), v_expr.partial(1, x, y)),
            )
        return jac

    jac[...] = np.array(planar_map.matrix, dtype=float)
    if planar_map.kind == PlanarMapKind.PERTURBED:
        (_, ux, uy), (_, vx, vy) = _bump_terms(planar_map.bumps, planar_map.domain, xs, ys)
        jac[..., 0, 0] += ux
        jac[..., 0, 1] += uy
        jac[..., 1, 0] += vx
        jac[..., 1, 1] += vy
    return jac


def dilatation(jac: np.ndarray) -> np.ndarray:
    """Singular value ratio of 2x2 Jacobians via |f_z| and |f_zbar|; inf where orientation fails."""
    a, b = jac[..., 0, 0], jac[..., 0, 1]
    c, d = jac[..., 1, 0], jac[..., 1, 1]
    f_z = 0.5 * np.hypot(a + d, c - b)
    f_zbar = 0.5 * np.hypot(a - d, c + b)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (f_z + f_zbar) / (f_z - f_zbar)
    return np.where(a * d - b * c > 0, ratio, np.inf)


def _axis_angle(vector) -> float:
    angle = math.atan2(vector[1], vector[0])
    while angle <= -0.5 * math.pi:
        angle += math.pi
    while angle > 0.5 * math.pi:
        angle -= math.pi
    return angle


def characteristics_of(jac: np.ndarray) -> Characteristics:
    determinant = float(np.linalg.det(jac))
    if determinant <= 0:
        raise DegeneratePointError(f"Jacobian determinant {determinant:.6g} is not positive")

    _, singular_values, vt_matrix = np.linalg.svd(jac)
    p = float(singular_values[0] / singular_values[1])

    (a, b), (c, d) = jac
    f_z = 0.5 * complex(a + d, c - b)
    f_zbar = 0.5 * complex(a - d, c + b)
    mu = f_zbar / f_z

    if p - 1.0 < CONFORMAL_TOLERANCE:
        return Characteristics(p=p, theta=0.0, ellipse_angle=0.0, mu_re=mu.real, mu_im=mu.imag, non_unique=True)

    theta = _axis_angle(vt_matrix[0])
    return Characteristics(
        p=p,
        theta=theta,
        ellipse_angle=_axis_angle((-math.sin(theta), math.cos(theta))),
        mu_re=mu.real,
        mu_im=mu.imag,
    )


def characteristics(planar_map: PlanarMap, x: float, y: float) -> Characteristics:
    if not planar_map.domain.contains(x, y):
        raise OutOfDomainError(f"({x}, {y}) is outside the map domain")
    return characteristics_of(differential_grid(planar_map, np.array(x), np.array(y)))


def default_grid(domain: Rectangle, nodes: int = DEFAULT_NODES) -> GridSpec:
    return GridSpec(x_min=domain.x0, x_max=domain.x1, nx=nodes, y_min=domain.y0, y_max=domain.y1, ny=nodes)


def _dilatation_field(planar_map: PlanarMap, grid: GridSpec) -> np.ndarray:
    domain = planar_map.domain
    if not (domain.contains(grid.x_min, grid.y_min) and domain.contains(grid.x_max, grid.y_max)):
        raise OutOfDomainError("Grid extends beyond the map domain")
    xs, ys = grid.mesh()
    return dilatation(differential_grid(planar_map, xs, ys))


def sup_dilatation(planar_map: PlanarMap, grid: Optional[GridSpec] = None) -> float:
    grid = grid or default_grid(planar_map.domain)
    field = _dilatation_field(planar_map, grid)
    if not np.all(np.isfinite(field)):
        raise DegeneratePointError("Map is singular or orientation-reversing at some grid node")
    return float(field.max())


def limit_ratio(planar_map: PlanarMap, x: float, y: float, size: float, samples: int = 720) -> float:
    """
    max |f(z) - f(z0)| / min |f(z) - f(z0)| over the small source ellipse of
    major semi-axis size whose image is nearly a circle; tends to 1 as size -> 0.
    """
    chars = characteristics(planar_map, x, y)
    major = np.array([math.cos(chars.ellipse_angle), math.sin(chars.ellipse_angle)])
    minor = np.array([-major[1], major[0]])

    angles = np.arange(samples) * (2.0 * math.pi / samples)
    centre = np.array(evaluate(planar_map, x, y))
    distances = []
    for angle in angles:
        point = np.array([x, y]) + size * math.cos(angle) * major + (size / chars.p) * math.sin(angle) * minor
        distances.append(np.linalg.norm(np.array(evaluate(planar_map, point[0], point[1])) - centre))
    return float(max(distances) / min(distances))


def grotzsch_affine(pair: RectanglePair) -> Tuple[PlanarMap, float]:
    """The corner-respecting affine map between the rectangles and its dilatation."""
    scale_x = pair.dst_width / pair.src_width
    scale_y = pair.dst_height / pair.src_height
    ratio = pair.stretch_ratio
    planar_map = PlanarMap.affine(
        ((scale_x, 0.0), (0.0, scale_y)),
        domain=Rectangle(x0=0.0, x1=pair.src_width, y0=0.0, y1=pair.src_height),
    )
    return planar_map, max(ratio, 1.0 / ratio)


def _random_bumps(rng: np.random.Generator, amplitude: float, modes: int) -> SineBumps:
    tables = []
    for _ in range(2):
        table = rng.uniform(-1.0, 1.0, size=(modes, modes))
        total = float(np.abs(table).sum())
        if total > 0:
            table *= amplitude / total
        tables.append(table.tolist())
    return SineBumps(u_coefficients=tables[0], v_coefficients=tables[1])


def perturbed_map(affine_map: PlanarMap, bumps: SineBumps) -> PlanarMap:
    return PlanarMap(
        kind=PlanarMapKind.PERTURBED,
        domain=affine_map.domain,
        matrix=affine_map.matrix,
        offset=affine_map.offset,
        bumps=bumps,
    )


def grotzsch_experiment(
    pair: RectanglePair,
    trials: int,
    seed: int = 0,
    nodes: int = 17,
    modes: int = BUMP_MODES,
    amplitude_fraction: float = AMPLITUDE_FRACTION,
) -> GrotzschReport:
    """
    Sup dilatation of corner-fixing perturbations of the affine map.

    Each trial adds sine bumps of total amplitude at most amplitude_fraction
    times the target cell size; a trial whose Jacobian determinant is not
    positive on the grid is halved until it is.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")

    affine_map, affine_k = grotzsch_affine(pair)
    grid = default_grid(affine_map.domain, nodes)
    cell = min(pair.dst_width, pair.dst_height) / (nodes - 1)
    rng = np.random.default_rng(seed)

    sups = []
    rejected = 0
    for trial in range(trials):
        amplitude = amplitude_fraction * cell
        bumps = _random_bumps(rng, amplitude, modes)
        for _ in range(MAX_HALVINGS):
            field = _dilatation_field(perturbed_map(affine_map, bumps), grid)
            if np.all(np.isfinite(field)):
                break
            rejected += 1
            logger.warning("⚠️ Trial %d lost injectivity; halving its amplitude", trial)
            bumps = SineBumps(
                u_coefficients=(0.5 * np.asarray(bumps.u_coefficients)).tolist(),
                v_coefficients=(0.5 * np.asarray(bumps.v_coefficients)).tolist(),
            )
        else:
            field = _dilatation_field(affine_map, grid)
        sups.append(float(field.max()))

    best = int(np.argmin(sups))
    report = GrotzschReport(
        seed=seed,
        trials=trials,
        affine_k=affine_k,
        min_sup_dilatation=sups[best],
        best_trial=best,
        rejected_perturbations=rejected,
        sup_dilatations=sups,
    )
    logger.info("✅ Grötzsch experiment: K=%.12g, min sup over %d trials %.12g", affine_k, trials, report.min_sup_dilatation)
    return report
