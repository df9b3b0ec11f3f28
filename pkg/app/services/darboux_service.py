import math

import numpy as np

from app.core.errors import RankDeficientError
from app.core.log import get_logger
from app.models.fields import BoundaryCheck, DarbouxConic, ScalarField

logger = get_logger(__name__)

BOUNDARY_SAMPLES = 720
INTERIOR_RINGS = 24
# relative to max(1, |level|)
SPREAD_TOLERANCE = 1e-12
DEGENERATE_EIGENVALUE = 1e-12


def _gradient_nodes(field: ScalarField) -> np.ndarray:
    """Masked nodes whose four neighbours are all masked."""
    mask = field.mask
    usable = np.zeros_like(mask)
    usable[1:-1, 1:-1] = mask[1:-1, 1:-1] & mask[1:-1, 2:] & mask[1:-1, :-2] & mask[2:, 1:-1] & mask[:-2, 1:-1]
    return usable


def fit_darboux_conic(lam: ScalarField, radius_m: float, radius_n: float) -> DarbouxConic:
    """
    Least-squares A, B minimizing the summed squared gradient of
    lambda - base (alpha^2 + beta^2) - A (alpha^2 - beta^2) - 2 B alpha beta
    over the in-region nodes, with gradients by central differences.
    """
    if not (radius_m > 0 and radius_n > 0):
        raise ValueError("principal radii must be positive")

    grid = lam.grid
    alpha, beta = grid.mesh()
    base = 1.0 / (4.0 * radius_m * radius_n)
    remainder = np.where(lam.mask, lam.values - base * (alpha * alpha + beta * beta), 0.0)

    usable = _gradient_nodes(lam)
    if not usable.any():
        raise RankDeficientError("No node has a full central-difference stencil inside the region")

    d_alpha = np.zeros_like(remainder)
    d_beta = np.zeros_like(remainder)
    d_alpha[:, 1:-1] = (remainder[:, 2:] - remainder[:, :-2]) / (2.0 * grid.hx)
    d_beta[1:-1, :] = (remainder[2:, :] - remainder[:-2, :]) / (2.0 * grid.hy)

    a_, b_ = alpha[usable], beta[usable]
    target = np.concatenate([d_alpha[usable], d_beta[usable]])
    # gradients of (alpha^2 - beta^2) and 2 alpha beta
    design = np.column_stack([
        np.concatenate([2.0 * a_, -2.0 * b_]),
        np.concatenate([2.0 * b_, 2.0 * a_]),
    ])

    normal = design.T @ design
    scale = max(float(np.abs(normal).max()), 1e-300)
    if abs(np.linalg.det(normal)) <= 1e-12 * scale * scale:
        raise RankDeficientError("Normal equations are singular; the gradient nodes do not span the plane")

    coefficients = np.linalg.solve(normal, design.T @ target)
    residual = target - design @ coefficients
    conic = DarbouxConic(
        A=float(coefficients[0]),
        B=float(coefficients[1]),
        radius_m=radius_m,
        radius_n=radius_n,
        nodes_used=int(usable.sum()),
        rms_residual=float(math.sqrt(np.mean(residual * residual))),
    )
    logger.info("✅ Fitted conic A=%.6e B=%.6e on %d nodes", conic.A, conic.B, conic.nodes_used)
    return conic


def classify_level_set(conic: DarbouxConic, level: float) -> str:
    eigenvalues = np.linalg.eigvalsh(conic.quadratic_form())
    tolerance = DEGENERATE_EIGENVALUE * max(1.0, float(np.abs(eigenvalues).max()))
    low, high = float(eigenvalues[0]), float(eigenvalues[1])

    if abs(low) <= tolerance or abs(high) <= tolerance:
        # no linear terms, so the parabolic type degenerates to parallel lines
        return "parabola"
    if low > 0:
        return "ellipse" if level > 0 else "empty"
    if high < 0:
        return "inverted_ellipse" if level < 0 else "empty"
    return "hyperbola"


def ellipse_boundary_check(conic: DarbouxConic, level: float) -> BoundaryCheck:
    """Sample the level curve and its interior and verify the curve is a constant-lambda boundary."""
    eigenvalues, eigenvectors = np.linalg.eigh(conic.quadratic_form())
    classification = classify_level_set(conic, level)
    pair = (float(eigenvalues[0]), float(eigenvalues[1]))

    if classification not in ("ellipse", "inverted_ellipse"):
        logger.warning("⚠️ Level %.6g of the conic is a %s, not an ellipse", level, classification)
        return BoundaryCheck(level=level, classification=classification, eigenvalues=pair)

    semi = np.sqrt(level / eigenvalues)
    angles = np.arange(BOUNDARY_SAMPLES) * (2.0 * math.pi / BOUNDARY_SAMPLES)

    def points(scale):
        local = np.vstack([semi[0] * scale * np.cos(angles), semi[1] * scale * np.sin(angles)])
        return eigenvectors @ local

    boundary = points(1.0)
    boundary_values = conic.evaluate(boundary[0], boundary[1])

    interior_values = [conic.evaluate(0.0, 0.0).reshape(1)]
    for ring in range(1, INTERIOR_RINGS):
        inner = points(ring / INTERIOR_RINGS)
        interior_values.append(conic.evaluate(inner[0], inner[1]))
    interior = np.concatenate(interior_values)

    spread = float(boundary_values.max() - boundary_values.min())
    interior_max, interior_min = float(interior.max()), float(interior.min())
    boundary_level = float(boundary_values.mean())
    tolerance = SPREAD_TOLERANCE * max(1.0, abs(level))
    if classification == "ellipse":
        extreme_ok = interior_max <= boundary_level + tolerance
    else:
        extreme_ok = interior_min >= boundary_level - tolerance

    return BoundaryCheck(
        level=level,
        classification=classification,
        eigenvalues=pair,
        semi_axes=(float(max(semi)), float(min(semi))),
        boundary_spread=spread,
        interior_max=interior_max,
        interior_min=interior_min,
        verified=spread < tolerance and extreme_ok,
    )
