"""
Finite-difference solver for  Laplacian(u) = K  with u = c on the region boundary.

u is the logarithm of the magnification of the optimal conformal map; the
returned magnification field is exp(u - c).

Two boundary treatments are available:
  ring      nodes of the region with a neighbour outside it are fixed at c
  crossing  the boundary value is imposed where grid lines cross the polygon,
            with the Shortley-Weller stencil on the shortened arms
"""

import math
from typing import Optional, Union

import numpy as np

from app.core.config import SOLVER_MAX_ITERATIONS, SOLVER_TOLERANCE
from app.core.errors import ConvergenceError, RegionError
from app.core.log import get_logger
from app.models.fields import ChebyshevResult, GridSpec, PlanarRegion, ScalarField
from app.models.geo import Surface
from app.services.surface_service import gaussian_curvature
from app.utils.geometry import distance_to_boundary, segment_boundary_crossing

logger = get_logger(__name__)

RING = "ring"
CROSSING = "crossing"
BOUNDARY_MODES = (RING, CROSSING)
SNAP_FRACTION = 1e-3
RESIDUAL_CHECK_EVERY = 10

# (row offset, column offset) for east, west, north, south
DIRECTIONS = ((0, 1), (0, -1), (1, 0), (-1, 0))


def _shift(array: np.ndarray, dj: int, di: int, fill: float = 0.0) -> np.ndarray:
    """shifted[j, i] = array[j + dj, i + di], padded with fill."""
    padded = np.pad(array, 1, mode="constant", constant_values=fill)
    ny, nx = array.shape
    return padded[1 + dj:1 + dj + ny, 1 + di:1 + di + nx]


class _Stencil:
    """Per-node coefficients of the discrete Laplacian; boundary nodes hold zero."""

    def __init__(self, shape):
        self.neighbour = {direction: np.zeros(shape) for direction in DIRECTIONS}
        self.diagonal = np.ones(shape)


def _ring_stencil(grid: GridSpec, inside: np.ndarray):
    outside = ~inside
    neighbour_outside = np.zeros_like(inside)
    for dj, di in DIRECTIONS:
        neighbour_outside |= _shift(outside.astype(float), dj, di, fill=1.0) > 0.5

    fixed = inside & neighbour_outside
    unknown = inside & ~fixed

    stencil = _Stencil(inside.shape)
    hx2, hy2 = grid.hx ** 2, grid.hy ** 2
    stencil.diagonal = np.where(unknown, 2.0 / hx2 + 2.0 / hy2, 1.0)
    for (dj, di), array in stencil.neighbour.items():
        weight = 1.0 / hx2 if di else 1.0 / hy2
        array[unknown] = weight
    return unknown, fixed, stencil


def _crossing_stencil(grid: GridSpec, region: PlanarRegion, inside: np.ndarray):
    xs, ys = grid.mesh()
    polygon = region.polygon()
    snap = SNAP_FRACTION * min(grid.hx, grid.hy)

    near = np.zeros_like(inside)
    near[inside] = distance_to_boundary(xs[inside], ys[inside], polygon) < snap
    fixed = inside & near
    unknown = inside & ~near
    ny, nx = inside.shape

    # arm lengths as fractions of the cell size; NaN marks a regular arm
    fractions = {direction: np.full(inside.shape, np.nan) for direction in DIRECTIONS}
    for j, i in zip(*np.nonzero(unknown)):
        for dj, di in DIRECTIONS:
            nj, ni = j + dj, i + di
            on_grid = 0 <= nj < ny and 0 <= ni < nx
            if on_grid and inside[nj, ni]:
                continue

            start = (xs[j, i], ys[j, i])
            end = (xs[j, i] + di * grid.hx, ys[j, i] + dj * grid.hy)
            theta = segment_boundary_crossing(start, end, polygon)
            if theta is None:
                if not on_grid:
                    raise RegionError("Grid does not cover the region: boundary lies outside the grid")
                theta = 1.0
            fractions[(dj, di)][j, i] = max(theta, SNAP_FRACTION)

    stencil = _Stencil(inside.shape)
    diagonal = np.zeros(inside.shape)
    for axis_pair, h in ((((0, 1), (0, -1)), grid.hx), (((1, 0), (-1, 0)), grid.hy)):
        first, second = axis_pair
        arm_first = np.where(np.isnan(fractions[first]), 1.0, fractions[first]) * h
        arm_second = np.where(np.isnan(fractions[second]), 1.0, fractions[second]) * h
        total = arm_first + arm_second

        for direction, arm in ((first, arm_first), (second, arm_second)):
            weight = 2.0 / (arm * total)
            regular = unknown & np.isnan(fractions[direction])
            stencil.neighbour[direction][regular] = weight[regular]
        diagonal += 2.0 / (arm_first * arm_second)

    stencil.diagonal = np.where(unknown, diagonal, 1.0)
    return unknown, fixed, stencil


def _neighbour_sum(stencil: _Stencil, u: np.ndarray) -> np.ndarray:
    total = np.zeros(u.shape)
    for (dj, di), weight in stencil.neighbour.items():
        total += weight * _shift(u, dj, di)
    return total


def _residual(stencil: _Stencil, u: np.ndarray, curvature: np.ndarray, unknown: np.ndarray) -> float:
    """Max-norm of Lu - K over the unknown nodes."""
    if not unknown.any():
        return 0.0
    laplacian = _neighbour_sum(stencil, u) - stencil.diagonal * u
    return float(np.abs(laplacian - curvature)[unknown].max())


def default_relaxation(grid: GridSpec) -> float:
    return 2.0 / (1.0 + math.sin(math.pi / max(grid.nx, grid.ny)))


def chebyshev_solve(
    region: PlanarRegion,
    grid: GridSpec,
    curvature: Union[float, np.ndarray, None] = None,
    boundary_value: float = 0.0,
    boundary_mode: str = CROSSING,
    surface: Optional[Surface] = None,
    central_lat: float = 0.0,
    tolerance: Optional[float] = None,
    max_iterations: Optional[int] = None,
    relaxation: Optional[float] = None,
) -> ChebyshevResult:
    """
    Red-black SOR starting from u = c.

    curvature defaults to the Gaussian curvature of the surface at the central
    latitude. Convergence is declared when |Lu - K| < tolerance on every unknown
    node. A ConvergenceError carries the residual after the last iteration.
    """
    if boundary_mode not in BOUNDARY_MODES:
        raise ValueError(f"Unknown boundary mode {boundary_mode!r}. Allowed: {', '.join(BOUNDARY_MODES)}")

    tolerance = SOLVER_TOLERANCE if tolerance is None else tolerance
    max_iterations = SOLVER_MAX_ITERATIONS if max_iterations is None else max_iterations
    omega = default_relaxation(grid) if relaxation is None else relaxation

    shape = (grid.ny, grid.nx)
    if curvature is None:
        curvature = gaussian_curvature(surface or Surface.sphere(), central_lat)
    curvature_field = np.broadcast_to(np.asarray(curvature, dtype=float), shape)
    if not np.all(np.isfinite(curvature_field)):
        raise ValueError("curvature must be finite")

    xs, ys = grid.mesh()
    inside = region.contains(xs, ys)
    if not inside.any():
        raise RegionError("Region contains no grid nodes")

    if boundary_mode == RING:
        unknown, fixed, stencil = _ring_stencil(grid, inside)
    else:
        unknown, fixed, stencil = _crossing_stencil(grid, region, inside)

    curvature_field = np.where(unknown, curvature_field, 0.0)
    # relax v = u - c, which vanishes on the boundary
    v = np.zeros(shape)

    row, col = np.indices(shape)
    colours = [unknown & ((row + col) % 2 == 0), unknown & ((row + col) % 2 == 1)]

    residual = _residual(stencil, v, curvature_field, unknown)
    iterations = 0
    while residual >= tolerance:
        if iterations >= max_iterations:
            logger.error("❌ Relaxation stopped at residual %.3e", residual)
            raise ConvergenceError("Chebyshev solver did not converge", residual, iterations)

        for colour in colours:
            update = (_neighbour_sum(stencil, v) - curvature_field) / stencil.diagonal
            v = np.where(colour, (1.0 - omega) * v + omega * update, v)
        iterations += 1

        if iterations % RESIDUAL_CHECK_EVERY == 0 or iterations >= max_iterations:
            residual = _residual(stencil, v, curvature_field, unknown)
            logger.debug("Iteration %d residual %.3e", iterations, residual)

    logger.info(
        "✅ Chebyshev solve converged: %d unknowns, %d iterations, residual %.3e",
        int(unknown.sum()),
        iterations,
        residual,
    )

    values = np.where(inside, v, np.nan)
    return ChebyshevResult(
        u=ScalarField.masked(grid, values + boundary_value, inside),
        magnification=ScalarField.masked(grid, np.exp(values), inside),
        boundary_value=float(boundary_value),
        boundary_mode=boundary_mode,
        iterations=iterations,
        residual=residual,
        relaxation=omega,
        unknowns=int(unknown.sum()),
    )
