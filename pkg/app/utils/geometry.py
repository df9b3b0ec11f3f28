from typing import Optional, Sequence, Tuple

import numpy as np

EDGE_TOLERANCE = 1e-9


def as_vertex_array(vertices: Sequence[Tuple[float, float]]) -> np.ndarray:
    array = np.asarray(vertices, dtype=float)
    if array.ndim != 2 or array.shape[1] != 2:
        raise ValueError("polygon vertices must be (x, y) pairs")
    if len(array) > 1 and np.array_equal(array[0], array[-1]):
        array = array[:-1]
    return array


def _edges(polygon: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    return polygon, np.roll(polygon, -1, axis=0)


def points_in_polygon(x, y, vertices) -> np.ndarray:
    """Even-odd rule, with points on an edge counted as inside."""
    polygon = as_vertex_array(vertices)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)

    extent = float(np.ptp(polygon, axis=0).max()) if len(polygon) else 0.0
    tolerance = EDGE_TOLERANCE * max(extent, 1.0)

    inside = np.zeros(x.shape, dtype=bool)
    on_edge = np.zeros(x.shape, dtype=bool)
    starts, ends = _edges(polygon)

    with np.errstate(divide="ignore", invalid="ignore"):
        for (x1, y1), (x2, y2) in zip(starts, ends):
            straddles = (y1 > y) != (y2 > y)
            crossing_x = x1 + (x2 - x1) * (y - y1) / (y2 - y1)
            inside ^= straddles & (x < crossing_x)

            dx, dy = x2 - x1, y2 - y1
            length2 = dx * dx + dy * dy
            if length2 == 0:
                t = np.zeros(x.shape)
            else:
                t = np.clip(((x - x1) * dx + (y - y1) * dy) / length2, 0.0, 1.0)
            on_edge |= np.hypot(x - x1 - t * dx, y - y1 - t * dy) <= tolerance

    return inside | on_edge


def distance_to_boundary(x, y, vertices) -> np.ndarray:
    polygon = as_vertex_array(vertices)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)

    distance = np.full(x.shape, np.inf)
    for (x1, y1), (x2, y2) in zip(*_edges(polygon)):
        dx, dy = x2 - x1, y2 - y1
        length2 = dx * dx + dy * dy
        t = np.zeros(x.shape) if length2 == 0 else np.clip(((x - x1) * dx + (y - y1) * dy) / length2, 0.0, 1.0)
        distance = np.minimum(distance, np.hypot(x - x1 - t * dx, y - y1 - t * dy))
    return distance


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def is_simple_polygon(vertices) -> bool:
    """At least three distinct vertices and no two non-adjacent edges touching."""
    polygon = as_vertex_array(vertices)
    count = len(polygon)
    if count < 3:
        return False

    starts, ends = _edges(polygon)
    if np.any(np.all(starts == ends, axis=1)):
        return False

    indices = np.arange(count)
    for i in range(count):
        p1, p2 = starts[i], ends[i]
        others = indices[(indices != i) & (indices != (i + 1) % count) & (indices != (i - 1) % count)]
        if len(others) == 0:
            continue
        q1, q2 = starts[others], ends[others]

        d1 = _cross(p2[0] - p1[0], p2[1] - p1[1], q1[:, 0] - p1[0], q1[:, 1] - p1[1])
        d2 = _cross(p2[0] - p1[0], p2[1] - p1[1], q2[:, 0] - p1[0], q2[:, 1] - p1[1])
        d3 = _cross(q2[:, 0] - q1[:, 0], q2[:, 1] - q1[:, 1], p1[0] - q1[:, 0], p1[1] - q1[:, 1])
        d4 = _cross(q2[:, 0] - q1[:, 0], q2[:, 1] - q1[:, 1], p2[0] - q1[:, 0], p2[1] - q1[:, 1])

        if np.any((d1 * d2 < 0) & (d3 * d4 < 0)):
            return False

        # collinear touching
        touching = (
            ((d1 == 0) & _within(q1, p1, p2))
            | ((d2 == 0) & _within(q2, p1, p2))
            | ((d3 == 0) & _within_rows(p1, q1, q2))
            | ((d4 == 0) & _within_rows(p2, q1, q2))
        )
        if np.any(touching):
            return False

    if count == 3:
        a, b, c = polygon
        return _cross(b[0] - a[0], b[1] - a[1], c[0] - a[0], c[1] - a[1]) != 0
    return True


def _within(points: np.ndarray, p1: np.ndarray, p2: np.ndarray) -> np.ndarray:
    return (
        (np.minimum(p1[0], p2[0]) <= points[:, 0])
        & (points[:, 0] <= np.maximum(p1[0], p2[0]))
        & (np.minimum(p1[1], p2[1]) <= points[:, 1])
        & (points[:, 1] <= np.maximum(p1[1], p2[1]))
    )


def _within_rows(point: np.ndarray, q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    return (
        (np.minimum(q1[:, 0], q2[:, 0]) <= point[0])
        & (point[0] <= np.maximum(q1[:, 0], q2[:, 0]))
        & (np.minimum(q1[:, 1], q2[:, 1]) <= point[1])
        & (point[1] <= np.maximum(q1[:, 1], q2[:, 1]))
    )


def segment_boundary_crossing(start, end, vertices) -> Optional[float]:
    """Smallest fraction t in [0, 1] at which start + t (end - start) meets the polygon boundary."""
    polygon = as_vertex_array(vertices)
    px, py = float(start[0]), float(start[1])
    dx, dy = float(end[0]) - px, float(end[1]) - py

    starts, ends = _edges(polygon)
    ex, ey = ends[:, 0] - starts[:, 0], ends[:, 1] - starts[:, 1]
    wx, wy = starts[:, 0] - px, starts[:, 1] - py

    denominator = _cross(dx, dy, ex, ey)
    valid = denominator != 0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(valid, _cross(wx, wy, ex, ey) / denominator, np.nan)
        s = np.where(valid, _cross(wx, wy, dx, dy) / denominator, np.nan)

    slack = 1e-12
    hits = valid & (t >= -slack) & (t <= 1 + slack) & (s >= -slack) & (s <= 1 + slack)
    if not np.any(hits):
        return None
    return float(np.clip(t[hits].min(), 0.0, 1.0))


def regular_polygon(center: Tuple[float, float], radius: float, segments: int) -> np.ndarray:
    angles = np.arange(segments) * (2.0 * np.pi / segments)
    return np.column_stack([center[0] + radius * np.cos(angles), center[1] + radius * np.sin(angles)])
