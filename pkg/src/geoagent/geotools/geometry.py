"""Desk-scale geodesy and planar geometry on EPSG:4326 coordinates.

Distances use the spherical haversine formula with the mean Earth radius
6371008.8 m; no ellipsoidal correction. Metric buffering expands the
envelope using 1 deg latitude = 111320 m and 1 deg longitude =
111320 * cos(lat) m. Polygon containment is closed: boundary points are
inside.
"""

from __future__ import annotations

import math
from typing import Sequence

EARTH_RADIUS_M = 6371008.8
METERS_PER_DEGREE = 111320.0

Coordinate = Sequence[float]  # [lon, lat]


def haversine_m(a: Coordinate, b: Coordinate) -> float:
    """Great-circle distance in meters between two [lon, lat] points."""
    lon1, lat1 = math.radians(a[0]), math.radians(a[1])
    lon2, lat2 = math.radians(b[0]), math.radians(b[1])
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = (
        math.sin(dlat / 2.0) ** 2
        + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    )
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def envelope(points: Sequence[Coordinate]) -> list[float]:
    """Axis-aligned [W, S, E, N] envelope of the points."""
    if not points:
        raise ValueError("envelope of zero points is undefined")
    lons = [p[0] for p in points]
    lats = [p[1] for p in points]
    return [min(lons), min(lats), max(lons), max(lats)]


def buffer_envelope(bbox: Sequence[float], buffer_m: float) -> list[float]:
    """Expand a [W, S, E, N] envelope by `buffer_m` meters on every side.

    The longitude expansion uses the envelope's center latitude; results
    are clamped to valid EPSG:4326 bounds.
    """
    if buffer_m < 0:
        raise ValueError("buffer_m must be >= 0")
    w, s, e, n = bbox
    if buffer_m == 0:
        return [w, s, e, n]
    dlat = buffer_m / METERS_PER_DEGREE
    center_lat = (s + n) / 2.0
    cos_lat = math.cos(math.radians(center_lat))
    if cos_lat <= 1e-12:
        dlon = 360.0
    else:
        dlon = buffer_m / (METERS_PER_DEGREE * cos_lat)
    return [
        max(-180.0, w - dlon),
        max(-90.0, s - dlat),
        min(180.0, e + dlon),
        min(90.0, n + dlat),
    ]


def bbox_ring(bbox: Sequence[float]) -> list[list[float]]:
    """Closed counter-clockwise ring for a [W, S, E, N] envelope."""
    w, s, e, n = bbox
    return [[w, s], [e, s], [e, n], [w, n], [w, s]]


def _on_segment(p: Coordinate, a: Coordinate, b: Coordinate, eps: float = 1e-12) -> bool:
    cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
    if abs(cross) > eps * max(1.0, abs(b[0] - a[0]), abs(b[1] - a[1])):
        return False
    if min(a[0], b[0]) - eps <= p[0] <= max(a[0], b[0]) + eps and (
        min(a[1], b[1]) - eps <= p[1] <= max(a[1], b[1]) + eps
    ):
        return True
    return False


def point_on_ring(point: Coordinate, ring: Sequence[Coordinate]) -> bool:
    """True when the point lies on a ring vertex or edge."""
    for i in range(len(ring) - 1):
        if _on_segment(point, ring[i], ring[i + 1]):
            return True
    return False


def point_in_polygon(point: Coordinate, ring: Sequence[Coordinate]) -> bool:
    """Closed containment test by ray casting.

    `ring` must be closed (first == last). Points on the boundary count
    as inside.
    """
    if point_on_ring(point, ring):
        return True
    x, y = point[0], point[1]
    inside = False
    for i in range(len(ring) - 1):
        x1, y1 = ring[i][0], ring[i][1]
        x2, y2 = ring[i + 1][0], ring[i + 1][1]
        if (y1 > y) != (y2 > y):
            x_cross = (x2 - x1) * (y - y1) / (y2 - y1) + x1
            if x < x_cross:
                inside = not inside
    return inside


def _orientation(a: Coordinate, b: Coordinate, c: Coordinate) -> int:
    value = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    if value > 0:
        return 1
    if value < 0:
        return -1
    return 0


def segments_properly_intersect(
    p1: Coordinate, p2: Coordinate, q1: Coordinate, q2: Coordinate
) -> bool:
    """True when the open segments cross at an interior point."""
    o1 = _orientation(p1, p2, q1)
    o2 = _orientation(p1, p2, q2)
    o3 = _orientation(q1, q2, p1)
    o4 = _orientation(q1, q2, p2)
    return o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4)


def ring_is_valid(ring: Sequence[Coordinate]) -> tuple[bool, str]:
    """Check a polygon ring: closed, >= 4 coordinates, no self-intersection.

    Returns (ok, detail). Self-intersection is tested pairwise over
    non-adjacent edges, which is fine at desk scale.
    """
    if len(ring) < 4:
        return False, f"ring has {len(ring)} coordinates, need >= 4"
    if ring[0][0] != ring[-1][0] or ring[0][1] != ring[-1][1]:
        return False, "ring is not closed (first != last)"
    n = len(ring) - 1  # distinct edges
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue  # adjacent edges share a vertex
            if segments_properly_intersect(
                ring[i], ring[i + 1], ring[j], ring[j + 1]
            ):
                return False, f"edges {i} and {j} intersect"
    return True, ""


def coordinate_in_crs_bounds(point: Coordinate) -> bool:
    """True when [lon, lat] lies inside EPSG:4326 bounds."""
    return -180.0 <= point[0] <= 180.0 and -90.0 <= point[1] <= 90.0
