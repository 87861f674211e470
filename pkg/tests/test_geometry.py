from __future__ import annotations

import math
import random

import pytest

from geoagent.geotools.geometry import (
    EARTH_RADIUS_M,
    buffer_envelope,
    envelope,
    haversine_m,
    point_in_polygon,
    point_on_ring,
    ring_is_valid,
)

# Independent oracles -------------------------------------------------------


def law_of_cosines_m(a, b) -> float:
    """Spherical law of cosines distance; numerically rough near 0."""
    lon1, lat1 = math.radians(a[0]), math.radians(a[1])
    lon2, lat2 = math.radians(b[0]), math.radians(b[1])
    cos_c = math.sin(lat1) * math.sin(lat2) + math.cos(lat1) * math.cos(
        lat2
    ) * math.cos(lon2 - lon1)
    return EARTH_RADIUS_M * math.acos(min(1.0, max(-1.0, cos_c)))


def winding_number_contains(point, ring) -> bool:
    """Winding-number containment; boundary handled like the production
    routine (closed)."""
    if point_on_ring(point, ring):
        return True
    x, y = point
    winding = 0
    for i in range(len(ring) - 1):
        x1, y1 = ring[i]
        x2, y2 = ring[i + 1]
        cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
        if y1 <= y:
            if y2 > y and cross > 0:
                winding += 1
        elif y2 <= y and cross < 0:
            winding -= 1
    return winding != 0


# Haversine ------------------------------------------------------------------


def test_equatorial_one_degree_arc():
    # Closed-form oracle: one degree of arc is pi*R/180. With the mean
    # radius 6371008.8 m that is 111195.0802 m (the often-quoted
    # 111194.93 belongs to the rounded 6371000 m radius).
    closed_form = math.pi * EARTH_RADIUS_M / 180.0
    distance = haversine_m((0.0, 0.0), (1.0, 0.0))
    assert closed_form == pytest.approx(111195.0802, abs=1e-4)
    assert distance == pytest.approx(closed_form, abs=0.01)


def test_zero_distance():
    assert haversine_m((12.5, -33.0), (12.5, -33.0)) == 0.0


def test_haversine_symmetry_and_triangle():
    rng = random.Random(42)
    for _ in range(200):
        points = [
            (rng.uniform(-180, 180), rng.uniform(-89, 89)) for _ in range(3)
        ]
        a, b, c = points
        assert haversine_m(a, b) == haversine_m(b, a)
        assert haversine_m(a, c) <= haversine_m(a, b) + haversine_m(b, c) + 1e-6


def test_haversine_matches_law_of_cosines_under_100km():
    rng = random.Random(7)
    checked = 0
    while checked < 100:
        lon = rng.uniform(-179, 179)
        lat = rng.uniform(-80, 80)
        dlon = rng.uniform(-0.6, 0.6)
        dlat = rng.uniform(-0.6, 0.6)
        a = (lon, lat)
        b = (lon + dlon, lat + dlat)
        if haversine_m(a, b) >= 100_000:
            continue
        assert abs(haversine_m(a, b) - law_of_cosines_m(a, b)) < 0.5
        checked += 1


# Envelope buffering ---------------------------------------------------------


def test_buffer_zero_is_identity():
    assert buffer_envelope([0, 0, 1, 1], 0) == [0, 0, 1, 1]


def test_buffer_one_degree_at_equator():
    # 1 deg = 111320 m by the documented conversion.
    result = buffer_envelope([0.0, 0.0, 1.0, 1.0], 111320.0)
    expected = [-1.0, -1.0, 2.0, 2.0]
    for got, want in zip(result, expected):
        assert got == pytest.approx(want, abs=1e-3)


def test_buffer_longitude_widens_with_latitude():
    at_equator = buffer_envelope([10, -0.5, 11, 0.5], 111320.0)
    at_60 = buffer_envelope([10, 59.5, 11, 60.5], 111320.0)
    # cos(60 deg) = 0.5 so the longitude expansion doubles.
    assert (10 - at_60[0]) == pytest.approx(2 * (10 - at_equator[0]), rel=1e-3)


def test_buffer_clamps_to_crs_bounds():
    result = buffer_envelope([-179.9, -89.9, 179.9, 89.9], 500_000.0)
    assert result == [-180.0, -90.0, 180.0, 90.0]


def test_envelope():
    assert envelope([(1, 5), (-2, 3), (4, -1)]) == [-2, -1, 4, 5]


# Point in polygon -----------------------------------------------------------

SQUARE = [(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0), (0.0, 0.0)]


def test_point_in_polygon_basic():
    assert point_in_polygon((2, 2), SQUARE)
    assert not point_in_polygon((5, 2), SQUARE)
    assert not point_in_polygon((-1, -1), SQUARE)


def test_boundary_points_are_inside():
    assert point_in_polygon((0, 0), SQUARE)  # vertex
    assert point_in_polygon((2, 0), SQUARE)  # edge
    assert point_in_polygon((4, 2), SQUARE)  # edge


def test_ray_casting_equals_winding_number_on_random_pairs():
    rng = random.Random(123)
    for _ in range(1000):
        # Random star-shaped polygon around a center: no self-intersection.
        cx, cy = rng.uniform(-5, 5), rng.uniform(-5, 5)
        n = rng.randint(3, 9)
        angles = sorted(rng.uniform(0, 2 * math.pi) for _ in range(n))
        ring = [
            (cx + r * math.cos(t), cy + r * math.sin(t))
            for t, r in ((t, rng.uniform(0.5, 3.0)) for t in angles)
        ]
        ring.append(ring[0])
        point = (rng.uniform(-8, 8), rng.uniform(-8, 8))
        assert point_in_polygon(point, ring) == winding_number_contains(point, ring)


# Ring validity --------------------------------------------------------------


def test_valid_ring():
    ok, detail = ring_is_valid(SQUARE)
    assert ok, detail


def test_open_ring_invalid():
    ok, detail = ring_is_valid(SQUARE[:-1])
    assert not ok and "closed" in detail


def test_too_few_coordinates_invalid():
    ok, _ = ring_is_valid([(0, 0), (1, 1), (0, 0)])
    assert not ok


def test_self_intersecting_bowtie_invalid():
    bowtie = [(0, 0), (2, 2), (2, 0), (0, 2), (0, 0)]
    ok, detail = ring_is_valid(bowtie)
    assert not ok and "intersect" in detail
