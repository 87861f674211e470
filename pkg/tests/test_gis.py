from __future__ import annotations

import math
import random

import pytest

from geoagent.canonical import canonical_pretty
from geoagent.geotools.bundle import Feature, GeoBundle
from geoagent.geotools.geometry import haversine_m
from geoagent.geotools.gis import (
    EmptyLayer,
    MissingMetadata,
    NoBoundary,
    PlaceNotFound,
    UnknownPoiQuery,
    add_pois_layer,
    compute_distance,
    get_area_boundary,
    get_bbox_from_geotiff,
)

METERS_PER_DEGREE = 111320.0


def test_known_place_boundary_matches_gazetteer(fixture_store):
    bundle = get_area_boundary(fixture_store, place="TestPark")
    ring = bundle.vector_layers["boundary"][0].coordinates
    assert [list(c) for c in ring] == fixture_store.gazetteer["TestPark"]
    assert bundle.bbox == [10.0, 20.0, 10.1, 20.1]


def test_zero_buffer_is_identity(fixture_store):
    bundle = get_area_boundary(fixture_store, place="TestPark", buffer_m=0)
    ring = bundle.vector_layers["boundary"][0].coordinates
    assert [list(c) for c in ring] == fixture_store.gazetteer["TestPark"]


def test_bbox_buffer_against_meters_to_degrees_oracle(fixture_store):
    # 1 degree ~ 111320 m at the equator, so this buffer adds ~1 degree.
    bundle = get_area_boundary(
        fixture_store, bbox=[0.0, 0.0, 1.0, 1.0], buffer_m=111320.0
    )
    for got, want in zip(bundle.bbox, [-1.0, -1.0, 2.0, 2.0]):
        assert got == pytest.approx(want, abs=1e-3)


def test_unknown_place(fixture_store):
    with pytest.raises(PlaceNotFound):
        get_area_boundary(fixture_store, place="Atlantis")


def test_place_or_bbox_required(fixture_store):
    with pytest.raises(Exception):
        get_area_boundary(fixture_store)


def test_add_pois_counts_fixture_rows(fixture_store):
    bundle = get_area_boundary(fixture_store, place="Riverton", buffer_m=1000)
    count = add_pois_layer(fixture_store, bundle, "kindergarten", "kindergartens")
    assert count == 7
    assert len(bundle.vector_layers["kindergartens"]) == 7


def test_add_pois_outside_polygon_excluded(fixture_store):
    # The library fixture has 2 points inside and 1 outside the polygon.
    bundle = get_area_boundary(fixture_store, place="Riverton")
    assert add_pois_layer(fixture_store, bundle, "library", "libraries") == 2


def test_poi_on_edge_is_included(fixture_store):
    # One playground sits exactly on the south edge of Lakeview Commons.
    bundle = get_area_boundary(fixture_store, place="Lakeview Commons")
    assert add_pois_layer(fixture_store, bundle, "playground", "playgrounds") == 4
    stored = bundle.vector_layers["playgrounds"]
    assert any(f.coordinates == (-71.0, 41.98) for f in stored)


def test_empty_poi_result_creates_empty_layer(fixture_store):
    store = fixture_store
    store_copy = type(store)(
        gazetteer=store.gazetteer,
        poi_db={**store.poi_db, ("TestPark", "helipad"): []},
        annotations=store.annotations,
        canned_text=store.canned_text,
        gsd=store.gsd,
    )
    bundle = get_area_boundary(store_copy, place="TestPark")
    assert add_pois_layer(store_copy, bundle, "helipad", "helipads") == 0
    assert bundle.vector_layers["helipads"] == []


def test_add_pois_requires_boundary(fixture_store):
    bundle = GeoBundle(bbox=[0, 0, 1, 1])
    with pytest.raises(NoBoundary):
        add_pois_layer(fixture_store, bundle, "kindergarten", "k")


def test_add_pois_unknown_query(fixture_store):
    bundle = get_area_boundary(fixture_store, place="TestPark")
    with pytest.raises(UnknownPoiQuery):
        add_pois_layer(fixture_store, bundle, "unicorn stable", "u")


def _point_bundle(sources, targets):
    bundle = GeoBundle(bbox=[-180, -90, 180, 90])
    bundle.add_vector_layer("sources", [Feature.point(*p) for p in sources])
    bundle.add_vector_layer("targets", [Feature.point(*p) for p in targets])
    return bundle


def test_identical_single_point_distance_zero():
    bundle = _point_bundle([(10.0, 20.0)], [(10.0, 20.0)])
    result = compute_distance(bundle, "sources", "targets")
    assert result["distances_m"] == [0.0]
    assert result["links_layer"] in bundle.vector_layers


def test_equatorial_degree_distance():
    bundle = _point_bundle([(0.0, 0.0)], [(1.0, 0.0)])
    result = compute_distance(bundle, "sources", "targets")
    closed_form = math.pi * 6371008.8 / 180.0
    assert result["distances_m"][0] == pytest.approx(closed_form, abs=0.01)


def test_nearest_neighbor_matches_all_pairs_oracle():
    rng = random.Random(99)
    for _ in range(20):
        n_src = rng.randint(1, 10)
        n_tgt = rng.randint(1, 10)
        sources = [(rng.uniform(-10, 10), rng.uniform(-10, 10)) for _ in range(n_src)]
        targets = [(rng.uniform(-10, 10), rng.uniform(-10, 10)) for _ in range(n_tgt)]
        bundle = _point_bundle(sources, targets)
        result = compute_distance(bundle, "sources", "targets")
        expected = [
            min(haversine_m(s, t) for t in targets) for s in sources
        ]
        assert result["distances_m"] == expected


def test_distance_summary_reports_min_mean_max():
    bundle = _point_bundle([(0, 0), (2, 0)], [(1, 0)])
    result = compute_distance(bundle, "sources", "targets")
    distances = result["distances_m"]
    assert f"min {min(distances):.2f} m" in result["summary"]
    assert f"max {max(distances):.2f} m" in result["summary"]


def test_empty_layer_rejected():
    bundle = _point_bundle([(0, 0)], [(1, 1)])
    bundle.add_vector_layer("empty", [])
    with pytest.raises(EmptyLayer):
        compute_distance(bundle, "empty", "targets")
    with pytest.raises(EmptyLayer):
        compute_distance(bundle, "sources", "missing")


def test_bbox_from_sidecar_linear_transform(tmp_path):
    sidecar = tmp_path / "scene.json"
    sidecar.write_text(
        canonical_pretty(
            {
                "width": 100,
                "height": 100,
                "origin": [10.0, 50.0],
                "pixel_size": [0.01, -0.01],
            }
        )
    )
    bundle = get_bbox_from_geotiff(sidecar)
    assert bundle.bbox == [10.0, 49.0, 11.0, 50.0]
    ring = bundle.vector_layers["boundary"][0].coordinates
    assert len(ring) == 5


def test_bbox_from_single_pixel_raster(tmp_path):
    sidecar = tmp_path / "one.json"
    sidecar.write_text(
        canonical_pretty(
            {
                "width": 1,
                "height": 1,
                "origin": [0.0, 0.0],
                "pixel_size": [0.5, -0.5],
            }
        )
    )
    bundle = get_bbox_from_geotiff(sidecar)
    assert bundle.bbox == [0.0, -0.5, 0.5, 0.0]


def test_bbox_from_fixture_matches_declared_meta(fixture_tree):
    import json

    sidecar = fixture_tree / "geotiffs" / "wetland_scene.json"
    meta = json.loads(sidecar.read_text())
    bundle = get_bbox_from_geotiff(sidecar)
    w = meta["origin"][0]
    n = meta["origin"][1]
    e = w + meta["width"] * meta["pixel_size"][0]
    s = n + meta["height"] * meta["pixel_size"][1]
    assert bundle.bbox == [w, s, e, n]


def test_bbox_missing_metadata(tmp_path):
    with pytest.raises(MissingMetadata):
        get_bbox_from_geotiff(tmp_path / "absent.json")
    partial = tmp_path / "partial.json"
    partial.write_text('{"width": 10}')
    with pytest.raises(MissingMetadata):
        get_bbox_from_geotiff(partial)
