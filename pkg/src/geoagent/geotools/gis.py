"""GIS vector operators: boundaries, POI layers, nearest-neighbor distances.

All coordinates are EPSG:4326 lon/lat degrees; distances are spherical
haversine meters. POI containment is closed (a point on the boundary
edge is inside).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Sequence

from .bundle import BundleError, Feature, GeoBundle
from .geometry import (
    bbox_ring,
    buffer_envelope,
    envelope,
    haversine_m,
    point_in_polygon,
)
from .perception import FixtureStore

BOUNDARY_LAYER = "boundary"
_PLACE_PROVENANCE = "gazetteer:"


class GisError(BundleError):
    code = "GisError"


class PlaceNotFound(GisError):
    code = "PlaceNotFound"


class NoBoundary(GisError):
    code = "NoBoundary"


class UnknownPoiQuery(GisError):
    code = "UnknownPoiQuery"


class EmptyLayer(GisError):
    code = "EmptyLayer"


class MissingMetadata(GisError):
    code = "MissingMetadata"


def get_area_boundary(
    store: FixtureStore,
    place: str | None = None,
    bbox: Sequence[float] | None = None,
    buffer_m: float = 0.0,
) -> GeoBundle:
    """Bundle with a single "boundary" layer for a place or bbox.

    With ``buffer_m == 0`` the boundary is exactly the gazetteer polygon
    (or the bbox rectangle); with a positive buffer the boundary is the
    metric-expanded envelope rectangle. The bundle bbox is always the
    buffered envelope.

    Raises:
        PlaceNotFound: Named place absent from the gazetteer.
        GisError: Neither place nor bbox given.
    """
    if buffer_m < 0:
        raise GisError("buffer_m must be >= 0")
    if place is not None:
        ring = store.gazetteer.get(place)
        if ring is None:
            raise PlaceNotFound(f"place {place!r} not in gazetteer")
        base_ring = [list(c) for c in ring]
        provenance = _PLACE_PROVENANCE + place
    elif bbox is not None:
        base_ring = bbox_ring(list(bbox))
        provenance = "bbox:" + ",".join(repr(float(v)) for v in bbox)
    else:
        raise GisError("either place or bbox is required")

    base_bbox = envelope(base_ring)
    buffered_bbox = buffer_envelope(base_bbox, buffer_m)
    boundary_ring = base_ring if buffer_m == 0 else bbox_ring(buffered_bbox)

    bundle = GeoBundle(bbox=buffered_bbox, provenance=provenance)
    bundle.add_vector_layer(BOUNDARY_LAYER, [Feature.polygon(boundary_ring)])
    return bundle


def bundle_region(bundle: GeoBundle) -> str:
    """Region key for POI lookups: the gazetteer place, else the provenance."""
    if bundle.provenance.startswith(_PLACE_PROVENANCE):
        return bundle.provenance[len(_PLACE_PROVENANCE) :]
    return bundle.provenance


def add_pois_layer(
    store: FixtureStore, bundle: GeoBundle, query: str, layer: str
) -> int:
    """Add the fixture POIs inside the boundary polygon; return the count.

    Raises:
        NoBoundary: Bundle has no boundary layer.
        UnknownPoiQuery: No fixture entry for (region, query).
    """
    if BOUNDARY_LAYER not in bundle.vector_layers:
        raise NoBoundary("bundle has no boundary layer")
    region = bundle_region(bundle)
    candidates = store.poi_db.get((region, query))
    if candidates is None:
        raise UnknownPoiQuery(f"no POI fixture for region {region!r}, query {query!r}")

    rings = [
        f.coordinates
        for f in bundle.vector_layers[BOUNDARY_LAYER]
        if f.geometry_type == "polygon"
    ]
    kept = [
        poi
        for poi in candidates
        if poi.geometry_type == "point"
        and any(point_in_polygon(poi.coordinates, ring) for ring in rings)
    ]
    bundle.add_vector_layer(layer, kept, replace=True)
    return len(kept)


def compute_distance(
    bundle: GeoBundle, source_layer: str, target_layer: str
) -> dict[str, Any]:
    """Nearest-target haversine distance for every source point.

    Returns {summary, links_layer, distances_m}. The links layer stores
    one point feature per source carrying its nearest target coordinates
    and distance (segments as properties; the feature model has no line
    geometry).

    Raises:
        EmptyLayer: Either layer is missing or has no point features.
    """
    points: dict[str, list[Feature]] = {}
    for name in (source_layer, target_layer):
        layer = bundle.vector_layers.get(name, [])
        pts = [f for f in layer if f.geometry_type == "point"]
        if not pts:
            raise EmptyLayer(f"layer {name!r} has no point features")
        points[name] = pts

    links: list[Feature] = []
    distances: list[float] = []
    for source in points[source_layer]:
        best_d = None
        best_target = None
        for target in points[target_layer]:
            d = haversine_m(source.coordinates, target.coordinates)
            if best_d is None or d < best_d:
                best_d = d
                best_target = target
        assert best_d is not None and best_target is not None
        distances.append(best_d)
        links.append(
            Feature.point(
                source.coordinates[0],
                source.coordinates[1],
                target_lon=best_target.coordinates[0],
                target_lat=best_target.coordinates[1],
                distance_m=best_d,
            )
        )

    links_layer = f"links_{source_layer}_{target_layer}"
    bundle.add_vector_layer(links_layer, links, replace=True)
    summary = (
        f"{len(distances)} source points: nearest-target distance "
        f"min {min(distances):.2f} m, mean {sum(distances) / len(distances):.2f} m, "
        f"max {max(distances):.2f} m"
    )
    return {
        "summary": summary,
        "links_layer": links_layer,
        "distances_m": distances,
    }


def get_bbox_from_geotiff(sidecar_path: str | Path) -> GeoBundle:
    """Bundle with a boundary rectangle from a raster metadata sidecar.

    The sidecar is a JSON file with width, height, origin, and
    pixel_size; the bbox follows from the linear georeferencing.

    Raises:
        MissingMetadata: Sidecar missing or lacking a required field.
    """
    path = Path(sidecar_path)
    if not path.is_file():
        raise MissingMetadata(f"no raster sidecar at {path}")
    try:
        meta = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MissingMetadata(f"sidecar {path} is not valid JSON: {exc}") from None
    for key in ("width", "height", "origin", "pixel_size"):
        if key not in meta:
            raise MissingMetadata(f"sidecar {path} lacks {key!r}")

    width = int(meta["width"])
    height = int(meta["height"])
    origin_lon, origin_lat = (float(v) for v in meta["origin"])
    px_lon, px_lat = (float(v) for v in meta["pixel_size"])
    west = origin_lon
    north = origin_lat
    east = origin_lon + width * px_lon
    south = origin_lat + height * px_lat
    bbox = [min(west, east), min(south, north), max(west, east), max(south, north)]

    bundle = GeoBundle(bbox=bbox, provenance=f"geotiff:{path.name}")
    bundle.add_vector_layer(BOUNDARY_LAYER, [Feature.polygon(bbox_ring(bbox))])
    return bundle
