"""Deterministic executors for every registry tool."""

from .bundle import Feature, GeoBundle, RasterGrid, load_bundle, save_bundle
from .calculator import calculator_eval
from .executors import EXECUTORS, ExecutionContext, execute
from .geometry import EARTH_RADIUS_M, haversine_m, point_in_polygon
from .gis import (
    add_pois_layer,
    compute_distance,
    get_area_boundary,
    get_bbox_from_geotiff,
)
from .indices import compute_index, compute_index_change
from .perception import FixtureStore, load_fixture_store, save_fixture_store
from .solver import solver_eval

__all__ = [
    "EARTH_RADIUS_M",
    "EXECUTORS",
    "ExecutionContext",
    "Feature",
    "FixtureStore",
    "GeoBundle",
    "RasterGrid",
    "add_pois_layer",
    "calculator_eval",
    "compute_distance",
    "compute_index",
    "compute_index_change",
    "execute",
    "get_area_boundary",
    "get_bbox_from_geotiff",
    "haversine_m",
    "load_bundle",
    "load_fixture_store",
    "point_in_polygon",
    "save_bundle",
    "save_fixture_store",
    "solver_eval",
]
