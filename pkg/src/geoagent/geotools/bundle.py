"""Lightweight geo bundle: CRS metadata, vector layers, raster grids.

A bundle stands in for a geopackage. On disk it is a directory:

    <bundle>/meta.json               {crs, bbox, provenance}
    <bundle>/layers/<name>.json      list of features (canonical JSON)
    <bundle>/rasters/<name>.json     {width, height, origin, pixel_size,
                                      nodata, bands: {name: [...]}}

Layer names are unique across vector layers and rasters, and every
feature geometry must lie within the bundle bbox (expanded by 1e-9 deg).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

from ..canonical import canonical_pretty
from .geometry import ring_is_valid

NODATA = -9999.0
DEFAULT_CRS = "EPSG:4326"
_BBOX_SLACK_DEG = 1e-9


class BundleError(Exception):
    code = "BundleError"


class GeometryError(BundleError):
    code = "GeometryError"


@dataclass(frozen=True, slots=True)
class Feature:
    """A vector feature: a point or a closed polygon ring with properties."""

    geometry_type: str  # "point" | "polygon"
    coordinates: tuple  # point: (lon, lat); polygon: tuple of (lon, lat)
    properties: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.geometry_type == "point":
            if len(self.coordinates) != 2:
                raise GeometryError("point needs exactly [lon, lat]")
        elif self.geometry_type == "polygon":
            ok, detail = ring_is_valid(self.coordinates)
            if not ok:
                raise GeometryError(f"invalid polygon ring: {detail}")
        else:
            raise GeometryError(f"unknown geometry type {self.geometry_type!r}")

    @classmethod
    def point(cls, lon: float, lat: float, **properties: Any) -> "Feature":
        return cls("point", (float(lon), float(lat)), dict(properties))

    @classmethod
    def polygon(
        cls, ring: Iterable[Iterable[float]], **properties: Any
    ) -> "Feature":
        coords = tuple((float(c[0]), float(c[1])) for c in ring)
        return cls("polygon", coords, dict(properties))

    def points(self) -> list[tuple[float, float]]:
        """All coordinates of the geometry."""
        if self.geometry_type == "point":
            return [self.coordinates]  # type: ignore[list-item]
        return list(self.coordinates)

    def to_dict(self) -> dict[str, Any]:
        if self.geometry_type == "point":
            geometry = {"type": "point", "coordinates": list(self.coordinates)}
        else:
            geometry = {
                "type": "polygon",
                "ring": [list(c) for c in self.coordinates],
            }
        return {"geometry": geometry, "properties": dict(self.properties)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Feature":
        geometry = data["geometry"]
        properties = dict(data.get("properties", {}))
        if geometry["type"] == "point":
            lon, lat = geometry["coordinates"]
            return cls.point(lon, lat, **properties)
        return cls.polygon(geometry["ring"], **properties)


@dataclass(slots=True)
class RasterGrid:
    """A north-up raster: band arrays in row-major order.

    `origin` is the [lon, lat] of the top-left corner; `pixel_size` is
    (deg-lon per px, deg-lat per px) with a negative latitude component
    for north-up grids.
    """

    width: int
    height: int
    origin: tuple[float, float]
    pixel_size: tuple[float, float]
    bands: dict[str, list[float]]
    nodata: float = NODATA

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise BundleError("raster dimensions must be positive")
        if self.pixel_size[0] == 0 or self.pixel_size[1] == 0:
            raise BundleError("pixel_size components must be nonzero")
        expected = self.width * self.height
        for name, values in self.bands.items():
            if len(values) != expected:
                raise BundleError(
                    f"band {name!r} has {len(values)} values, expected {expected}"
                )

    def same_geometry(self, other: "RasterGrid") -> bool:
        return (
            self.width == other.width
            and self.height == other.height
            and self.origin == other.origin
            and self.pixel_size == other.pixel_size
        )

    def bbox(self) -> list[float]:
        """[W, S, E, N] footprint from origin, pixel size, and dimensions."""
        w = self.origin[0]
        n = self.origin[1]
        e = w + self.width * self.pixel_size[0]
        s = n + self.height * self.pixel_size[1]
        return [min(w, e), min(s, n), max(w, e), max(s, n)]

    def to_dict(self) -> dict[str, Any]:
        return {
            "width": self.width,
            "height": self.height,
            "origin": list(self.origin),
            "pixel_size": list(self.pixel_size),
            "nodata": self.nodata,
            "bands": {name: list(values) for name, values in self.bands.items()},
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RasterGrid":
        return cls(
            width=int(data["width"]),
            height=int(data["height"]),
            origin=(float(data["origin"][0]), float(data["origin"][1])),
            pixel_size=(float(data["pixel_size"][0]), float(data["pixel_size"][1])),
            bands={k: [float(v) for v in vals] for k, vals in data["bands"].items()},
            nodata=float(data.get("nodata", NODATA)),
        )


@dataclass(slots=True)
class GeoBundle:
    """CRS metadata plus named vector layers and raster grids."""

    crs: str = DEFAULT_CRS
    bbox: list[float] = field(default_factory=lambda: [-180.0, -90.0, 180.0, 90.0])
    vector_layers: dict[str, list[Feature]] = field(default_factory=dict)
    rasters: dict[str, RasterGrid] = field(default_factory=dict)
    provenance: str = ""

    def layer_names(self) -> list[str]:
        return sorted(set(self.vector_layers) | set(self.rasters))

    def _check_name_free(self, name: str) -> None:
        if name in self.vector_layers or name in self.rasters:
            raise BundleError(f"layer name {name!r} already used in bundle")

    def _check_within_bbox(self, feature: Feature) -> None:
        w, s, e, n = self.bbox
        for lon, lat in feature.points():
            if not (
                w - _BBOX_SLACK_DEG <= lon <= e + _BBOX_SLACK_DEG
                and s - _BBOX_SLACK_DEG <= lat <= n + _BBOX_SLACK_DEG
            ):
                raise GeometryError(
                    f"feature point ({lon}, {lat}) outside bundle bbox {self.bbox}"
                )

    def add_vector_layer(
        self, name: str, features: Iterable[Feature], *, replace: bool = False
    ) -> None:
        features = list(features)
        if not replace:
            self._check_name_free(name)
        elif name in self.rasters:
            raise BundleError(f"layer name {name!r} already used by a raster")
        for feature in features:
            self._check_within_bbox(feature)
        self.vector_layers[name] = features

    def add_raster(self, name: str, grid: RasterGrid, *, replace: bool = False) -> None:
        if not replace:
            self._check_name_free(name)
        elif name in self.vector_layers:
            raise BundleError(f"layer name {name!r} already used by a vector layer")
        self.rasters[name] = grid

    def copy(self) -> "GeoBundle":
        """Deep-enough copy: features are immutable, band lists are copied."""
        return GeoBundle(
            crs=self.crs,
            bbox=list(self.bbox),
            vector_layers={k: list(v) for k, v in self.vector_layers.items()},
            rasters={
                k: RasterGrid(
                    width=r.width,
                    height=r.height,
                    origin=r.origin,
                    pixel_size=r.pixel_size,
                    bands={b: list(vals) for b, vals in r.bands.items()},
                    nodata=r.nodata,
                )
                for k, r in self.rasters.items()
            },
            provenance=self.provenance,
        )


def save_bundle(bundle: GeoBundle, path: str | Path) -> None:
    """Write a bundle directory with canonical JSON files."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    meta = {"crs": bundle.crs, "bbox": bundle.bbox, "provenance": bundle.provenance}
    (root / "meta.json").write_text(canonical_pretty(meta), encoding="utf-8")
    if bundle.vector_layers:
        layers_dir = root / "layers"
        layers_dir.mkdir(exist_ok=True)
        for name, features in bundle.vector_layers.items():
            (layers_dir / f"{name}.json").write_text(
                canonical_pretty([f.to_dict() for f in features]), encoding="utf-8"
            )
    if bundle.rasters:
        rasters_dir = root / "rasters"
        rasters_dir.mkdir(exist_ok=True)
        for name, grid in bundle.rasters.items():
            (rasters_dir / f"{name}.json").write_text(
                canonical_pretty(grid.to_dict()), encoding="utf-8"
            )


def load_bundle(path: str | Path) -> GeoBundle:
    """Load a bundle directory written by :func:`save_bundle`."""
    root = Path(path)
    meta_path = root / "meta.json"
    if not meta_path.is_file():
        raise BundleError(f"no bundle at {root}: missing meta.json")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    bundle = GeoBundle(
        crs=meta.get("crs", DEFAULT_CRS),
        bbox=[float(v) for v in meta["bbox"]],
        provenance=meta.get("provenance", ""),
    )
    layers_dir = root / "layers"
    if layers_dir.is_dir():
        for layer_file in sorted(layers_dir.glob("*.json")):
            features = [
                Feature.from_dict(entry)
                for entry in json.loads(layer_file.read_text(encoding="utf-8"))
            ]
            bundle.add_vector_layer(layer_file.stem, features)
    rasters_dir = root / "rasters"
    if rasters_dir.is_dir():
        for raster_file in sorted(rasters_dir.glob("*.json")):
            bundle.add_raster(
                raster_file.stem,
                RasterGrid.from_dict(
                    json.loads(raster_file.read_text(encoding="utf-8"))
                ),
            )
    return bundle
