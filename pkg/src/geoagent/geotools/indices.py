"""Normalized-difference index math over raster grids.

All three indices share the form (A - B) / (A + B) over an ordered band
pair: NDVI = (nir - red) / (nir + red), NBR = (nir - swir2) / (nir + swir2),
NDBI = (swir1 - nir) / (swir1 + nir). A pixel is nodata when either input
is nodata or |A + B| < 1e-12. Index change is later - earlier per pixel,
so loss (e.g. burn scars) comes out negative.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from .bundle import BundleError, GeoBundle, RasterGrid

INDEX_BANDS: dict[str, tuple[str, str]] = {
    "NDVI": ("nir", "red"),
    "NBR": ("nir", "swir2"),
    "NDBI": ("swir1", "nir"),
}

_DENOM_GUARD = 1e-12

# Tri-class legend per index: (class names, lower boundary, upper boundary)
# with membership v < lo / lo <= v <= hi / v > hi. NDVI gets the
# conventional vegetation classes; NBR/NDBI a symmetric split at +/-0.1.
CLASS_THRESHOLDS: dict[str, tuple[tuple[str, str, str], float, float]] = {
    "NDVI": (("barren", "sparse", "dense"), 0.2, 0.5),
    "NBR": (("low", "mid", "high"), -0.1, 0.1),
    "NDBI": (("low", "mid", "high"), -0.1, 0.1),
}


class SpectralIndexError(BundleError):
    code = "SpectralIndexError"


class UnknownIndex(SpectralIndexError):
    code = "UnknownIndex"


class MissingBand(SpectralIndexError):
    code = "MissingBand"


class MissingLayer(SpectralIndexError):
    code = "MissingLayer"


class GridMismatch(SpectralIndexError):
    code = "GridMismatch"


def required_bands(index_kind: str) -> tuple[str, str]:
    try:
        return INDEX_BANDS[index_kind]
    except KeyError:
        raise UnknownIndex(
            f"unknown index {index_kind!r}; expected one of {sorted(INDEX_BANDS)}"
        ) from None


def compute_index(grid: RasterGrid, index_kind: str) -> list[float]:
    """Per-pixel normalized difference for `index_kind` over `grid`.

    Raises:
        MissingBand: A required band is absent from the grid.
    """
    band_a, band_b = required_bands(index_kind)
    for name in (band_a, band_b):
        if name not in grid.bands:
            raise MissingBand(f"{index_kind} needs band {name!r}")
    a_values = grid.bands[band_a]
    b_values = grid.bands[band_b]
    nodata = grid.nodata
    out: list[float] = []
    for a, b in zip(a_values, b_values):
        if a == nodata or b == nodata or abs(a + b) < _DENOM_GUARD:
            out.append(nodata)
        else:
            out.append((a - b) / (a + b))
    return out


def index_grid(grid: RasterGrid, index_kind: str) -> RasterGrid:
    """New single-band raster ("index") with the computed values."""
    return RasterGrid(
        width=grid.width,
        height=grid.height,
        origin=grid.origin,
        pixel_size=grid.pixel_size,
        bands={"index": compute_index(grid, index_kind)},
        nodata=grid.nodata,
    )


def band_stats(values: Sequence[float], nodata: float) -> dict[str, float]:
    """{mean, min, max, frac_negative, frac_positive} over valid pixels."""
    valid = [v for v in values if v != nodata]
    if not valid:
        return {
            "mean": 0.0,
            "min": 0.0,
            "max": 0.0,
            "frac_negative": 0.0,
            "frac_positive": 0.0,
        }
    n = len(valid)
    return {
        "mean": sum(valid) / n,
        "min": min(valid),
        "max": max(valid),
        "frac_negative": sum(1 for v in valid if v < 0) / n,
        "frac_positive": sum(1 for v in valid if v > 0) / n,
    }


def class_counts(
    values: Sequence[float],
    index_kind: str,
    nodata: float,
    thresholds: Mapping[str, tuple[tuple[str, str, str], float, float]] | None = None,
) -> dict[str, int]:
    """Pixel counts per legend class, plus a nodata bucket."""
    names, lo, hi = (thresholds or CLASS_THRESHOLDS)[index_kind]
    counts = {name: 0 for name in names}
    counts["nodata"] = 0
    for v in values:
        if v == nodata:
            counts["nodata"] += 1
        elif v < lo:
            counts[names[0]] += 1
        elif v <= hi:
            counts[names[1]] += 1
        else:
            counts[names[2]] += 1
    return counts


def compute_index_change(
    bundle: GeoBundle,
    index_kind: str,
    earlier_layer: str,
    later_layer: str,
) -> tuple[str, dict[str, float]]:
    """Store later - earlier as a new change layer; return (name, stats).

    Raises:
        MissingLayer: Either named layer is absent.
        GridMismatch: The two layers differ in grid geometry.
    """
    required_bands(index_kind)  # validates the kind
    for name in (earlier_layer, later_layer):
        if name not in bundle.rasters:
            raise MissingLayer(f"bundle has no raster layer {name!r}")
    earlier = bundle.rasters[earlier_layer]
    later = bundle.rasters[later_layer]
    if not earlier.same_geometry(later):
        raise GridMismatch(
            f"layers {earlier_layer!r} and {later_layer!r} differ in grid geometry"
        )
    if "index" not in earlier.bands or "index" not in later.bands:
        raise MissingBand("change inputs must be index layers with an 'index' band")

    nodata = earlier.nodata
    change: list[float] = []
    for before, after in zip(earlier.bands["index"], later.bands["index"]):
        if before == nodata or after == later.nodata:
            change.append(nodata)
        else:
            change.append(after - before)

    change_name = f"change_{earlier_layer}_{later_layer}"
    grid = RasterGrid(
        width=earlier.width,
        height=earlier.height,
        origin=earlier.origin,
        pixel_size=earlier.pixel_size,
        bands={"index": change},
        nodata=nodata,
    )
    bundle.add_raster(change_name, grid, replace=True)
    return change_name, band_stats(change, nodata)
