"""Deterministic raster rendering for the display tools.

Renders are pure functions of their inputs: fixed canvas sizes, fixed
palettes, the Pillow built-in bitmap font, and PNG output without
ancillary metadata, so identical inputs produce byte-identical files on
one platform. Base "images" for annotation tools are synthesized from
the image id (no real imagery ships with the artifact).
"""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Sequence

from PIL import Image, ImageDraw, ImageFont

from .bundle import GeoBundle, RasterGrid
from .indices import CLASS_THRESHOLDS

MAP_SIZE = 256
BASE_IMAGE_SIZE = (320, 240)

_POLYGON_COLOR = (30, 90, 200)
_POINT_COLOR = (200, 40, 40)
_LINK_COLOR = (120, 120, 120)
_BOX_COLOR = (220, 30, 30)
_TEXT_COLOR = (20, 20, 20)

# Class colors per index, ordered low/mid/high (or barren/sparse/dense).
_CLASS_COLORS: dict[str, tuple[tuple[int, int, int], ...]] = {
    "NDVI": ((200, 180, 140), (150, 200, 120), (30, 140, 50)),
    "NBR": ((200, 60, 40), (240, 230, 140), (60, 160, 70)),
    "NDBI": ((80, 140, 200), (230, 230, 230), (150, 80, 160)),
}
_NODATA_COLOR = (0, 0, 0)


class RenderError(Exception):
    code = "RenderError"


class IoFailure(RenderError):
    code = "IoFailure"


def _font() -> ImageFont.ImageFont:
    return ImageFont.load_default()


def _save(image: Image.Image, out_path: str | Path) -> str:
    path = Path(out_path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        image.save(path, format="PNG")
    except OSError as exc:
        raise IoFailure(f"cannot write image {path}: {exc}") from None
    return str(path)


def _project(bbox: Sequence[float], lon: float, lat: float) -> tuple[int, int]:
    w, s, e, n = bbox
    span_x = max(e - w, 1e-12)
    span_y = max(n - s, 1e-12)
    x = (lon - w) / span_x * (MAP_SIZE - 1)
    y = (n - lat) / span_y * (MAP_SIZE - 1)
    return int(round(x)), int(round(y))


def render_map(
    bundle: GeoBundle, layers: Sequence[str], out_path: str | Path
) -> str:
    """Draw the named vector layers over the bundle bbox."""
    image = Image.new("RGB", (MAP_SIZE, MAP_SIZE), (255, 255, 255))
    draw = ImageDraw.Draw(image)
    bbox = bundle.bbox
    for layer_name in layers:
        for feature in bundle.vector_layers.get(layer_name, []):
            if feature.geometry_type == "polygon":
                pixels = [_project(bbox, lon, lat) for lon, lat in feature.coordinates]
                draw.line(pixels, fill=_POLYGON_COLOR, width=2)
            else:
                lon, lat = feature.coordinates
                props = feature.properties
                if "target_lon" in props and "target_lat" in props:
                    draw.line(
                        [
                            _project(bbox, lon, lat),
                            _project(bbox, props["target_lon"], props["target_lat"]),
                        ],
                        fill=_LINK_COLOR,
                        width=1,
                    )
                x, y = _project(bbox, lon, lat)
                draw.rectangle([x - 2, y - 2, x + 2, y + 2], fill=_POINT_COLOR)
    return _save(image, out_path)


def render_index(
    grid: RasterGrid, index_kind: str, out_path: str | Path
) -> str:
    """Color each pixel by its legend class and scale up for visibility."""
    names, lo, hi = CLASS_THRESHOLDS[index_kind]
    colors = _CLASS_COLORS[index_kind]
    values = grid.bands["index"]
    image = Image.new("RGB", (grid.width, grid.height))
    pixels = []
    for v in values:
        if v == grid.nodata:
            pixels.append(_NODATA_COLOR)
        elif v < lo:
            pixels.append(colors[0])
        elif v <= hi:
            pixels.append(colors[1])
        else:
            pixels.append(colors[2])
    image.putdata(pixels)
    scale = max(1, MAP_SIZE // max(grid.width, grid.height))
    if scale > 1:
        image = image.resize(
            (grid.width * scale, grid.height * scale), Image.NEAREST
        )
    return _save(image, out_path)


def synthesize_base_image(image_id: str) -> Image.Image:
    """Deterministic stand-in canvas for an image id."""
    seed = hashlib.sha256(image_id.encode("utf-8")).digest()
    background = (140 + seed[0] % 80, 140 + seed[1] % 80, 140 + seed[2] % 80)
    image = Image.new("RGB", BASE_IMAGE_SIZE, background)
    draw = ImageDraw.Draw(image)
    draw.text((8, 8), image_id, fill=_TEXT_COLOR, font=_font())
    return image


def render_box(
    image_id: str, box: Sequence[float], label: str | None, out_path: str | Path
) -> str:
    image = synthesize_base_image(image_id)
    draw = ImageDraw.Draw(image)
    x1, y1, x2, y2 = box
    draw.rectangle([x1, y1, x2, y2], outline=_BOX_COLOR, width=2)
    if label:
        draw.text((x1 + 2, max(0, y1 - 12)), label, fill=_BOX_COLOR, font=_font())
    return _save(image, out_path)


def render_text(
    image_id: str,
    text: str,
    position: Sequence[float],
    color: str | None,
    out_path: str | Path,
) -> str:
    image = synthesize_base_image(image_id)
    draw = ImageDraw.Draw(image)
    draw.text(
        (position[0], position[1]), text, fill=color or "black", font=_font()
    )
    return _save(image, out_path)


def render_plot(code: str, out_path: str | Path) -> str:
    """Placeholder plot: render the program text on a framed canvas."""
    image = Image.new("RGB", BASE_IMAGE_SIZE, (250, 250, 250))
    draw = ImageDraw.Draw(image)
    draw.rectangle(
        [4, 4, BASE_IMAGE_SIZE[0] - 5, BASE_IMAGE_SIZE[1] - 5],
        outline=(60, 60, 60),
    )
    font = _font()
    for i, line in enumerate(code.splitlines()[:16]):
        draw.text((10, 10 + 14 * i), line[:48], fill=_TEXT_COLOR, font=font)
    return _save(image, out_path)


def render_over_geotiff(
    bundle: GeoBundle,
    layers: Sequence[str],
    geotiff_name: str,
    out_path: str | Path,
) -> str:
    """Vector layers over a synthetic backdrop named after the raster."""
    image = Image.new("RGB", (MAP_SIZE, MAP_SIZE), (225, 232, 225))
    draw = ImageDraw.Draw(image)
    for offset in range(0, MAP_SIZE, 32):
        draw.line([(offset, 0), (offset, MAP_SIZE)], fill=(205, 212, 205))
        draw.line([(0, offset), (MAP_SIZE, offset)], fill=(205, 212, 205))
    draw.text((6, 6), geotiff_name, fill=_TEXT_COLOR, font=_font())
    bbox = bundle.bbox
    for layer_name in layers:
        for feature in bundle.vector_layers.get(layer_name, []):
            if feature.geometry_type == "polygon":
                pixels = [_project(bbox, lon, lat) for lon, lat in feature.coordinates]
                draw.line(pixels, fill=_POLYGON_COLOR, width=2)
            else:
                x, y = _project(bbox, *feature.coordinates)
                draw.rectangle([x - 2, y - 2, x + 2, y + 2], fill=_POINT_COLOR)
                name = feature.properties.get("name")
                if name:
                    draw.text((x + 4, y - 4), str(name), fill=_TEXT_COLOR, font=_font())
    return _save(image, out_path)
