"""Default tool registry and category mapping.

The shipped registry declares the full tool surface: perception mocks,
GIS vector operators, spectral-index raster operators, georeferenced
raster helpers, rendering utilities, and generic logic tools, plus the
Terminate tool that ends a session. The category table lives in a JSON
config file (``data/category_map.json``) so evaluators can override it.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Mapping

from .registry import (
    ParamSpec,
    ToolCategory,
    ToolDescriptor,
    ToolRegistry,
    build_registry,
)


def load_category_map(path: str | Path | None = None) -> dict[str, ToolCategory]:
    """Load the tool-to-category mapping.

    Without a path, the packaged default table is used. With a path, the
    file's entries override the defaults, so a partial map is enough to
    move individual tools between categories.
    """
    text = resources.files("geoagent").joinpath("data/category_map.json").read_text()
    mapping = {
        name: ToolCategory(cat) for name, cat in json.loads(text).items()
    }
    if path is not None:
        overrides = json.loads(Path(path).read_text(encoding="utf-8"))
        mapping.update(
            {name: ToolCategory(cat) for name, cat in overrides.items()}
        )
    return mapping


def _p(name: str, kind: str, required: bool, description: str) -> ParamSpec:
    return ParamSpec(name=name, kind=kind, required=required, description=description)


def default_descriptors(
    category_map: Mapping[str, ToolCategory] | None = None,
) -> list[ToolDescriptor]:
    """The 24 shipped tool descriptors."""
    cats = dict(category_map) if category_map is not None else load_category_map()

    def tool(
        name: str,
        description: str,
        params: list[ParamSpec],
        output: str,
        executor_id: str,
    ) -> ToolDescriptor:
        return ToolDescriptor(
            name=name,
            category=cats[name],
            description=description,
            params=tuple(params),
            output=output,
            executor_id=executor_id,
        )

    return [
        tool(
            "Calculator",
            "Evaluates math expressions.",
            [_p("expression", "string", True, "Arithmetic expression to evaluate.")],
            "Numeric result as text.",
            "calculator",
        ),
        tool(
            "OCR",
            "Extracts text from an image.",
            [_p("image", "image-ref", True, "Image to read text from.")],
            "Extracted text.",
            "ocr",
        ),
        tool(
            "DrawBox",
            "Draws a box on an image.",
            [
                _p("image", "image-ref", True, "Base image."),
                _p("bbox", "array-of(number)", True, "Pixel box [x1, y1, x2, y2]."),
                _p("label", "string", False, "Optional label next to the box."),
            ],
            "Image with drawn box.",
            "draw_box",
        ),
        tool(
            "AddText",
            "Adds text to an image.",
            [
                _p("image", "image-ref", True, "Base image."),
                _p("text", "string", True, "Text to draw."),
                _p("position", "array-of(number)", True, "Pixel position [x, y]."),
                _p("color", "string", False, "Optional text color name."),
            ],
            "Image with text overlay.",
            "add_text",
        ),
        tool(
            "GoogleSearch",
            "Returns search results.",
            [
                _p("query", "string", True, "Search query."),
                _p("num_results", "integer", False, "Maximum results to return."),
            ],
            "Search result text.",
            "google_search",
        ),
        tool(
            "Plot",
            "Plots data described by a small program.",
            [_p("code", "string", True, "Program describing the plot.")],
            "Generated plot image.",
            "plot",
        ),
        tool(
            "Solver",
            "Solves simple equations and centroid problems.",
            [
                _p(
                    "program",
                    "string",
                    True,
                    "solve_linear(a, b) for a*x+b=0, or centroid(x1, y1, x2, y2).",
                )
            ],
            "Equation solution object.",
            "solver",
        ),
        tool(
            "TextToBbox",
            "Finds an object from a description.",
            [
                _p("image", "image-ref", True, "Image to search."),
                _p("description", "string", True, "Object description."),
            ],
            "Bounding box coordinates in pixels.",
            "text_to_bbox",
        ),
        tool(
            "ImageDescription",
            "Generates a caption for an image.",
            [_p("image", "image-ref", True, "Image to describe.")],
            "Text description.",
            "image_description",
        ),
        tool(
            "RegionAttributeDescription",
            "Describes an attribute in a region or image.",
            [
                _p("image", "image-ref", True, "Image to inspect."),
                _p("attribute", "string", True, "Attribute to describe."),
                _p("bbox", "array-of(number)", False, "Optional pixel box to focus on."),
            ],
            "Text description of the attribute.",
            "region_attribute_description",
        ),
        tool(
            "CountGivenObject",
            "Counts objects in an image.",
            [
                _p("image", "image-ref", True, "Image to count in."),
                _p("object_name", "string", True, "Object class to count."),
                _p("bbox", "array-of(number)", False, "Optional pixel box to count in."),
            ],
            "Integer count.",
            "count_given_object",
        ),
        tool(
            "ChangeDetection",
            "Describes changes between two images.",
            [
                _p("query", "string", True, "What change to look for."),
                _p("image_before", "image-ref", True, "Earlier image."),
                _p("image_after", "image-ref", True, "Later image."),
            ],
            "Description of changes.",
            "change_detection",
        ),
        tool(
            "SegmentObjectPixels",
            # The optional flag is accepted for interface compatibility and
            # ignored by the fixture-backed executor.
            "Segments objects and counts pixels.",
            [
                _p("image", "image-ref", True, "Image to segment."),
                _p("object_name", "string", True, "Object class to segment."),
                _p("return_all", "boolean", False, "Accepted but ignored."),
            ],
            "Pixel count(s).",
            "segment_object_pixels",
        ),
        tool(
            "ObjectDetection",
            "Detects objects in the image.",
            [_p("image", "image-ref", True, "Image to detect in.")],
            "Labels, boxes, and scores.",
            "object_detection",
        ),
        tool(
            "GetAreaBoundary",
            "Gets an area boundary as a geo bundle.",
            [
                _p("place", "string", False, "Place name from the gazetteer."),
                _p("bbox", "bbox-wsen", False, "Bounding box [W, S, E, N] in degrees."),
                _p("buffer_m", "number", False, "Optional buffer in meters (>= 0)."),
            ],
            "Geo bundle with a boundary layer.",
            "get_area_boundary",
        ),
        tool(
            "AddPoisLayer",
            "Adds POIs to a geo bundle.",
            [
                _p("geopackage", "geo-bundle-ref", True, "Bundle with a boundary layer."),
                _p("query", "string", True, "POI query, e.g. 'kindergarten'."),
                _p("layer", "layer-name", True, "Name for the new POI layer."),
            ],
            "Confirmation with POI count.",
            "add_pois_layer",
        ),
        tool(
            "ComputeDistance",
            "Computes distances between two point layers.",
            [
                _p("geopackage", "geo-bundle-ref", True, "Bundle holding both layers."),
                _p("source_layer", "layer-name", True, "Source point layer."),
                _p("target_layer", "layer-name", True, "Target point layer."),
            ],
            "Summary text, links layer name, and distances in meters.",
            "compute_distance",
        ),
        tool(
            "DisplayOnMap",
            "Renders the map image from layers.",
            [
                _p("geopackage", "geo-bundle-ref", True, "Bundle holding the layers."),
                _p("layers", "array-of(layer-name)", True, "Layers to render."),
            ],
            "Rendered image path.",
            "display_on_map",
        ),
        tool(
            "AddIndexLayer",
            "Computes a spectral index layer.",
            [
                _p("geopackage", "geo-bundle-ref", True, "Bundle holding imagery."),
                _p("index", "string", True, "Index kind: NDVI, NBR, or NDBI."),
                _p("year", "string", True, "Acquisition tag of the source imagery."),
                _p("layer", "layer-name", True, "Name for the new index layer."),
            ],
            "Saved layer name and class statistics.",
            "add_index_layer",
        ),
        tool(
            "ComputeIndexChange",
            "Computes change between index layers.",
            [
                _p("geopackage", "geo-bundle-ref", True, "Bundle holding both layers."),
                _p("index", "string", True, "Index kind: NDVI, NBR, or NDBI."),
                _p("earlier_layer", "layer-name", True, "Earlier index layer."),
                _p("later_layer", "layer-name", True, "Later index layer."),
            ],
            "Saved change layer name and statistics.",
            "compute_index_change",
        ),
        tool(
            "ShowIndexLayer",
            "Generates a preview of a raster index layer.",
            [
                _p("geopackage", "geo-bundle-ref", True, "Bundle holding the layer."),
                _p("index", "string", True, "Index kind: NDVI, NBR, or NDBI."),
                _p("layer", "layer-name", True, "Index layer to preview."),
            ],
            "Preview image path and class statistics.",
            "show_index_layer",
        ),
        tool(
            "GetBboxFromGeotiff",
            "Extracts an area bounding box (W,S,E,N) from a georeferenced raster.",
            [_p("geotiff", "image-ref", True, "Georeferenced raster reference.")],
            "Geo bundle with a boundary rectangle.",
            "get_bbox_from_geotiff",
        ),
        tool(
            "DisplayOnGeotiff",
            "Renders bundle layers over a georeferenced raster.",
            [
                _p("geopackage", "geo-bundle-ref", True, "Bundle holding the layers."),
                _p("layers", "array-of(layer-name)", True, "Layers to render."),
                _p("geotiff", "image-ref", True, "Georeferenced raster reference."),
            ],
            "Rendered image path.",
            "display_on_geotiff",
        ),
        tool(
            "Terminate",
            "Ends the task and returns the final answer.",
            [_p("answer", "string", True, "Final answer text.")],
            "Final answer echo.",
            "terminate",
        ),
    ]


def default_registry(
    category_map_path: str | Path | None = None,
) -> ToolRegistry:
    """Build the shipped registry, optionally with a category override file."""
    cats = load_category_map(category_map_path)
    return build_registry(default_descriptors(cats))
