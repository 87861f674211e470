"""Executor bindings: registry executor ids to deterministic callables.

Each executor maps validated arguments to a JSON-compatible observation
value. Executors are pure functions of (args, fixtures) except for bundle
mutation and image files, and even those are keyed by the call
fingerprint so an identical call always yields an identical observation:
created bundles get refs derived from the call, rendered images get
paths derived from the call.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

from ..canonical import call_fingerprint
from .bundle import GeoBundle, load_bundle
from .calculator import calculator_eval, format_number
from .gis import (
    add_pois_layer,
    compute_distance,
    get_area_boundary,
    get_bbox_from_geotiff,
)
from .indices import (
    MissingLayer,
    band_stats,
    class_counts,
    compute_index_change,
    index_grid,
    required_bands,
)
from .perception import (
    FixtureStore,
    count_given_object,
    describe,
    google_search,
    object_detection,
    ocr_text,
    segment_object_pixels,
    text_to_bbox,
)
from .rendering import (
    render_box,
    render_index,
    render_map,
    render_over_geotiff,
    render_plot,
    render_text,
)
from .solver import solver_eval


class ExecutorFailure(Exception):
    """Raised when an executor cannot produce a value; `code` names why."""

    def __init__(self, code: str, detail: str) -> None:
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail


class UnknownBundleRef(ExecutorFailure):
    def __init__(self, ref: str) -> None:
        super().__init__("UnknownBundleRef", f"no bundle for ref {ref!r}")


@dataclass(slots=True)
class ExecutionContext:
    """Per-session mutable state owned by exactly one running session.

    Attributes:
        fixtures: Shared read-only oracle store.
        workspace: Directory for rendered images.
        fixtures_root: Base for resolving on-disk bundle and raster refs.
        bundles: Session-local bundle table, ref -> bundle.
        invocations: Executor call count (cache hits do not increment).
    """

    fixtures: FixtureStore
    workspace: Path
    fixtures_root: Path | None = None
    bundles: dict[str, GeoBundle] = field(default_factory=dict)
    invocations: int = 0
    # Optional live mode for GoogleSearch; None keeps searches canned
    # and offline (the tested configuration).
    live_search_url: str | None = None

    def resolve_bundle(self, ref: str) -> GeoBundle:
        """Session bundle by ref, loading on-disk bundles lazily by value."""
        if ref in self.bundles:
            return self.bundles[ref]
        for base in filter(None, (self.fixtures_root, Path("."))):
            candidate = Path(base) / ref
            if (candidate / "meta.json").is_file():
                bundle = load_bundle(candidate)
                self.bundles[ref] = bundle
                return bundle
        raise UnknownBundleRef(ref)

    def store_bundle(self, fingerprint: str, bundle: GeoBundle) -> str:
        ref = f"bundle:{fingerprint[:10]}"
        self.bundles[ref] = bundle
        return ref

    def resolve_sidecar(self, ref: str) -> Path:
        """Path of a raster metadata sidecar for a geotiff ref."""
        name = ref if ref.endswith(".json") else f"{ref}.json"
        candidates = []
        if self.fixtures_root is not None:
            candidates.append(Path(self.fixtures_root) / "geotiffs" / name)
            candidates.append(Path(self.fixtures_root) / name)
        candidates.append(Path(name))
        for candidate in candidates:
            if candidate.is_file():
                return candidate
        return candidates[0]

    def image_path(self, tool: str, fingerprint: str) -> Path:
        # Keyed by the call so cache-disabled reruns rewrite the same file.
        return self.workspace / "images" / f"{tool}_{fingerprint[:10]}.png"


Executor = Callable[[ExecutionContext, Mapping[str, Any], str], dict[str, Any]]


def _relative_path(ctx: ExecutionContext, path: str) -> str:
    try:
        return str(Path(path).relative_to(ctx.workspace))
    except ValueError:
        return path


def _exec_calculator(ctx, args, fp):
    value = calculator_eval(args["expression"])
    return {"result": value, "text": format_number(value)}


def _exec_solver(ctx, args, fp):
    return {"solution": solver_eval(args["program"])}


def _exec_google_search(ctx, args, fp):
    if ctx.live_search_url:
        import requests

        response = requests.get(
            ctx.live_search_url, params={"q": args["query"]}, timeout=30
        )
        response.raise_for_status()
        return {"text": response.text[:4096], "offline": False}
    return google_search(ctx.fixtures, args["query"])


def _exec_ocr(ctx, args, fp):
    return ocr_text(ctx.fixtures, args["image"])


def _exec_text_to_bbox(ctx, args, fp):
    return text_to_bbox(ctx.fixtures, args["image"], args["description"])


def _exec_object_detection(ctx, args, fp):
    return object_detection(ctx.fixtures, args["image"])


def _exec_count_given_object(ctx, args, fp):
    return count_given_object(
        ctx.fixtures, args["image"], args["object_name"], args.get("bbox")
    )


def _exec_segment_object_pixels(ctx, args, fp):
    # The optional return_all flag is accepted but has no effect.
    return segment_object_pixels(ctx.fixtures, args["image"], args["object_name"])


def _exec_image_description(ctx, args, fp):
    return describe(ctx.fixtures, args["image"], "caption")


def _exec_region_attribute_description(ctx, args, fp):
    return describe(ctx.fixtures, args["image"], f"attribute:{args['attribute']}")


def _exec_change_detection(ctx, args, fp):
    key = f"change:{args['image_before']}:{args['image_after']}"
    return describe(ctx.fixtures, key, args["query"])


def _exec_get_area_boundary(ctx, args, fp):
    bundle = get_area_boundary(
        ctx.fixtures,
        place=args.get("place"),
        bbox=args.get("bbox"),
        buffer_m=args.get("buffer_m", 0.0),
    )
    ref = ctx.store_bundle(fp, bundle)
    return {"geopackage": ref, "bbox": bundle.bbox, "layers": bundle.layer_names()}


def _exec_add_pois_layer(ctx, args, fp):
    bundle = ctx.resolve_bundle(args["geopackage"])
    count = add_pois_layer(ctx.fixtures, bundle, args["query"], args["layer"])
    return {"count": count, "layer": args["layer"]}


def _exec_compute_distance(ctx, args, fp):
    bundle = ctx.resolve_bundle(args["geopackage"])
    return compute_distance(bundle, args["source_layer"], args["target_layer"])


def _exec_add_index_layer(ctx, args, fp):
    bundle = ctx.resolve_bundle(args["geopackage"])
    kind = args["index"]
    year = args["year"]
    wanted = set(required_bands(kind))
    matches = [
        name
        for name in sorted(bundle.rasters)
        if year in name and wanted <= set(bundle.rasters[name].bands)
    ]
    if not matches:
        raise MissingLayer(f"no imagery raster for year {year!r} with bands {sorted(wanted)}")
    if len(matches) > 1:
        raise MissingLayer(f"ambiguous imagery for year {year!r}: {matches}")
    grid = index_grid(bundle.rasters[matches[0]], kind)
    bundle.add_raster(args["layer"], grid, replace=True)
    return {
        "layer": args["layer"],
        "class_stats": class_counts(grid.bands["index"], kind, grid.nodata),
    }


def _exec_compute_index_change(ctx, args, fp):
    bundle = ctx.resolve_bundle(args["geopackage"])
    change_layer, stats = compute_index_change(
        bundle, args["index"], args["earlier_layer"], args["later_layer"]
    )
    return {"change_layer": change_layer, "stats": stats}


def _exec_show_index_layer(ctx, args, fp):
    bundle = ctx.resolve_bundle(args["geopackage"])
    layer = args["layer"]
    if layer not in bundle.rasters:
        raise MissingLayer(f"bundle has no raster layer {layer!r}")
    grid = bundle.rasters[layer]
    path = render_index(grid, args["index"], ctx.image_path("ShowIndexLayer", fp))
    return {
        "image_path": _relative_path(ctx, path),
        "class_stats": class_counts(grid.bands["index"], args["index"], grid.nodata),
    }


def _exec_display_on_map(ctx, args, fp):
    bundle = ctx.resolve_bundle(args["geopackage"])
    for layer in args["layers"]:
        if layer not in bundle.vector_layers:
            raise MissingLayer(f"bundle has no vector layer {layer!r}")
    path = render_map(bundle, args["layers"], ctx.image_path("DisplayOnMap", fp))
    return {"image_path": _relative_path(ctx, path)}


def _exec_display_on_geotiff(ctx, args, fp):
    bundle = ctx.resolve_bundle(args["geopackage"])
    for layer in args["layers"]:
        if layer not in bundle.vector_layers:
            raise MissingLayer(f"bundle has no vector layer {layer!r}")
    path = render_over_geotiff(
        bundle,
        args["layers"],
        args["geotiff"],
        ctx.image_path("DisplayOnGeotiff", fp),
    )
    return {"image_path": _relative_path(ctx, path)}


def _exec_draw_box(ctx, args, fp):
    path = render_box(
        args["image"],
        args["bbox"],
        args.get("label"),
        ctx.image_path("DrawBox", fp),
    )
    return {"image_path": _relative_path(ctx, path)}


def _exec_add_text(ctx, args, fp):
    path = render_text(
        args["image"],
        args["text"],
        args["position"],
        args.get("color"),
        ctx.image_path("AddText", fp),
    )
    return {"image_path": _relative_path(ctx, path)}


def _exec_plot(ctx, args, fp):
    path = render_plot(args["code"], ctx.image_path("Plot", fp))
    return {"image_path": _relative_path(ctx, path)}


def _exec_get_bbox_from_geotiff(ctx, args, fp):
    bundle = get_bbox_from_geotiff(ctx.resolve_sidecar(args["geotiff"]))
    ref = ctx.store_bundle(fp, bundle)
    return {"geopackage": ref, "bbox": bundle.bbox, "layers": bundle.layer_names()}


def _exec_terminate(ctx, args, fp):
    return {"answer": args["answer"]}


EXECUTORS: dict[str, Executor] = {
    "calculator": _exec_calculator,
    "solver": _exec_solver,
    "google_search": _exec_google_search,
    "ocr": _exec_ocr,
    "text_to_bbox": _exec_text_to_bbox,
    "object_detection": _exec_object_detection,
    "count_given_object": _exec_count_given_object,
    "segment_object_pixels": _exec_segment_object_pixels,
    "image_description": _exec_image_description,
    "region_attribute_description": _exec_region_attribute_description,
    "change_detection": _exec_change_detection,
    "get_area_boundary": _exec_get_area_boundary,
    "add_pois_layer": _exec_add_pois_layer,
    "compute_distance": _exec_compute_distance,
    "add_index_layer": _exec_add_index_layer,
    "compute_index_change": _exec_compute_index_change,
    "show_index_layer": _exec_show_index_layer,
    "display_on_map": _exec_display_on_map,
    "display_on_geotiff": _exec_display_on_geotiff,
    "draw_box": _exec_draw_box,
    "add_text": _exec_add_text,
    "plot": _exec_plot,
    "get_bbox_from_geotiff": _exec_get_bbox_from_geotiff,
    "terminate": _exec_terminate,
}


def execute(
    ctx: ExecutionContext,
    executor_id: str,
    tool_name: str,
    args: Mapping[str, Any],
) -> dict[str, Any]:
    """Run the executor bound to `executor_id` and return its value.

    Raises:
        ExecutorFailure: Unknown executor id.
        Exception: Executor-specific failures propagate with a `code`.
    """
    executor = EXECUTORS.get(executor_id)
    if executor is None:
        raise ExecutorFailure("UnknownExecutor", f"no executor {executor_id!r}")
    ctx.invocations += 1
    fingerprint = call_fingerprint(tool_name, dict(args))
    return executor(ctx, args, fingerprint)


# Keep band_stats importable from here for convenience in reports.
__all__ = [
    "ExecutionContext",
    "ExecutorFailure",
    "UnknownBundleRef",
    "EXECUTORS",
    "execute",
    "band_stats",
]
