"""Shipped fixture data and the golden corpus builder.

Everything here is deterministic: the oracle store (gazetteer, POIs,
annotations, canned text, GSD), the input geo bundles, and 25 task plans
spanning all seven domains, five modalities, and all 24 tools. The golden
corpus is materialized by running each plan through the orchestrator, so
every stored observation is a genuine executor output and the corpus is
replay-valid by construction (25 records, 170 steps, average 6.8).
"""

from __future__ import annotations

import re
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

from .canonical import canonical_pretty
from .corpus import TaskInstance, TrajectoryRecord, save_corpus
from .defaults import default_registry, load_category_map
from .geotools.bundle import Feature, GeoBundle, RasterGrid, save_bundle
from .geotools.perception import Annotation, FixtureStore, save_fixture_store
from .orchestrator import (
    Action,
    RunStatus,
    SessionConfig,
    ToolCall,
    WorkingMemory,
    render_action_text,
    run,
)
from .registry import ToolRegistry, save_registry_file

GOLDEN_RECORD_COUNT = 25
GOLDEN_STEP_COUNT = 170
CORRUPTED_IDS = ("t03", "t14")

# Observations of earlier steps, 1-based by transcript position; entries
# are observation value dicts (None for thought-only turns).
ObsView = Sequence[Mapping[str, Any] | None]
ArgsFn = Callable[[ObsView], dict[str, Any]]


@dataclass(frozen=True, slots=True)
class PlanStep:
    thought: str
    tool: str | None = None
    args: dict[str, Any] | None = None
    args_fn: ArgsFn | None = None

    def resolve_args(self, observations: ObsView) -> dict[str, Any]:
        if self.args_fn is not None:
            return self.args_fn(observations)
        return dict(self.args or {})


@dataclass(frozen=True, slots=True)
class Plan:
    task: TaskInstance
    answer_kind: str
    steps: tuple[PlanStep, ...]


class PlanPolicy:
    """Emits a plan step per turn, resolving deferred args from the
    transcript observations (the way a live agent would read them)."""

    def __init__(self, plan: Plan) -> None:
        self.plan = plan
        self._index = 0

    def next_action(self, memory: WorkingMemory) -> str:
        step = self.plan.steps[self._index]
        self._index += 1
        if step.tool is None:
            return render_action_text(Action(thought=step.thought, call=None))
        observations: list[Mapping[str, Any] | None] = [
            turn.observation.value
            if turn.observation is not None and turn.observation.ok
            else None
            for turn in memory.transcript
        ]
        call = ToolCall(tool=step.tool, args=step.resolve_args(observations))
        return render_action_text(Action(thought=step.thought, call=call))


# ---------------------------------------------------------------------------
# Oracle store
# ---------------------------------------------------------------------------


def _square(lon0: float, lat0: float, lon1: float, lat1: float) -> list[list[float]]:
    return [[lon0, lat0], [lon1, lat0], [lon1, lat1], [lon0, lat1], [lon0, lat0]]


def _points(coords: Sequence[tuple[float, float]], **props: Any) -> list[Feature]:
    return [Feature.point(lon, lat, **props) for lon, lat in coords]


def default_fixture_store() -> FixtureStore:
    """The shipped oracle data used by tests and the golden corpus."""
    gazetteer = {
        "Riverton": _square(29.95, 49.95, 30.05, 50.05),
        "Lakeview Commons": _square(-71.02, 41.98, -70.98, 42.02),
        "Eastport": _square(12.26, 45.36, 12.34, 45.44),
        "Harbor District": _square(151.17, -33.88, 151.23, -33.82),
        "TestPark": _square(10.0, 20.0, 10.1, 20.1),
    }

    poi_db: dict[tuple[str, str], list[Feature]] = {
        ("Riverton", "kindergarten"): _points(
            [
                (29.96, 49.96),
                (29.97, 50.01),
                (29.99, 49.99),
                (30.00, 50.02),
                (30.01, 49.97),
                (30.03, 50.00),
                (30.04, 50.04),
            ],
            name="kindergarten",
        ),
        ("Riverton", "police station"): _points(
            [(29.98, 49.98), (30.02, 50.02), (30.04, 49.96)], name="police station"
        ),
        # Two inside and one outside the polygon: tests the containment cut.
        ("Riverton", "library"): _points(
            [(29.97, 49.97), (30.03, 50.03), (30.20, 50.20)], name="library"
        ),
        # One playground sits exactly on the south edge (closed containment).
        ("Lakeview Commons", "playground"): _points(
            [(-71.01, 42.00), (-70.99, 42.01), (-71.005, 41.99), (-71.0, 41.98)],
            name="playground",
        ),
        ("Lakeview Commons", "picnic table"): _points(
            [
                (-71.015, 41.985),
                (-71.012, 42.015),
                (-70.995, 41.995),
                (-70.99, 42.018),
                (-70.985, 41.99),
            ],
            name="picnic table",
        ),
        ("Lakeview Commons", "bench"): _points(
            [(-71.008, 42.005), (-70.992, 42.012)], name="bench"
        ),
        ("Eastport", "bus stop"): _points(
            [(12.28, 45.38), (12.30, 45.42), (12.32, 45.39), (12.33, 45.43)],
            name="bus stop",
        ),
        ("Eastport", "train station"): _points(
            [(12.29, 45.40), (12.315, 45.415)], name="train station"
        ),
        ("Harbor District", "emergency shelter"): _points(
            [(151.18, -33.87), (151.20, -33.84), (151.22, -33.86)],
            name="emergency shelter",
        ),
        ("Harbor District", "hospital"): _points(
            [(151.19, -33.85), (151.21, -33.83)], name="hospital"
        ),
    }

    boxes = {
        "left airplane": [(90.0, 80.0, 110.0, 120.0)],
        "right airplane": [(190.0, 80.0, 210.0, 120.0)],
        "airplane": [
            (90.0, 80.0, 110.0, 120.0),
            (190.0, 80.0, 210.0, 120.0),
            (250.0, 40.0, 270.0, 80.0),
        ],
        "main runway": [(40.0, 150.0, 290.0, 170.0)],
    }

    def grid_boxes(n: int, x0: float = 10.0, y0: float = 10.0) -> list[tuple]:
        out = []
        for i in range(n):
            x = x0 + 30.0 * (i % 5)
            y = y0 + 30.0 * (i // 5)
            out.append((x, y, x + 20.0, y + 20.0))
        return out

    annotations: dict[tuple[str, str], Annotation] = {}

    def ann(image: str, label: str, **kwargs: Any) -> None:
        annotations[(image, label)] = Annotation(**kwargs)

    # t01 / t19: airfield
    for label, bs in boxes.items():
        ann("airfield_west.png", label, boxes=tuple(bs))
    ann("airfield_west.png", "caption",
        caption="Two airplanes parked beside an east-west runway.")
    # t04: flood pair
    ann("change:flood_before.png:flood_after.png", "flood damage",
        caption="Floodwater now covers the southern district; several "
                "buildings show roof damage.")
    ann("flood_after.png", "damaged building", boxes=tuple(grid_boxes(5)))
    ann("flood_after.png", "collapsed bridge", boxes=((120.0, 90.0, 200.0, 120.0),))
    ann("flood_after.png", "flood water", mask_pixels=(3200,))
    # t05: depot
    ann("depot.png", "truck", boxes=tuple(grid_boxes(12)))
    ann("depot.png", "attribute:color", caption="Most trucks are white.")
    ann("depot.png", "caption", caption="A logistics depot with parked trucks.")
    # t07: plant
    ann("plant.png", "storage tank",
        boxes=tuple(grid_boxes(6)), mask_pixels=(500, 500, 500, 500, 500, 500))
    ann("plant.png", "warehouse", boxes=tuple(grid_boxes(2, x0=200.0)))
    ann("plant.png", "chimney", boxes=((280.0, 10.0, 295.0, 60.0),))
    ann("plant.png", "attribute:roof color", caption="The tank roofs are silver.")
    # t10: SAR harbor
    ann("sar_harbor.png", "caption",
        caption="A SAR scene of a harbor with ships at berth and aircraft "
                "on an adjacent apron.")
    ann("sar_harbor.png", "cargo ship", boxes=tuple(grid_boxes(4)))
    ann("sar_harbor.png", "aircraft", boxes=tuple(grid_boxes(2, y0=150.0)))
    ann("sar_harbor.png", "attribute:vessel size",
        caption="Vessels range from 80 to 150 meters long.")
    # t12: street sign
    ann("street_sign.png", "caption", caption="A road sign near an intersection.")
    ann("street_sign.png", "sign", boxes=((140.0, 40.0, 180.0, 90.0),))
    # t13: resort
    ann("resort.png", "swimming pool",
        boxes=((60.0, 50.0, 140.0, 110.0), (180.0, 60.0, 240.0, 100.0)),
        mask_pixels=(1800, 1400))
    ann("resort.png", "attribute:shape", caption="Both pools are kidney-shaped.")
    # t16: city center
    ann("city_center.png", "caption",
        caption="A dense city center with a large stadium.")
    ann("city_center.png", "stadium", boxes=((100.0, 60.0, 220.0, 160.0),))
    # t17: dumpsite
    ann("dumpsite.png", "caption",
        caption="An open field with several informal dump sites.")
    ann("dumpsite.png", "attribute:material",
        caption="Mostly construction debris and household waste.")
    ann("dumpsite.png", "dump site",
        boxes=tuple(grid_boxes(3)), mask_pixels=(2000, 1500, 2500))
    # t18: burn pair
    ann("change:burn_before.png:burn_after.png", "burn damage",
        caption="A burn scar spreads across the hillside; structures along "
                "the ridge are scorched.")
    ann("burn_after.png", "burned building", boxes=tuple(grid_boxes(4)))
    ann("burn_after.png", "burned area", mask_pixels=(5000,))
    # t21: freight yard
    ann("freight_yard.png", "caption",
        caption="A freight yard with trucks staged at loading docks.")
    ann("freight_yard.png", "attribute:activity",
        caption="Active loading on the north docks.")
    ann("freight_yard.png", "truck", boxes=tuple(grid_boxes(9)))
    # t22: construction pair
    ann("change:construction_before.png:construction_after.png",
        "new construction",
        caption="Six new buildings have appeared; two older structures "
                "were demolished.")
    ann("construction_after.png", "new building", boxes=tuple(grid_boxes(6)))
    ann("construction_after.png", "demolished building",
        boxes=tuple(grid_boxes(2, y0=160.0)))
    # t24: junction
    ann("junction.png", "caption", caption="A busy junction with buses and cars.")
    ann("junction.png", "bus", boxes=tuple(grid_boxes(5)))
    ann("junction.png", "car", boxes=tuple(grid_boxes(8, y0=120.0)))

    canned_text = {
        "airfield_west.png": "RWY 27",
        "street_sign.png": "SPEED LIMIT 45",
        "average heavy truck capacity tonnes":
            "A typical heavy truck carries about 24 tonnes.",
        "ndbi built-up threshold":
            "Built-up surfaces typically show NDBI above 0.1.",
    }

    gsd = {
        "airfield_west.png": 0.072,
        "flood_after.png": 0.5,
        "flood_before.png": 0.5,
        "depot.png": 0.25,
        "plant.png": 0.3,
        "sar_harbor.png": 1.0,
        "street_sign.png": 0.05,
        "resort.png": 0.2,
        "city_center.png": 0.5,
        "dumpsite.png": 0.6,
        "burn_after.png": 0.4,
        "burn_before.png": 0.4,
        "construction_after.png": 0.3,
        "construction_before.png": 0.3,
        "junction.png": 0.15,
        "freight_yard.png": 0.25,
    }

    return FixtureStore(
        gazetteer=gazetteer,
        poi_db=poi_db,
        annotations=annotations,
        canned_text=canned_text,
        gsd=gsd,
    )


# ---------------------------------------------------------------------------
# Input bundles and raster sidecars
# ---------------------------------------------------------------------------


def _uniform_band(value: float, n: int = 64) -> list[float]:
    return [value] * n


def _split_band(first: float, rest: float, n_first: int, n: int = 64) -> list[float]:
    return [first] * n_first + [rest] * (n - n_first)


def _bundle(
    bbox: list[float],
    rasters: dict[str, dict[str, list[float]]],
    provenance: str,
) -> GeoBundle:
    bundle = GeoBundle(bbox=list(bbox), provenance=provenance)
    ring = [[bbox[0], bbox[1]], [bbox[2], bbox[1]], [bbox[2], bbox[3]],
            [bbox[0], bbox[3]], [bbox[0], bbox[1]]]
    bundle.add_vector_layer("boundary", [Feature.polygon(ring)])
    for name, bands in rasters.items():
        bundle.add_raster(
            name,
            RasterGrid(
                width=8,
                height=8,
                origin=(bbox[0], bbox[3]),
                pixel_size=((bbox[2] - bbox[0]) / 8, -(bbox[3] - bbox[1]) / 8),
                bands=bands,
            ),
        )
    return bundle


def input_bundles() -> dict[str, GeoBundle]:
    """The geo-bundle task inputs, keyed by their corpus-relative path."""
    return {
        # t02: NBR drop over the southern 40 of 64 pixels (burn scar).
        "bundles/cedar_ridge": _bundle(
            [-118.64, 34.06, -118.56, 34.14],
            {
                "sentinel2_2024-12": {
                    "nir": _uniform_band(0.6),
                    "swir2": _uniform_band(0.2),
                },
                "sentinel2_2025-02": {
                    "nir": _split_band(0.6, 0.27, 24),
                    "swir2": _split_band(0.2, 0.33, 24),
                },
            },
            "bundle:cedar_ridge",
        ),
        # t11: NDVI drop over the first 24 pixels (flood-hit fields).
        "bundles/green_valley": _bundle(
            [23.30, 42.10, 23.38, 42.18],
            {
                "sentinel2_2024-08": {
                    "nir": _uniform_band(0.6),
                    "red": _uniform_band(0.2),
                },
                "sentinel2_2024-09": {
                    "nir": _split_band(0.3, 0.6, 24),
                    "red": _split_band(0.3, 0.2, 24),
                },
            },
            "bundle:green_valley",
        ),
        # t08: 16 dense / 32 sparse / 16 barren NDVI pixels.
        "bundles/city_blocks": _bundle(
            [-0.14, 51.46, -0.06, 51.54],
            {
                "sentinel2_2025-06": {
                    "nir": [0.8] * 16 + [0.45] * 32 + [0.3] * 16,
                    "red": [0.1] * 16 + [0.25] * 32 + [0.25] * 16,
                },
            },
            "bundle:city_blocks",
        ),
        # t15: 20 high / 24 mid / 20 low NDBI pixels.
        "bundles/mill_district": _bundle(
            [103.60, 1.28, 103.68, 1.36],
            {
                "sentinel2_2025-03": {
                    "swir1": [0.5] * 20 + [0.4] * 24 + [0.3] * 20,
                    "nir": [0.4] * 20 + [0.4] * 24 + [0.45] * 20,
                },
            },
            "bundle:mill_district",
        ),
        # t23: NBR drop over the first 32 pixels.
        "bundles/ashfork": _bundle(
            [-112.52, 35.18, -112.44, 35.26],
            {
                "sentinel2_2023-07": {
                    "nir": _uniform_band(0.6),
                    "swir2": _uniform_band(0.2),
                },
                "sentinel2_2023-09": {
                    "nir": _split_band(0.2, 0.6, 32),
                    "swir2": _split_band(0.3, 0.2, 32),
                },
            },
            "bundle:ashfork",
        ),
    }


GEOTIFF_SIDECARS: dict[str, dict[str, Any]] = {
    "wetland_scene": {
        "width": 400,
        "height": 300,
        "origin": [23.5, 41.2],
        "pixel_size": [0.0002, -0.0002],
    },
}


# ---------------------------------------------------------------------------
# Golden task plans
# ---------------------------------------------------------------------------


def _task(
    task_id: str,
    domain: str,
    modality: str,
    query: str,
    inputs: Sequence[dict[str, Any]] = (),
) -> TaskInstance:
    return TaskInstance(
        id=task_id,
        domain=domain,
        modality=modality,
        query=query,
        inputs=tuple(dict(e) for e in inputs),
    )


def _value(observations: ObsView, step: int, *path: str) -> Any:
    value: Any = observations[step - 1]
    assert value is not None, f"step {step} has no observation value"
    for key in path:
        value = value[key]
    return value


def _first_int(text: str) -> int:
    match = re.search(r"\d+", text)
    assert match, f"no integer in {text!r}"
    return int(match.group(0))


def golden_plans() -> list[Plan]:
    """25 plans spanning all domains, modalities, and tools."""
    plans: list[Plan] = []

    def add(
        task: TaskInstance, answer_kind: str, steps: Sequence[PlanStep]
    ) -> None:
        plans.append(Plan(task=task, answer_kind=answer_kind, steps=tuple(steps)))

    # t01: the centroid-distance-times-GSD workflow (axis-aligned).
    air = "airfield_west.png"
    add(
        _task(
            "t01", "aviation", "rgb",
            "What is the distance in meters between the two airplanes? "
            "The image GSD is 0.072 m/px.",
            [{"kind": "image", "path": air, "gsd_m_per_px": 0.072}],
        ),
        "numeric",
        [
            PlanStep(
                "Locate both airplanes, compute their centroids, then "
                "convert the pixel distance to meters using the GSD."
            ),
            PlanStep("Find the left airplane.", "TextToBbox",
                     {"image": air, "description": "left airplane"}),
            PlanStep("Find the right airplane.", "TextToBbox",
                     {"image": air, "description": "right airplane"}),
            PlanStep("Centroid of the left box.", "Solver",
                     {"program": "centroid(90, 80, 110, 120)"}),
            PlanStep("Centroid of the right box.", "Solver",
                     {"program": "centroid(190, 80, 210, 120)"}),
            PlanStep(
                "Euclidean pixel distance scaled by the GSD.",
                "Calculator",
                {"expression": "sqrt((200-100)^2 + (100-100)^2) * 0.072"},
            ),
            PlanStep(
                "Report the metric distance.", "Terminate",
                args_fn=lambda obs: {"answer": f"{_value(obs, 6, 'text')} m"},
            ),
        ],
    )

    # t02: NBR change over a park (burn-scar mapping).
    cedar = "bundles/cedar_ridge"
    add(
        _task(
            "t02", "environment", "index",
            "How large a share of Cedar Ridge Park shows a burn-related "
            "NBR decline between December 2024 and February 2025?",
            [{"kind": "geo_bundle", "path": cedar, "crs": "EPSG:4326"}],
        ),
        "numeric",
        [
            PlanStep(
                "Compute NBR for both dates, difference them, and measure "
                "the negative share."
            ),
            PlanStep("NBR before the fire season.", "AddIndexLayer",
                     {"geopackage": cedar, "index": "NBR", "year": "2024-12",
                      "layer": "nbr_before"}),
            PlanStep("Preview the before layer.", "ShowIndexLayer",
                     {"geopackage": cedar, "index": "NBR", "layer": "nbr_before"}),
            PlanStep("NBR after.", "AddIndexLayer",
                     {"geopackage": cedar, "index": "NBR", "year": "2025-02",
                      "layer": "nbr_after"}),
            PlanStep("Preview the after layer.", "ShowIndexLayer",
                     {"geopackage": cedar, "index": "NBR", "layer": "nbr_after"}),
            PlanStep("Difference the two dates.", "ComputeIndexChange",
                     {"geopackage": cedar, "index": "NBR",
                      "earlier_layer": "nbr_before", "later_layer": "nbr_after"}),
            PlanStep(
                "Preview the change layer.", "ShowIndexLayer",
                args_fn=lambda obs: {
                    "geopackage": cedar, "index": "NBR",
                    "layer": _value(obs, 6, "change_layer"),
                },
            ),
            PlanStep(
                "Convert the negative fraction to a percentage.",
                "Calculator",
                args_fn=lambda obs: {
                    "expression": f"{_value(obs, 6, 'stats', 'frac_negative')!r}*100"
                },
            ),
            PlanStep(
                "Report the declined share.", "Terminate",
                args_fn=lambda obs: {
                    "answer": f"{_value(obs, 8, 'text')}% of the park shows an "
                              "NBR decline"
                },
            ),
        ],
    )

    # t03: kindergarten-to-police distances in a buffered boundary.
    add(
        _task(
            "t03", "urban", "gis",
            "Within 1000 m of Riverton, what is the mean distance from each "
            "kindergarten to the nearest police station?",
        ),
        "numeric",
        [
            PlanStep(
                "Buffer the Riverton boundary, add both POI layers, and "
                "measure nearest-neighbor distances."
            ),
            PlanStep("Get the buffered boundary.", "GetAreaBoundary",
                     {"place": "Riverton", "buffer_m": 1000}),
            PlanStep(
                "Add kindergartens.", "AddPoisLayer",
                args_fn=lambda obs: {
                    "geopackage": _value(obs, 2, "geopackage"),
                    "query": "kindergarten", "layer": "kindergartens",
                },
            ),
            PlanStep(
                "Add police stations.", "AddPoisLayer",
                args_fn=lambda obs: {
                    "geopackage": _value(obs, 2, "geopackage"),
                    "query": "police station", "layer": "police_stations",
                },
            ),
            PlanStep(
                "Nearest police station per kindergarten.", "ComputeDistance",
                args_fn=lambda obs: {
                    "geopackage": _value(obs, 2, "geopackage"),
                    "source_layer": "kindergartens",
                    "target_layer": "police_stations",
                },
            ),
            PlanStep(
                "Average the distances.", "Calculator",
                args_fn=lambda obs: {
                    "expression": "("
                    + "+".join(repr(d) for d in _value(obs, 5, "distances_m"))
                    + f")/{len(_value(obs, 5, 'distances_m'))}"
                },
            ),
            PlanStep(
                "Render the layers.", "DisplayOnMap",
                args_fn=lambda obs: {
                    "geopackage": _value(obs, 2, "geopackage"),
                    "layers": ["boundary", "kindergartens", "police_stations",
                               _value(obs, 5, "links_layer")],
                },
            ),
            PlanStep(
                "Report the mean distance.", "Terminate",
                args_fn=lambda obs: {
                    "answer": f"Mean distance {_value(obs, 6, 'text')} m"
                },
            ),
        ],
    )

    # t04: flood damage assessment over a change pair.
    add(
        _task(
            "t04", "disaster", "cd_pair",
            "Assess the flood damage: how many buildings are damaged, and "
            "how large is the flooded area?",
            [
                {"kind": "image", "path": "flood_before.png", "gsd_m_per_px": 0.5},
                {"kind": "image", "path": "flood_after.png", "gsd_m_per_px": 0.5},
            ],
        ),
        "numeric",
        [
            PlanStep(
                "Describe the change, count damaged structures, and measure "
                "the flooded area from its pixel extent."
            ),
            PlanStep("Describe the change.", "ChangeDetection",
                     {"query": "flood damage", "image_before": "flood_before.png",
                      "image_after": "flood_after.png"}),
            PlanStep("Count damaged buildings.", "CountGivenObject",
                     {"image": "flood_after.png", "object_name": "damaged building"}),
            PlanStep("Check the bridge.", "CountGivenObject",
                     {"image": "flood_after.png", "object_name": "collapsed bridge"}),
            PlanStep("Measure the flood extent.", "SegmentObjectPixels",
                     {"image": "flood_after.png", "object_name": "flood water"}),
            PlanStep(
                "Convert pixels to square meters.", "Calculator",
                args_fn=lambda obs: {
                    "expression": f"{_value(obs, 5, 'pixel_counts')[0]}*0.5^2"
                },
            ),
            PlanStep("Highlight the flood zone.", "DrawBox",
                     {"image": "flood_after.png", "bbox": [10, 10, 160, 150],
                      "label": "flood zone"}),
            PlanStep(
                "Summarize the damage.", "Terminate",
                args_fn=lambda obs: {
                    "answer": f"{_value(obs, 3, 'count')} damaged buildings and "
                              f"{_value(obs, 4, 'count')} collapsed bridge; about "
                              f"{_value(obs, 6, 'text')} square meters flooded"
                },
            ),
        ],
    )

    # t05: depot truck capacity.
    add(
        _task(
            "t05", "transportation", "rgb",
            "Estimate the total freight capacity of the trucks at the depot "
            "in tonnes.",
            [{"kind": "image", "path": "depot.png", "gsd_m_per_px": 0.25}],
        ),
        "numeric",
        [
            PlanStep("Count the trucks and scale by a typical capacity."),
            PlanStep("Survey the scene.", "ImageDescription",
                     {"image": "depot.png"}),
            PlanStep("Count trucks.", "CountGivenObject",
                     {"image": "depot.png", "object_name": "truck"}),
            PlanStep("Check their type.", "RegionAttributeDescription",
                     {"image": "depot.png", "attribute": "color"}),
            PlanStep("Look up typical capacity.", "GoogleSearch",
                     {"query": "average heavy truck capacity tonnes"}),
            PlanStep(
                "Multiply count by capacity.", "Calculator",
                args_fn=lambda obs: {
                    "expression": f"{_value(obs, 3, 'count')}*24"
                },
            ),
            PlanStep(
                "Report the tonnage.", "Terminate",
                args_fn=lambda obs: {
                    "answer": f"{_value(obs, 6, 'text')} tonnes"
                },
            ),
        ],
    )

    # t06: playgrounds in a park.
    add(
        _task(
            "t06", "recreation", "gis",
            "How many playgrounds are inside Lakeview Commons?",
        ),
        "numeric",
        [
            PlanStep("Fetch the boundary and count playground POIs inside."),
            PlanStep("Get the boundary.", "GetAreaBoundary",
                     {"place": "Lakeview Commons", "buffer_m": 0}),
            PlanStep(
                "Add playgrounds.", "AddPoisLayer",
                args_fn=lambda obs: {
                    "geopackage": _value(obs, 2, "geopackage"),
                    "query": "playground", "layer": "playgrounds",
                },
            ),
            PlanStep(
                "Add benches for context.", "AddPoisLayer",
                args_fn=lambda obs: {
                    "geopackage": _value(obs, 2, "geopackage"),
                    "query": "bench", "layer": "benches",
                },
            ),
            PlanStep(
                "Render the park.", "DisplayOnMap",
                args_fn=lambda obs: {
                    "geopackage": _value(obs, 2, "geopackage"),
                    "layers": ["boundary", "playgrounds", "benches"],
                },
            ),
            PlanStep(
                "Report the count.", "Terminate",
                args_fn=lambda obs: {
                    "answer": f"{_value(obs, 3, 'count')} playgrounds"
                },
            ),
        ],
    )

    # t07: storage tanks at an industrial plant.
    add(
        _task(
            "t07", "industrial", "rgb",
            "How many storage tanks does the plant have, and what ground "
            "area do they cover?",
            [{"kind": "image", "path": "plant.png", "gsd_m_per_px": 0.3}],
        ),
        "numeric",
        [
            PlanStep("Detect objects, count the tanks, and measure their area."),
            PlanStep("Detect everything.", "ObjectDetection", {"image": "plant.png"}),
            PlanStep("Confirm tank appearance.", "RegionAttributeDescription",
                     {"image": "plant.png", "attribute": "roof color"}),
            PlanStep("Count tanks.", "CountGivenObject",
                     {"image": "plant.png", "object_name": "storage tank"}),
            PlanStep("Segment tank pixels.", "SegmentObjectPixels",
                     {"image": "plant.png", "object_name": "storage tank"}),
            PlanStep(
                "Total area in square meters.", "Calculator",
                args_fn=lambda obs: {
                    "expression": "("
                    + "+".join(str(c) for c in _value(obs, 5, "pixel_counts"))
                    + ")*0.3^2"
                },
            ),
            PlanStep(
                "Report count and area.", "Terminate",
                args_fn=lambda obs: {
                    "answer": f"{_value(obs, 4, 'count')} storage tanks covering "
                              f"about {_value(obs, 6, 'text')} square meters"
                },
            ),
        ],
    )

    # t08: NDVI classes over city blocks.
    city = "bundles/city_blocks"
    add(
        _task(
            "t08", "urban", "index",
            "What share of the city blocks shows dense vegetation in the "
            "June 2025 NDVI?",
            [{"kind": "geo_bundle", "path": city, "crs": "EPSG:4326"}],
        ),
        "numeric",
        [
            PlanStep("Compute NDVI and read the dense-class share."),
            PlanStep("Compute NDVI.", "AddIndexLayer",
                     {"geopackage": city, "index": "NDVI", "year": "2025-06",
                      "layer": "ndvi_summer"}),
            PlanStep("Preview with classes.", "ShowIndexLayer",
                     {"geopackage": city, "index": "NDVI", "layer": "ndvi_summer"}),
            PlanStep("Render the boundary.", "DisplayOnMap",
                     {"geopackage": city, "layers": ["boundary"]}),
            PlanStep(
                "Dense share as a percentage.", "Calculator",
                args_fn=lambda obs: {
                    "expression": f"{_value(obs, 2, 'class_stats', 'dense')}/64*100"
                },
            ),
            PlanStep(
                "Report the dense share.", "Terminate",
                args_fn=lambda obs: {
                    "answer": f"{_value(obs, 5, 'text')}% dense vegetation"
                },
            ),
        ],
    )

    # t09: geotiff footprint rendering (generation task).
    add(
        _task(
            "t09", "environment", "gis",
            "Extract the wetland scene footprint and render the boundary "
            "over the georeferenced raster.",
            [{"kind": "image", "path": "wetland_scene"}],
        ),
        "generation",
        [
            PlanStep("Derive the footprint, then render map and overlay."),
            PlanStep("Footprint from the raster metadata.", "GetBboxFromGeotiff",
                     {"geotiff": "wetland_scene"}),
            PlanStep(
                "Plain map of the boundary.", "DisplayOnMap",
                args_fn=lambda obs: {
                    "geopackage": _value(obs, 2, "geopackage"),
                    "layers": ["boundary"],
                },
            ),
            PlanStep(
                "Overlay on the raster.", "DisplayOnGeotiff",
                args_fn=lambda obs: {
                    "geopackage": _value(obs, 2, "geopackage"),
                    "layers": ["boundary"], "geotiff": "wetland_scene",
                },
            ),
            PlanStep("Label the scene.", "AddText",
                     {"image": "wetland_scene", "text": "Wetland AOI",
                      "position": [12, 12]}),
            PlanStep("Confirm the renders.", "Terminate",
                     {"answer": "Rendered the wetland footprint overlays"}),
        ],
    )

    # t10: SAR harbor counts.
    add(
        _task(
            "t10", "aviation", "sar",
            "How many cargo ships and aircraft are visible in the SAR "
            "harbor scene in total?",
            [{"kind": "image", "path": "sar_harbor.png", "gsd_m_per_px": 1.0}],
        ),
        "numeric",
        [
            PlanStep("Count ships and aircraft separately, then total."),
            PlanStep("Describe the scene.", "ImageDescription",
                     {"image": "sar_harbor.png"}),
            PlanStep("Note vessel sizes.", "RegionAttributeDescription",
                     {"image": "sar_harbor.png", "attribute": "vessel size"}),
            PlanStep("Count ships.", "CountGivenObject",
                     {"image": "sar_harbor.png", "object_name": "cargo ship"}),
            PlanStep("Count aircraft.", "CountGivenObject",
                     {"image": "sar_harbor.png", "object_name": "aircraft"}),
            PlanStep(
                "Total the two counts.", "Calculator",
                args_fn=lambda obs: {
                    "expression": f"{_value(obs, 4, 'count')}+{_value(obs, 5, 'count')}"
                },
            ),
            PlanStep(
                "Report the total.", "Terminate",
                args_fn=lambda obs: {
                    "answer": f"{_value(obs, 6, 'text')} vessels and aircraft"
                },
            ),
        ],
    )

    # t11: NDVI loss after flooding.
    valley = "bundles/green_valley"
    add(
        _task(
            "t11", "disaster", "index",
            "What share of Green Valley lost vegetation between August and "
            "September 2024?",
            [{"kind": "geo_bundle", "path": valley, "crs": "EPSG:4326"}],
        ),
        "numeric",
        [
            PlanStep("Difference the NDVI layers and measure the loss share."),
            PlanStep("NDVI before.", "AddIndexLayer",
                     {"geopackage": valley, "index": "NDVI", "year": "2024-08",
                      "layer": "ndvi_before"}),
            PlanStep("NDVI after.", "AddIndexLayer",
                     {"geopackage": valley, "index": "NDVI", "year": "2024-09",
                      "layer": "ndvi_after"}),
            PlanStep("Compute the change.", "ComputeIndexChange",
                     {"geopackage": valley, "index": "NDVI",
                      "earlier_layer": "ndvi_before", "later_layer": "ndvi_after"}),
            PlanStep(
                "Preview the change.", "ShowIndexLayer",
                args_fn=lambda obs: {
                    "geopackage": valley, "index": "NDVI",
                    "layer": _value(obs, 4, "change_layer"),
                },
            ),
            PlanStep(
                "Loss share as a percentage.", "Calculator",
                args_fn=lambda obs: {
                    "expression": f"{_value(obs, 4, 'stats', 'frac_negative')!r}*100"
                },
            ),
            PlanStep(
                "Report the loss.", "Terminate",
                args_fn=lambda obs: {
                    "answer": f"{_value(obs, 6, 'text')}% of the valley lost "
                              "vegetation"
                },
            ),
        ],
    )

    # t12: speed limit sign conversion.
    add(
        _task(
            "t12", "urban", "rgb",
            "The sign shows a speed limit in mph. What is the limit in km/h?",
            [{"kind": "image", "path": "street_sign.png", "gsd_m_per_px": 0.05}],
        ),
        "numeric",
        [
            PlanStep("Read the sign, then convert miles per hour to km/h."),
            PlanStep("Look at the scene.", "ImageDescription",
                     {"image": "street_sign.png"}),
            PlanStep("Read the sign text.", "OCR", {"image": "street_sign.png"}),
            PlanStep(
                "Convert to km/h.", "Calculator",
                args_fn=lambda obs: {
                    "expression": f"{_first_int(_value(obs, 3, 'text'))}*1.609344"
                },
            ),
            PlanStep("Mark the sign.", "DrawBox",
                     {"image": "street_sign.png", "bbox": [140, 40, 180, 90],
                      "label": "sign"}),
            PlanStep(
                "Report the converted limit.", "Terminate",
                args_fn=lambda obs: {
                    "answer": f"{_value(obs, 4, 'text')} km/h"
                },
            ),
        ],
    )

    # t13: resort pool area.
    add(
        _task(
            "t13", "recreation", "rgb",
            "What is the combined water surface area of the resort pools "
            "in square meters?",
            [{"kind": "image", "path": "resort.png", "gsd_m_per_px": 0.2}],
        ),
        "numeric",
        [
            PlanStep("Find the pools, segment them, and convert pixels to area."),
            PlanStep("Locate a pool.", "TextToBbox",
                     {"image": "resort.png", "description": "swimming pool"}),
            PlanStep("Count the pools.", "CountGivenObject",
                     {"image": "resort.png", "object_name": "swimming pool"}),
            PlanStep("Check their shape.", "RegionAttributeDescription",
                     {"image": "resort.png", "attribute": "shape"}),
            PlanStep("Segment pool pixels.", "SegmentObjectPixels",
                     {"image": "resort.png", "object_name": "swimming pool"}),
            PlanStep(
                "Convert to square meters.", "Calculator",
                args_fn=lambda obs: {
                    "expression": "("
                    + "+".join(str(c) for c in _value(obs, 5, "pixel_counts"))
                    + ")*0.2^2"
                },
            ),
            PlanStep(
                "Report the area.", "Terminate",
                args_fn=lambda obs: {
                    "answer": f"{_value(obs, 6, 'text')} square meters"
                },
            ),
        ],
    )

    # t14: bus stops to the nearest train station.
    add(
        _task(
            "t14", "transportation", "gis",
            "Within 500 m of Eastport, how far is the closest bus stop to "
            "a train station?",
        ),
        "numeric",
        [
            PlanStep("Buffer the boundary, add both layers, take the minimum."),
            PlanStep("Get the buffered boundary.", "GetAreaBoundary",
                     {"place": "Eastport", "buffer_m": 500}),
            PlanStep(
                "Add bus stops.", "AddPoisLayer",
                args_fn=lambda obs: {
                    "geopackage": _value(obs, 2, "geopackage"),
                    "query": "bus stop", "layer": "bus_stops",
                },
            ),
            PlanStep(
                "Add train stations.", "AddPoisLayer",
                args_fn=lambda obs: {
                    "geopackage": _value(obs, 2, "geopackage"),
                    "query": "train station", "layer": "train_stations",
                },
            ),
            PlanStep(
                "Nearest station per stop.", "ComputeDistance",
                args_fn=lambda obs: {
                    "geopackage": _value(obs, 2, "geopackage"),
                    "source_layer": "bus_stops", "target_layer": "train_stations",
                },
            ),
            PlanStep(
                "Minimum distance.", "Calculator",
                args_fn=lambda obs: {
                    "expression": "min("
                    + ",".join(repr(d) for d in _value(obs, 5, "distances_m"))
                    + ")"
                },
            ),
            PlanStep(
                "Report the closest pair.", "Terminate",
                args_fn=lambda obs: {
                    "answer": f"Closest bus stop is {_value(obs, 6, 'text')} m "
                              "from a train station"
                },
            ),
        ],
    )

    # t15: NDBI built-up share.
    mill = "bundles/mill_district"
    add(
        _task(
            "t15", "industrial", "index",
            "What share of the mill district reads as built-up in the "
            "March 2025 NDBI?",
            [{"kind": "geo_bundle", "path": mill, "crs": "EPSG:4326"}],
        ),
        "numeric",
        [
            PlanStep("Compute NDBI and read the high-class share."),
            PlanStep("Compute NDBI.", "AddIndexLayer",
                     {"geopackage": mill, "index": "NDBI", "year": "2025-03",
                      "layer": "ndbi_spring"}),
            PlanStep("Preview with classes.", "ShowIndexLayer",
                     {"geopackage": mill, "index": "NDBI", "layer": "ndbi_spring"}),
            PlanStep("Check the usual threshold.", "GoogleSearch",
                     {"query": "ndbi built-up threshold"}),
            PlanStep(
                "High-class share.", "Calculator",
                args_fn=lambda obs: {
                    "expression": f"{_value(obs, 2, 'class_stats', 'high')}/64*100"
                },
            ),
            PlanStep(
                "Report the built-up share.", "Terminate",
                args_fn=lambda obs: {
                    "answer": f"{_value(obs, 5, 'text')}% built-up"
                },
            ),
        ],
    )

    # t16: annotate the stadium (generation task).
    add(
        _task(
            "t16", "urban", "rgb",
            "Annotate the stadium on the city-center image.",
            [{"kind": "image", "path": "city_center.png", "gsd_m_per_px": 0.5}],
        ),
        "generation",
        [
            PlanStep("Find the stadium, box it, and label it."),
            PlanStep("Scene overview.", "ImageDescription",
                     {"image": "city_center.png"}),
            PlanStep("Locate the stadium.", "TextToBbox",
                     {"image": "city_center.png", "description": "stadium"}),
            PlanStep(
                "Draw the box.", "DrawBox",
                args_fn=lambda obs: {
                    "image": "city_center.png",
                    "bbox": _value(obs, 3, "bbox"), "label": "stadium",
                },
            ),
            PlanStep(
                "Add the label.", "AddText",
                args_fn=lambda obs: {
                    "image": "city_center.png", "text": "City Stadium",
                    "position": [_value(obs, 3, "bbox")[0],
                                 _value(obs, 3, "bbox")[1]],
                },
            ),
            PlanStep("Confirm the annotation.", "Terminate",
                     {"answer": "Annotated the stadium on the image"}),
        ],
    )

    # t17: dump-site survey.
    add(
        _task(
            "t17", "environment", "rgb",
            "How many dump sites are visible in the field?",
            [{"kind": "image", "path": "dumpsite.png", "gsd_m_per_px": 0.6}],
        ),
        "numeric",
        [
            PlanStep("Describe the field and count the dump sites."),
            PlanStep("Describe the scene.", "ImageDescription",
                     {"image": "dumpsite.png"}),
            PlanStep("Identify the waste type.", "RegionAttributeDescription",
                     {"image": "dumpsite.png", "attribute": "material"}),
            PlanStep("Count dump sites.", "CountGivenObject",
                     {"image": "dumpsite.png", "object_name": "dump site"}),
            PlanStep("Measure their extent.", "SegmentObjectPixels",
                     {"image": "dumpsite.png", "object_name": "dump site"}),
            PlanStep(
                "Report the count.", "Terminate",
                args_fn=lambda obs: {
                    "answer": f"{_value(obs, 4, 'count')} dump sites"
                },
            ),
        ],
    )

    # t18: burn damage over a change pair.
    add(
        _task(
            "t18", "disaster", "cd_pair",
            "How many buildings burned, and how large is the scorched area?",
            [
                {"kind": "image", "path": "burn_before.png", "gsd_m_per_px": 0.4},
                {"kind": "image", "path": "burn_after.png", "gsd_m_per_px": 0.4},
            ],
        ),
        "numeric",
        [
            PlanStep("Describe the burn, count structures, and measure area."),
            PlanStep("Describe the change.", "ChangeDetection",
                     {"query": "burn damage", "image_before": "burn_before.png",
                      "image_after": "burn_after.png"}),
            PlanStep("Count burned buildings.", "CountGivenObject",
                     {"image": "burn_after.png", "object_name": "burned building"}),
            PlanStep("Segment the burn scar.", "SegmentObjectPixels",
                     {"image": "burn_after.png", "object_name": "burned area"}),
            PlanStep(
                "Convert pixels to area.", "Calculator",
                args_fn=lambda obs: {
                    "expression": f"{_value(obs, 4, 'pixel_counts')[0]}*0.4^2"
                },
            ),
            PlanStep("Mark the scar.", "DrawBox",
                     {"image": "burn_after.png", "bbox": [20, 30, 200, 170],
                      "label": "burn scar"}),
            PlanStep(
                "Summarize.", "Terminate",
                args_fn=lambda obs: {
                    "answer": f"{_value(obs, 3, 'count')} burned buildings; about "
                              f"{_value(obs, 5, 'text')} square meters scorched"
                },
            ),
        ],
    )

    # t19: runway length from its box and the GSD.
    add(
        _task(
            "t19", "aviation", "rgb",
            "How long is the main runway in meters? The image GSD is "
            "0.072 m/px.",
            [{"kind": "image", "path": air, "gsd_m_per_px": 0.072}],
        ),
        "numeric",
        [
            PlanStep("Box the runway and scale its pixel length by the GSD."),
            PlanStep("Locate the runway.", "TextToBbox",
                     {"image": air, "description": "main runway"}),
            PlanStep(
                "Runway midpoint for reference.", "Solver",
                args_fn=lambda obs: {
                    "program": "centroid("
                    + ", ".join(str(v) for v in _value(obs, 2, "bbox"))
                    + ")"
                },
            ),
            PlanStep("Read the runway marking.", "OCR", {"image": air}),
            PlanStep(
                "Length in meters.", "Calculator",
                args_fn=lambda obs: {
                    "expression": f"({_value(obs, 2, 'bbox')[2]}-"
                                  f"{_value(obs, 2, 'bbox')[0]})*0.072"
                },
            ),
            PlanStep(
                "Report the length.", "Terminate",
                args_fn=lambda obs: {
                    "answer": f"about {_value(obs, 5, 'text')} m"
                },
            ),
        ],
    )

    # t20: picnic tables in Lakeview Commons.
    add(
        _task(
            "t20", "recreation", "gis",
            "How many picnic tables are inside Lakeview Commons?",
        ),
        "numeric",
        [
            PlanStep("Fetch the boundary and count picnic-table POIs."),
            PlanStep("Get the boundary.", "GetAreaBoundary",
                     {"place": "Lakeview Commons", "buffer_m": 0}),
            PlanStep(
                "Add picnic tables.", "AddPoisLayer",
                args_fn=lambda obs: {
                    "geopackage": _value(obs, 2, "geopackage"),
                    "query": "picnic table", "layer": "picnic_tables",
                },
            ),
            PlanStep(
                "Add playgrounds for context.", "AddPoisLayer",
                args_fn=lambda obs: {
                    "geopackage": _value(obs, 2, "geopackage"),
                    "query": "playground", "layer": "playgrounds",
                },
            ),
            PlanStep(
                "Render the park.", "DisplayOnMap",
                args_fn=lambda obs: {
                    "geopackage": _value(obs, 2, "geopackage"),
                    "layers": ["boundary", "picnic_tables", "playgrounds"],
                },
            ),
            PlanStep(
                "Report the count.", "Terminate",
                args_fn=lambda obs: {
                    "answer": f"{_value(obs, 3, 'count')} picnic tables"
                },
            ),
        ],
    )

    # t21: freight-yard capacity.
    add(
        _task(
            "t21", "industrial", "rgb",
            "Estimate the total freight capacity staged at the yard in "
            "tonnes.",
            [{"kind": "image", "path": "freight_yard.png", "gsd_m_per_px": 0.25}],
        ),
        "numeric",
        [
            PlanStep("Count staged trucks and scale by typical capacity."),
            PlanStep("Describe the yard.", "ImageDescription",
                     {"image": "freight_yard.png"}),
            PlanStep("Check activity.", "RegionAttributeDescription",
                     {"image": "freight_yard.png", "attribute": "activity"}),
            PlanStep("Count trucks.", "CountGivenObject",
                     {"image": "freight_yard.png", "object_name": "truck"}),
            PlanStep("Look up capacity.", "GoogleSearch",
                     {"query": "average heavy truck capacity tonnes"}),
            PlanStep(
                "Multiply.", "Calculator",
                args_fn=lambda obs: {
                    "expression": f"{_value(obs, 4, 'count')}*24"
                },
            ),
            PlanStep(
                "Report the tonnage.", "Terminate",
                args_fn=lambda obs: {
                    "answer": f"{_value(obs, 6, 'text')} tonnes staged"
                },
            ),
        ],
    )

    # t22: net new structures from a construction pair.
    add(
        _task(
            "t22", "urban", "cd_pair",
            "How many structures were added on net between the two dates?",
            [
                {"kind": "image", "path": "construction_before.png",
                 "gsd_m_per_px": 0.3},
                {"kind": "image", "path": "construction_after.png",
                 "gsd_m_per_px": 0.3},
            ],
        ),
        "numeric",
        [
            PlanStep("Describe the change, count additions and removals."),
            PlanStep("Describe the change.", "ChangeDetection",
                     {"query": "new construction",
                      "image_before": "construction_before.png",
                      "image_after": "construction_after.png"}),
            PlanStep("Count new buildings.", "CountGivenObject",
                     {"image": "construction_after.png",
                      "object_name": "new building"}),
            PlanStep("Count demolished buildings.", "CountGivenObject",
                     {"image": "construction_after.png",
                      "object_name": "demolished building"}),
            PlanStep(
                "Net change.", "Calculator",
                args_fn=lambda obs: {
                    "expression": f"{_value(obs, 3, 'count')}-{_value(obs, 4, 'count')}"
                },
            ),
            PlanStep(
                "Report the net.", "Terminate",
                args_fn=lambda obs: {
                    "answer": f"{_value(obs, 5, 'text')} net new structures"
                },
            ),
        ],
    )

    # t23: NBR change with map context.
    ash = "bundles/ashfork"
    add(
        _task(
            "t23", "environment", "index",
            "What share of the Ashfork area burned between July and "
            "September 2023?",
            [{"kind": "geo_bundle", "path": ash, "crs": "EPSG:4326"}],
        ),
        "numeric",
        [
            PlanStep("Difference the NBR layers and measure the burned share."),
            PlanStep("NBR in July.", "AddIndexLayer",
                     {"geopackage": ash, "index": "NBR", "year": "2023-07",
                      "layer": "nbr_july"}),
            PlanStep("NBR in September.", "AddIndexLayer",
                     {"geopackage": ash, "index": "NBR", "year": "2023-09",
                      "layer": "nbr_september"}),
            PlanStep("Difference the layers.", "ComputeIndexChange",
                     {"geopackage": ash, "index": "NBR",
                      "earlier_layer": "nbr_july", "later_layer": "nbr_september"}),
            PlanStep(
                "Preview the change.", "ShowIndexLayer",
                args_fn=lambda obs: {
                    "geopackage": ash, "index": "NBR",
                    "layer": _value(obs, 4, "change_layer"),
                },
            ),
            PlanStep("Map the boundary.", "DisplayOnMap",
                     {"geopackage": ash, "layers": ["boundary"]}),
            PlanStep(
                "Burned share.", "Calculator",
                args_fn=lambda obs: {
                    "expression": f"{_value(obs, 4, 'stats', 'frac_negative')!r}*100"
                },
            ),
            PlanStep(
                "Report the share.", "Terminate",
                args_fn=lambda obs: {
                    "answer": f"{_value(obs, 7, 'text')}% of the area burned "
                              f"(mean dNBR "
                              f"{_value(obs, 4, 'stats', 'mean'):.2f})"
                },
            ),
        ],
    )

    # t24: vehicle distribution plot (generation task).
    add(
        _task(
            "t24", "transportation", "rgb",
            "Plot the distribution of buses versus cars at the junction.",
            [{"kind": "image", "path": "junction.png", "gsd_m_per_px": 0.15}],
        ),
        "generation",
        [
            PlanStep("Detect vehicles, count buses, and plot the split."),
            PlanStep("Scene overview.", "ImageDescription",
                     {"image": "junction.png"}),
            PlanStep("Detect all vehicles.", "ObjectDetection",
                     {"image": "junction.png"}),
            PlanStep("Count buses.", "CountGivenObject",
                     {"image": "junction.png", "object_name": "bus"}),
            PlanStep(
                "Plot the distribution.", "Plot",
                args_fn=lambda obs: {
                    "code": f"bar_chart(bus={_value(obs, 4, 'count')}, "
                            f"car={_value(obs, 3, 'labels').count('car')})"
                },
            ),
            PlanStep("Confirm the plot.", "Terminate",
                     {"answer": "Plotted the bus and car distribution"}),
        ],
    )

    # t25: shelters to hospitals in the Harbor District.
    add(
        _task(
            "t25", "disaster", "gis",
            "How far is the farthest emergency shelter in the Harbor "
            "District from its nearest hospital?",
        ),
        "numeric",
        [
            PlanStep("Add shelters and hospitals, then take the maximum of "
                     "the nearest-hospital distances."),
            PlanStep("Get the boundary.", "GetAreaBoundary",
                     {"place": "Harbor District", "buffer_m": 0}),
            PlanStep(
                "Add shelters.", "AddPoisLayer",
                args_fn=lambda obs: {
                    "geopackage": _value(obs, 2, "geopackage"),
                    "query": "emergency shelter", "layer": "shelters",
                },
            ),
            PlanStep(
                "Add hospitals.", "AddPoisLayer",
                args_fn=lambda obs: {
                    "geopackage": _value(obs, 2, "geopackage"),
                    "query": "hospital", "layer": "hospitals",
                },
            ),
            PlanStep(
                "Nearest hospital per shelter.", "ComputeDistance",
                args_fn=lambda obs: {
                    "geopackage": _value(obs, 2, "geopackage"),
                    "source_layer": "shelters", "target_layer": "hospitals",
                },
            ),
            PlanStep(
                "Maximum of the distances.", "Calculator",
                args_fn=lambda obs: {
                    "expression": "max("
                    + ",".join(repr(d) for d in _value(obs, 5, "distances_m"))
                    + ")"
                },
            ),
            PlanStep(
                "Render the layers.", "DisplayOnMap",
                args_fn=lambda obs: {
                    "geopackage": _value(obs, 2, "geopackage"),
                    "layers": ["boundary", "shelters", "hospitals",
                               _value(obs, 5, "links_layer")],
                },
            ),
            PlanStep(
                "Report the farthest shelter.", "Terminate",
                args_fn=lambda obs: {
                    "answer": f"Farthest shelter is {_value(obs, 6, 'text')} m "
                              "from a hospital"
                },
            ),
        ],
    )

    assert len(plans) == GOLDEN_RECORD_COUNT
    total_steps = sum(len(p.steps) for p in plans)
    assert total_steps == GOLDEN_STEP_COUNT, total_steps
    return plans


# ---------------------------------------------------------------------------
# Corpus building
# ---------------------------------------------------------------------------


def build_golden_corpus(
    registry: ToolRegistry,
    fixtures: FixtureStore,
    fixtures_root: str | Path,
    workspace: str | Path | None = None,
) -> list[TrajectoryRecord]:
    """Run every plan through the orchestrator and collect the records.

    `fixtures_root` must already contain the input bundles and geotiff
    sidecars (see :func:`write_fixture_inputs`).
    """
    own_workspace: tempfile.TemporaryDirectory | None = None
    if workspace is None:
        own_workspace = tempfile.TemporaryDirectory(prefix="geoagent-golden-")
        workspace = own_workspace.name
    try:
        records: list[TrajectoryRecord] = []
        for plan in golden_plans():
            result = run(
                PlanPolicy(plan),
                plan.task,
                registry,
                SessionConfig(),
                fixtures=fixtures,
                workspace=Path(workspace) / plan.task.id,
                fixtures_root=fixtures_root,
            )
            if result.outcome.status is not RunStatus.COMPLETED:
                raise RuntimeError(
                    f"golden plan {plan.task.id} did not complete: "
                    f"{result.outcome.status}"
                )
            if result.stats.failed_calls:
                raise RuntimeError(
                    f"golden plan {plan.task.id} had failing calls"
                )
            records.append(replace(result.record, answer_kind=plan.answer_kind))
    finally:
        if own_workspace is not None:
            own_workspace.cleanup()

    assert sum(len(r.steps) for r in records) == GOLDEN_STEP_COUNT
    return records


def corrupt_corpus(
    records: Sequence[TrajectoryRecord],
) -> tuple[list[TrajectoryRecord], list[str]]:
    """Copy of the corpus with exactly two deliberately broken records.

    t03 gets stale stored distances (5 percent off); t14 gets an
    out-of-range longitude in a GetAreaBoundary argument.
    """
    corrupted: list[TrajectoryRecord] = []
    for record in records:
        if record.task.id == "t03":
            steps = list(record.steps)
            for i, step in enumerate(steps):
                if step.action is not None and step.action.tool == "ComputeDistance":
                    assert step.observation is not None and step.observation.value
                    value = dict(step.observation.value)
                    value["distances_m"] = [d * 1.05 for d in value["distances_m"]]
                    steps[i] = replace(
                        step,
                        observation=replace(step.observation, value=value),
                    )
            record = replace(record, steps=tuple(steps))
        elif record.task.id == "t14":
            steps = list(record.steps)
            for i, step in enumerate(steps):
                if step.action is not None and step.action.tool == "GetAreaBoundary":
                    args = dict(step.action.args)
                    args["bbox"] = [200.0, 10.0, 210.0, 20.0]
                    steps[i] = replace(step, action=replace(step.action, args=args))
            record = replace(record, steps=tuple(steps))
        corrupted.append(record)
    return corrupted, list(CORRUPTED_IDS)


def write_fixture_inputs(root: str | Path) -> None:
    """Write the store, input bundles, and geotiff sidecars under `root`."""
    root = Path(root)
    save_fixture_store(default_fixture_store(), root / "store")
    for rel_path, bundle in input_bundles().items():
        save_bundle(bundle, root / rel_path)
    geotiff_dir = root / "geotiffs"
    geotiff_dir.mkdir(parents=True, exist_ok=True)
    for name, meta in GEOTIFF_SIDECARS.items():
        (geotiff_dir / f"{name}.json").write_text(
            canonical_pretty(meta), encoding="utf-8"
        )


def write_fixture_tree(root: str | Path) -> None:
    """Materialize the full fixture tree: store, bundles, registry,
    category map, and both corpora."""
    root = Path(root)
    write_fixture_inputs(root)

    registry = default_registry()
    save_registry_file(registry, root / "registry.json")
    (root / "category_map.json").write_text(
        canonical_pretty({k: v.value for k, v in load_category_map().items()}),
        encoding="utf-8",
    )

    fixtures = default_fixture_store()
    records = build_golden_corpus(registry, fixtures, root)
    corpus_dir = root / "corpus"
    corpus_dir.mkdir(parents=True, exist_ok=True)
    save_corpus(records, corpus_dir / "golden_25.jsonl")
    corrupted, _ = corrupt_corpus(records)
    save_corpus(corrupted, corpus_dir / "corrupted_25.jsonl")
