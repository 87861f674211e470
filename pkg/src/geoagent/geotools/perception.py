"""Fixture-backed perception oracles.

Perceptual tools (detection, counting, segmentation, captioning, OCR,
search) are deterministic lookups into a read-only fixture store instead
of neural models: replay validation requires exactness, so every answer
comes from shipped annotations with score 1.0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from ..canonical import canonical_pretty
from .bundle import Feature

PixelBox = list[float]  # [x1, y1, x2, y2]


class PerceptionError(Exception):
    code = "PerceptionError"


class UnknownImage(PerceptionError):
    code = "UnknownImage"


class UnknownLabel(PerceptionError):
    code = "UnknownLabel"


class UnknownQuery(PerceptionError):
    code = "UnknownQuery"


@dataclass(frozen=True, slots=True)
class Annotation:
    """Ground truth for one (image, label) pair."""

    boxes: tuple[tuple[float, float, float, float], ...] = ()
    mask_pixels: tuple[int, ...] = ()
    caption: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "boxes": [list(b) for b in self.boxes],
            "mask_pixels": list(self.mask_pixels),
            "caption": self.caption,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Annotation":
        return cls(
            boxes=tuple(tuple(float(v) for v in box) for box in data.get("boxes", [])),
            mask_pixels=tuple(int(v) for v in data.get("mask_pixels", [])),
            caption=data.get("caption", ""),
        )


@dataclass(slots=True)
class FixtureStore:
    """Read-only oracle data shared by all sessions.

    Attributes:
        gazetteer: place name -> closed polygon ring.
        poi_db: (region, query) -> point features inside that region.
        annotations: (image id, label) -> :class:`Annotation`.
        canned_text: query or image id -> text, for OCR and search.
        gsd: image id -> ground sample distance in meters per pixel.
    """

    gazetteer: dict[str, list[list[float]]] = field(default_factory=dict)
    poi_db: dict[tuple[str, str], list[Feature]] = field(default_factory=dict)
    annotations: dict[tuple[str, str], Annotation] = field(default_factory=dict)
    canned_text: dict[str, str] = field(default_factory=dict)
    gsd: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for image_id, value in self.gsd.items():
            if value <= 0:
                raise ValueError(f"gsd for {image_id!r} must be positive")

    def annotation(self, image_id: str, label: str) -> Annotation:
        known_images = {img for img, _ in self.annotations}
        if image_id not in known_images:
            raise UnknownImage(f"no annotations for image {image_id!r}")
        entry = self.annotations.get((image_id, label))
        if entry is None:
            raise UnknownLabel(f"image {image_id!r} has no label {label!r}")
        return entry

    def image_labels(self, image_id: str) -> list[str]:
        labels = sorted(label for img, label in self.annotations if img == image_id)
        if not labels:
            raise UnknownImage(f"no annotations for image {image_id!r}")
        return labels


def text_to_bbox(store: FixtureStore, image_id: str, description: str) -> dict[str, Any]:
    """First annotated box for the description."""
    entry = store.annotation(image_id, description)
    if not entry.boxes:
        raise UnknownLabel(f"{description!r} has no boxes on image {image_id!r}")
    return {"bbox": list(entry.boxes[0]), "score": 1.0}


def object_detection(store: FixtureStore, image_id: str) -> dict[str, Any]:
    """All annotated boxes on the image, grouped as parallel lists."""
    labels: list[str] = []
    boxes: list[PixelBox] = []
    scores: list[float] = []
    for label in store.image_labels(image_id):
        entry = store.annotations[(image_id, label)]
        for box in entry.boxes:
            labels.append(label)
            boxes.append(list(box))
            scores.append(1.0)
    return {"labels": labels, "boxes": boxes, "scores": scores}


def count_given_object(
    store: FixtureStore,
    image_id: str,
    object_name: str,
    bbox: PixelBox | None = None,
) -> dict[str, Any]:
    """Number of annotated boxes, optionally restricted to centers in bbox."""
    entry = store.annotation(image_id, object_name)
    boxes = entry.boxes
    if bbox is not None:
        x1, y1, x2, y2 = bbox
        boxes = tuple(
            b
            for b in boxes
            if x1 <= (b[0] + b[2]) / 2.0 <= x2 and y1 <= (b[1] + b[3]) / 2.0 <= y2
        )
    return {"count": len(boxes)}


def segment_object_pixels(
    store: FixtureStore, image_id: str, object_name: str
) -> dict[str, Any]:
    entry = store.annotation(image_id, object_name)
    return {"pixel_counts": list(entry.mask_pixels)}


def describe(store: FixtureStore, image_id: str, label: str) -> dict[str, Any]:
    """Caption lookup shared by the description-style tools."""
    entry = store.annotation(image_id, label)
    return {"text": entry.caption}


def ocr_text(store: FixtureStore, image_id: str) -> dict[str, Any]:
    known_images = {img for img, _ in store.annotations}
    if image_id not in store.canned_text and image_id not in known_images:
        raise UnknownImage(f"no OCR fixture for image {image_id!r}")
    if image_id not in store.canned_text:
        raise UnknownLabel(f"image {image_id!r} has no OCR text fixture")
    return {"text": store.canned_text[image_id]}


def google_search(store: FixtureStore, query: str) -> dict[str, Any]:
    if query not in store.canned_text:
        raise UnknownQuery(f"no canned search result for {query!r}")
    return {"text": store.canned_text[query], "offline": True}


def fixture_perception(
    store: FixtureStore,
    tool: str,
    image_id: str,
    args: Mapping[str, Any] | None = None,
) -> dict[str, Any]:
    """Single-entry dispatcher over the perception oracles by tool name."""
    args = dict(args or {})
    if tool == "TextToBbox":
        return text_to_bbox(store, image_id, args["description"])
    if tool == "ObjectDetection":
        return object_detection(store, image_id)
    if tool == "CountGivenObject":
        return count_given_object(
            store, image_id, args["object_name"], args.get("bbox")
        )
    if tool == "SegmentObjectPixels":
        return segment_object_pixels(store, image_id, args["object_name"])
    if tool == "ImageDescription":
        return describe(store, image_id, "caption")
    if tool == "RegionAttributeDescription":
        return describe(store, image_id, f"attribute:{args['attribute']}")
    if tool == "ChangeDetection":
        return describe(store, image_id, args["query"])
    if tool == "OCR":
        return ocr_text(store, image_id)
    raise PerceptionError(f"{tool!r} is not a perception tool")


def save_fixture_store(store: FixtureStore, path: str | Path) -> None:
    """Write the store as a directory of canonical JSON files."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    (root / "gazetteer.json").write_text(
        canonical_pretty(store.gazetteer), encoding="utf-8"
    )
    poi_payload = {
        f"{region}{query}": [f.to_dict() for f in features]
        for (region, query), features in store.poi_db.items()
    }
    (root / "poi_db.json").write_text(canonical_pretty(poi_payload), encoding="utf-8")
    ann_payload = {
        f"{image}{label}": entry.to_dict()
        for (image, label), entry in store.annotations.items()
    }
    (root / "annotations.json").write_text(
        canonical_pretty(ann_payload), encoding="utf-8"
    )
    (root / "canned_text.json").write_text(
        canonical_pretty(store.canned_text), encoding="utf-8"
    )
    (root / "gsd.json").write_text(canonical_pretty(store.gsd), encoding="utf-8")


def load_fixture_store(path: str | Path) -> FixtureStore:
    """Load a store directory written by :func:`save_fixture_store`."""
    root = Path(path)

    def read(name: str) -> Any:
        return json.loads((root / name).read_text(encoding="utf-8"))

    poi_db: dict[tuple[str, str], list[Feature]] = {}
    for key, features in read("poi_db.json").items():
        region, query = key.split("", 1)
        poi_db[(region, query)] = [Feature.from_dict(f) for f in features]
    annotations: dict[tuple[str, str], Annotation] = {}
    for key, entry in read("annotations.json").items():
        image, label = key.split("", 1)
        annotations[(image, label)] = Annotation.from_dict(entry)
    return FixtureStore(
        gazetteer={
            name: [[float(c[0]), float(c[1])] for c in ring]
            for name, ring in read("gazetteer.json").items()
        },
        poi_db=poi_db,
        annotations=annotations,
        canned_text=read("canned_text.json"),
        gsd={k: float(v) for k, v in read("gsd.json").items()},
    )
