from __future__ import annotations

import pytest

from geoagent.geotools.perception import (
    PerceptionError,
    UnknownImage,
    UnknownLabel,
    UnknownQuery,
    count_given_object,
    describe,
    fixture_perception,
    google_search,
    load_fixture_store,
    object_detection,
    ocr_text,
    save_fixture_store,
    segment_object_pixels,
    text_to_bbox,
)


def test_count_annotated_airplanes(fixture_store):
    result = count_given_object(fixture_store, "airfield_west.png", "airplane")
    assert result == {"count": 3}


def test_count_restricted_to_bbox(fixture_store):
    # Only the left airplane's center falls in this window.
    result = count_given_object(
        fixture_store, "airfield_west.png", "airplane", bbox=[0, 0, 150, 240]
    )
    assert result == {"count": 1}


def test_text_to_bbox_returns_first_fixture_box(fixture_store):
    result = text_to_bbox(fixture_store, "airfield_west.png", "left airplane")
    assert result == {"bbox": [90.0, 80.0, 110.0, 120.0], "score": 1.0}


def test_object_detection_lists_all_boxes_with_unit_scores(fixture_store):
    result = object_detection(fixture_store, "plant.png")
    assert len(result["labels"]) == len(result["boxes"]) == len(result["scores"])
    assert set(result["scores"]) == {1.0}
    assert result["labels"].count("storage tank") == 6
    assert result["labels"].count("warehouse") == 2
    assert result["labels"].count("chimney") == 1


def test_segmentation_pixel_counts(fixture_store):
    result = segment_object_pixels(fixture_store, "resort.png", "swimming pool")
    assert result == {"pixel_counts": [1800, 1400]}


def test_captions(fixture_store):
    assert "airplanes" in describe(
        fixture_store, "airfield_west.png", "caption"
    )["text"]
    assert describe(fixture_store, "depot.png", "attribute:color")["text"]


def test_ocr_reads_canned_text(fixture_store):
    assert ocr_text(fixture_store, "street_sign.png") == {"text": "SPEED LIMIT 45"}


def test_ocr_unknown_image(fixture_store):
    with pytest.raises(UnknownImage):
        ocr_text(fixture_store, "never_seen.png")


def test_unknown_image_and_label(fixture_store):
    with pytest.raises(UnknownImage):
        text_to_bbox(fixture_store, "never_seen.png", "anything")
    with pytest.raises(UnknownLabel):
        text_to_bbox(fixture_store, "airfield_west.png", "submarine")


def test_google_search_is_offline_canned(fixture_store):
    result = google_search(fixture_store, "average heavy truck capacity tonnes")
    assert result["offline"] is True
    assert "24 tonnes" in result["text"]
    with pytest.raises(UnknownQuery):
        google_search(fixture_store, "price of tea")


def test_store_disk_round_trip(fixture_store, tmp_path):
    save_fixture_store(fixture_store, tmp_path / "store")
    loaded = load_fixture_store(tmp_path / "store")
    assert loaded.gazetteer == fixture_store.gazetteer
    assert loaded.canned_text == fixture_store.canned_text
    assert loaded.gsd == fixture_store.gsd
    assert loaded.annotations == fixture_store.annotations
    assert set(loaded.poi_db) == set(fixture_store.poi_db)
    for key, features in fixture_store.poi_db.items():
        assert loaded.poi_db[key] == features


def test_gsd_must_be_positive(fixture_store):
    from geoagent.geotools.perception import FixtureStore

    with pytest.raises(ValueError):
        FixtureStore(gsd={"x.png": 0.0})


def test_fixture_perception_dispatcher(fixture_store):
    assert fixture_perception(
        fixture_store, "CountGivenObject", "airfield_west.png",
        {"object_name": "airplane"},
    ) == {"count": 3}
    assert fixture_perception(
        fixture_store, "TextToBbox", "airfield_west.png",
        {"description": "left airplane"},
    )["bbox"] == [90.0, 80.0, 110.0, 120.0]
    with pytest.raises(UnknownImage):
        fixture_perception(fixture_store, "OCR", "never_seen.png")
    with pytest.raises(PerceptionError):
        fixture_perception(fixture_store, "Calculator", "x.png")
