from __future__ import annotations

from pathlib import Path

import pytest

from geoagent.defaults import default_registry, load_category_map
from geoagent.fixtures import (
    build_golden_corpus,
    default_fixture_store,
    write_fixture_tree,
)


@pytest.fixture(scope="session")
def registry():
    return default_registry()


@pytest.fixture(scope="session")
def category_map():
    return load_category_map()


@pytest.fixture(scope="session")
def fixture_store():
    return default_fixture_store()


@pytest.fixture(scope="session")
def fixture_tree(tmp_path_factory) -> Path:
    """Full on-disk fixture tree (store, bundles, registry, corpora)."""
    root = tmp_path_factory.mktemp("fixture-tree")
    write_fixture_tree(root)
    return root


@pytest.fixture(scope="session")
def golden_corpus(registry, fixture_store, fixture_tree):
    return build_golden_corpus(registry, fixture_store, fixture_tree)


@pytest.fixture(scope="session")
def golden_corpus_path(fixture_tree) -> Path:
    return fixture_tree / "corpus" / "golden_25.jsonl"


@pytest.fixture(scope="session")
def corrupted_corpus_path(fixture_tree) -> Path:
    return fixture_tree / "corpus" / "corrupted_25.jsonl"
