from __future__ import annotations

from pathlib import Path

import pytest

from dscre.ingest import DatasetManifest, load_split
from dscre.model import RelationSet

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def finre_set() -> RelationSet:
    return RelationSet.from_file(FIXTURES / "finre_labels.txt")


@pytest.fixture(scope="session")
def sanwen_set() -> RelationSet:
    return RelationSet.from_file(FIXTURES / "sanwen_labels.txt")


@pytest.fixture(scope="session")
def finre_manifest() -> DatasetManifest:
    return DatasetManifest.load(FIXTURES / "finre_sample_manifest.json")


@pytest.fixture(scope="session")
def finre_train(finre_manifest):
    return load_split(finre_manifest, "train")
