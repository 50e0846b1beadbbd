from __future__ import annotations

import pytest

from anchorner import load_ontology
from anchorner.ontology import CategoryVocabulary

import helpers
import synth


@pytest.fixture(scope="session")
def vocabulary():
    return CategoryVocabulary.bundled()


@pytest.fixture(scope="session")
def mini_ontology(vocabulary):
    return load_ontology(helpers.MINI_ONTOLOGY, vocabulary, "strict")


@pytest.fixture(scope="session")
def synth_dump(tmp_path_factory):
    """A ~1 MB generated dump for pipeline tests (fast)."""
    root = tmp_path_factory.mktemp("synth_small")
    xml_path = root / "dump.xml"
    ontology_path = root / "ontology.tsv"
    synth.generate_dump(xml_path, ontology_path, target_bytes=1_000_000)
    return xml_path, ontology_path


@pytest.fixture(scope="session")
def synth_dump_10mb(tmp_path_factory):
    """The throughput-scale generated dump (~10 MB)."""
    root = tmp_path_factory.mktemp("synth_big")
    xml_path = root / "dump.xml"
    ontology_path = root / "ontology.tsv"
    synth.generate_dump(xml_path, ontology_path, target_bytes=10_000_000)
    return xml_path, ontology_path
