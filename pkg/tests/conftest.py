from pathlib import Path

import pytest

from codingtree.agreement import analyze
from codingtree.ingest import ColumnMapping, parse_codings, parse_dataset
from codingtree.tree import load_default_tree

DATA = Path(__file__).resolve().parent.parent / "data"
DATASET_CSV = DATA / "cb1013-dataset-twocoder.csv"
MAPPING_JSON = DATA / "mapping.json"


@pytest.fixture(scope="session")
def tree():
    return load_default_tree()


@pytest.fixture(scope="session")
def mapping():
    return ColumnMapping.from_json(MAPPING_JSON)


@pytest.fixture(scope="session")
def dataset(mapping):
    return parse_dataset(DATASET_CSV, mapping)


@pytest.fixture(scope="session")
def recordsets(tree, mapping):
    return parse_codings(DATASET_CSV, tree, mapping)


@pytest.fixture(scope="session")
def analysis(tree, dataset, recordsets):
    return analyze(recordsets["C1"], recordsets["C2"], dataset, tree)
