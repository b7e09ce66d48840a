import csv
import json

import pytest

from codingtree.ingest import (
    CANONICAL_COLUMNS,
    ColumnMapping,
    CoderColumns,
    IngestError,
    parse_codings,
    parse_dataset,
    validate_records,
    write_canonical_csv,
    write_canonical_json,
)
from codingtree.records import CoderRecordSet, make_record

HEADER = ",".join(CANONICAL_COLUMNS)

SMALL = HEADER + "\n" + "\n".join([
    "1,update firmware,UK-1,M1,,true,M1,,false,false",
    "2,use strong passwords,UK-2,P4,,false,P4,P5,false,true",
    "3,a policy statement,,T,,false,P2,,false,false",
])


def _write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_parse_dataset(tmp_path):
    items = parse_dataset(_write(tmp_path, SMALL))
    assert [i.index for i in items] == [1, 2, 3]
    assert items[0].category == "UK-1"
    assert items[2].category is None
    assert items[1].text == "use strong passwords"


def test_parse_codings(tmp_path, tree):
    sets = parse_codings(_write(tmp_path, SMALL), tree)
    assert sorted(sets) == ["C1", "C2"]
    assert sets["C1"][1].codes == ("M1",)
    assert sets["C2"][2].codes == ("P4", "P5")
    assert sets["C1"][1].unfocused_flag
    assert "Unfocused" in sets["C1"][1].tags[0].sublabels
    assert not sets["C2"][1].unfocused_flag
    assert sets["C1"][2].iot_specific and sets["C2"][2].iot_specific


def test_json_mirror_equivalent(tmp_path, tree):
    rows = [dict(zip(CANONICAL_COLUMNS, line.split(",")))
            for line in SMALL.splitlines()[1:]]
    path = tmp_path / "data.json"
    path.write_text(json.dumps({"items": rows}))
    from_json = parse_codings(path, tree)
    from_csv = parse_codings(_write(tmp_path, SMALL), tree)
    for coder in ("C1", "C2"):
        for index in (1, 2, 3):
            assert from_json[coder][index] == from_csv[coder][index]


def test_duplicate_index_rejected(tmp_path):
    bad = HEADER + "\n1,a,,M1,,false,M1,,false,false\n1,b,,T,,false,T,,false,false"
    with pytest.raises(IngestError, match="duplicate"):
        parse_dataset(_write(tmp_path, bad))


def test_unknown_category_rejected(tmp_path):
    bad = HEADER + "\n1,a,EU-1,M1,,false,M1,,false,false"
    with pytest.raises(IngestError, match="category"):
        parse_dataset(_write(tmp_path, bad))


def test_unknown_code_rejected(tmp_path, tree):
    bad = HEADER + "\n1,a,,ZZ,,false,M1,,false,false"
    with pytest.raises(IngestError):
        parse_codings(_write(tmp_path, bad), tree)


def test_missing_columns_rejected(tmp_path):
    with pytest.raises(IngestError, match="not present"):
        parse_dataset(_write(tmp_path, "item_index,text\n1,a"))


def test_empty_file_rejected(tmp_path):
    with pytest.raises(IngestError, match="no data rows"):
        parse_dataset(_write(tmp_path, HEADER))


def test_column_mapping_from_json(tmp_path, tree):
    renamed = "id,desc,alpha1,alpha2,beta1,beta2\n5,text here,M1,,T,P2\n"
    mapping_doc = {
        "item_index": "id",
        "text": "desc",
        "coders": {
            "A": {"tag1": "alpha1", "tag2": "alpha2"},
            "B": {"tag1": "beta1", "tag2": "beta2"},
        },
    }
    mapping = ColumnMapping.from_json(_write(tmp_path, json.dumps(mapping_doc),
                                             "mapping.json"))
    path = _write(tmp_path, renamed)
    items = parse_dataset(path, mapping)
    assert items[0].index == 5 and items[0].category is None
    sets = parse_codings(path, tree, mapping)
    assert sets["A"][5].codes == ("M1",)
    assert sets["B"][5].codes == ("T", "P2")


def test_legacy_codes_merge(tmp_path):
    from codingtree.tree import load_builtin_tree

    legacy = load_builtin_tree("legacy_q11_tree")
    text = HEADER + "\n1,a,,N1,,false,N2,,false,false"
    sets = parse_codings(_write(tmp_path, text), legacy)
    assert sets["C1"][1].codes == ("N",)
    assert sets["C2"][1].codes == ("N",)


def test_validate_records_findings(tree, tmp_path):
    sets = parse_codings(_write(tmp_path, SMALL), tree)
    dataset = parse_dataset(_write(tmp_path, SMALL))
    assert validate_records(sets, dataset, tree) == []

    # coder misses item 3 and codes an item 99 absent from the dataset
    partial = CoderRecordSet(coder_id="C1")
    partial.add(make_record(tree, 1, "C1", ["M1"]))
    partial.add(make_record(tree, 99, "C1", ["T"]))
    findings = validate_records({"C1": partial}, dataset, tree)
    kinds = sorted(f.kind for f in findings)
    assert kinds == ["missing-item", "missing-item", "unknown-item"]


def test_unfocused_without_m1_flagged(tree, tmp_path):
    text = HEADER + "\n1,a,,T,,true,M1,,false,false"
    sets = parse_codings(_write(tmp_path, text), tree)
    dataset = parse_dataset(_write(tmp_path, text))
    findings = validate_records(sets, dataset, tree)
    assert [f.kind for f in findings] == ["unfocused-without-m1"]


def test_canonical_roundtrip(tree, tmp_path):
    path = _write(tmp_path, SMALL)
    dataset = parse_dataset(path)
    sets = parse_codings(path, tree)

    out_csv = tmp_path / "canon.csv"
    write_canonical_csv(out_csv, dataset, sets)
    again = parse_codings(out_csv, tree)
    for coder in ("C1", "C2"):
        for item in dataset:
            assert again[coder][item.index] == sets[coder][item.index]
    with out_csv.open(newline="", encoding="utf-8") as fh:
        assert next(csv.reader(fh)) == CANONICAL_COLUMNS

    out_json = tmp_path / "canon.json"
    write_canonical_json(out_json, dataset, sets)
    from_json = parse_codings(out_json, tree)
    assert from_json["C2"][2] == sets["C2"][2]


def test_canonical_csv_deterministic(tree, tmp_path):
    path = _write(tmp_path, SMALL)
    dataset = parse_dataset(path)
    sets = parse_codings(path, tree)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_canonical_csv(a, dataset, sets)
    write_canonical_csv(b, dataset, sets)
    assert a.read_bytes() == b.read_bytes()


def test_reference_dataset_is_canonical_and_valid(tree, dataset, recordsets):
    assert len(dataset) == 1013
    assert validate_records(recordsets, dataset, tree) == []
