"""Parse and validate datasets and coder record files.

The canonical layout is a wide CSV (or a JSON mirror with the same field
names): one row per advice item carrying both coders' tags.  A
ColumnMapping adapts files whose columns are named differently; the
default mapping matches the canonical header.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from codingtree.records import AdviceItem, CoderRecordSet, TagRecord, UNFOCUSED, make_record
from codingtree.tree import CodingTree

_CATEGORY_RE = re.compile(r"^UK-(\d+)$")

CANONICAL_COLUMNS = [
    "item_index", "text", "category",
    "c1_tag1", "c1_tag2", "c1_unfocused",
    "c2_tag1", "c2_tag2", "c2_unfocused",
    "iot_flag",
]


class IngestError(ValueError):
    """Raised when an input file violates a structural invariant."""


@dataclass(frozen=True)
class CoderColumns:
    tag1: str
    tag2: str
    unfocused: str | None = None


@dataclass(frozen=True)
class ColumnMapping:
    """Column-name assignments for a two-coder wide file."""

    item_index: str = "item_index"
    text: str = "text"
    category: str | None = "category"
    iot_flag: str | None = "iot_flag"
    coders: dict[str, CoderColumns] = field(default_factory=lambda: {
        "C1": CoderColumns("c1_tag1", "c1_tag2", "c1_unfocused"),
        "C2": CoderColumns("c2_tag1", "c2_tag2", "c2_unfocused"),
    })

    @classmethod
    def from_json(cls, path: str | Path) -> "ColumnMapping":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        coders = {
            coder: CoderColumns(
                tag1=spec["tag1"],
                tag2=spec["tag2"],
                unfocused=spec.get("unfocused"),
            )
            for coder, spec in doc.get("coders", {}).items()
        }
        return cls(
            item_index=doc.get("item_index", "item_index"),
            text=doc.get("text", "text"),
            category=doc.get("category"),
            iot_flag=doc.get("iot_flag"),
            coders=coders or cls().coders,
        )

    def required_columns(self) -> list[str]:
        cols = [self.item_index, self.text]
        for cc in self.coders.values():
            cols += [cc.tag1, cc.tag2]
        return cols


def _read_rows(path: str | Path) -> list[dict]:
    path = Path(path)
    if path.suffix.lower() == ".json":
        doc = json.loads(path.read_text(encoding="utf-8"))
        rows = doc["items"] if isinstance(doc, dict) else doc
        return [{k: ("" if v is None else str(v)) for k, v in row.items()} for row in rows]
    with path.open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _check_columns(rows: list[dict], mapping: ColumnMapping) -> None:
    if not rows:
        raise IngestError("input file has no data rows")
    have = set(rows[0])
    missing = [c for c in mapping.required_columns() if c not in have]
    if missing:
        raise IngestError(f"mapped columns not present in input: {missing}")


def _truthy(cell: str | None) -> bool:
    return (cell or "").strip().lower() in ("1", "true", "yes", "y")


def parse_dataset(path: str | Path, mapping: ColumnMapping | None = None) -> list[AdviceItem]:
    """Read advice items (index, text, category) from a wide file."""
    mapping = mapping or ColumnMapping()
    rows = _read_rows(path)
    _check_columns(rows, mapping)
    items: list[AdviceItem] = []
    seen: set[int] = set()
    for lineno, row in enumerate(rows, start=2):
        try:
            index = int(row[mapping.item_index])
        except ValueError as exc:
            raise IngestError(f"line {lineno}: bad item index {row[mapping.item_index]!r}") from exc
        if index in seen:
            raise IngestError(f"line {lineno}: duplicate item index {index}")
        seen.add(index)
        category = None
        if mapping.category and row.get(mapping.category, "").strip():
            category = row[mapping.category].strip().upper()
            if not _CATEGORY_RE.match(category):
                raise IngestError(f"line {lineno}: unknown category label {category!r}")
        items.append(AdviceItem(index=index, text=row[mapping.text], category=category))
    return items


def parse_codings(path: str | Path, tree: CodingTree,
                  mapping: ColumnMapping | None = None) -> dict[str, CoderRecordSet]:
    """Read one CoderRecordSet per mapped coder.

    Tag cells hold raw code ids; the tree's merge map is applied and each
    tag's question sequence is reconstructed from the tree.
    """
    mapping = mapping or ColumnMapping()
    rows = _read_rows(path)
    _check_columns(rows, mapping)
    sets = {coder: CoderRecordSet(coder_id=coder) for coder in mapping.coders}
    for lineno, row in enumerate(rows, start=2):
        index = int(row[mapping.item_index])
        iot = _truthy(row.get(mapping.iot_flag)) if mapping.iot_flag else False
        for coder, cc in mapping.coders.items():
            codes = [row[cc.tag1].strip()]
            second = row.get(cc.tag2, "").strip()
            if second:
                codes.append(second)
            if not codes[0]:
                raise IngestError(f"line {lineno}: coder {coder} has no first tag")
            unfocused = _truthy(row.get(cc.unfocused)) if cc.unfocused else False
            try:
                record = make_record(tree, index, coder, codes,
                                     unfocused=unfocused, iot_specific=iot)
            except (KeyError, ValueError) as exc:
                raise IngestError(f"line {lineno}: coder {coder}: {exc}") from exc
            sets[coder].add(record)
    return sets


@dataclass(frozen=True)
class ValidationFinding:
    kind: str
    message: str


def validate_records(recordsets: dict[str, CoderRecordSet],
                     dataset: list[AdviceItem],
                     tree: CodingTree) -> list[ValidationFinding]:
    """Cross-check record sets against a dataset; empty list means analyzable."""
    findings: list[ValidationFinding] = []
    indices = {item.index for item in dataset}
    for coder, recset in recordsets.items():
        covered = set(recset.records)
        for missing in sorted(indices - covered):
            findings.append(ValidationFinding(
                "missing-item", f"coder {coder} has no record for item {missing}"))
        for extra in sorted(covered - indices):
            findings.append(ValidationFinding(
                "unknown-item", f"coder {coder} codes item {extra} absent from dataset"))
        for index in sorted(covered & indices):
            record = recset[index]
            for tag in record.tags:
                leaf = tag.sequence.terminal_code
                if leaf not in tree.leaf_codes() or tree.canonical(leaf) != tag.code:
                    findings.append(ValidationFinding(
                        "unknown-code",
                        f"coder {coder} item {index}: code {tag.code!r} not in tree"))
                    continue
                if tag.sequence != tree.tag_to_sequence(leaf):
                    findings.append(ValidationFinding(
                        "sequence-mismatch",
                        f"coder {coder} item {index}: sequence does not replay to {tag.code}"))
                if tag.sublabels and tag.code != "M1":
                    findings.append(ValidationFinding(
                        "sublabel-misplaced",
                        f"coder {coder} item {index}: sub-label on non-M1 code {tag.code}"))
            if record.unfocused_flag and "M1" not in record.codes:
                findings.append(ValidationFinding(
                    "unfocused-without-m1",
                    f"coder {coder} item {index}: Unfocused flag but no M1 tag"))
    return findings


# -- canonical re-export ---------------------------------------------------

def _canonical_row(item: AdviceItem, recordsets: dict[str, CoderRecordSet]) -> list[str]:
    row = [str(item.index), item.text, item.category or ""]
    for coder in ("C1", "C2"):
        record = recordsets[coder][item.index]
        codes = list(record.codes) + [""]
        unfocused = any(UNFOCUSED in t.sublabels for t in record.tags) or record.unfocused_flag
        row += [codes[0], codes[1], "true" if unfocused else "false"]
    any_iot = any(recordsets[c][item.index].iot_specific for c in ("C1", "C2"))
    row.append("true" if any_iot else "false")
    return row


def write_canonical_csv(path: str | Path, dataset: list[AdviceItem],
                        recordsets: dict[str, CoderRecordSet]) -> None:
    """Write the canonical wide CSV (stable byte output for fixed input)."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CANONICAL_COLUMNS)
        for item in sorted(dataset, key=lambda i: i.index):
            writer.writerow(_canonical_row(item, recordsets))


def write_canonical_json(path: str | Path, dataset: list[AdviceItem],
                         recordsets: dict[str, CoderRecordSet]) -> None:
    """JSON mirror of the canonical CSV, identical field names."""
    items = []
    for item in sorted(dataset, key=lambda i: i.index):
        values = _canonical_row(item, recordsets)
        items.append(dict(zip(CANONICAL_COLUMNS, values)))
    Path(path).write_text(json.dumps({"items": items}, indent=2) + "\n", encoding="utf-8")
