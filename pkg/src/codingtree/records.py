"""Core record types shared by sessions, ingest, and the agreement engine."""

from __future__ import annotations

from dataclasses import dataclass, field

from codingtree.tree import CodingTree, QuestionSequence

UNFOCUSED = "Unfocused"


@dataclass(frozen=True)
class AdviceItem:
    """One advice item from a dataset."""

    index: int
    text: str
    category: str | None = None
    source: str = ""


@dataclass(frozen=True)
class Tag:
    """A single code applied by a coder, with the path that produced it."""

    code: str
    sequence: QuestionSequence
    sublabels: frozenset[str] = frozenset()


@dataclass(frozen=True)
class TagRecord:
    """One coder's coding of one item: one or two tags.

    `unfocused_flag` mirrors the raw per-item flag from imported files; on
    well-formed records it is redundant with the M1 tag's sublabels.
    """

    item_index: int
    coder_id: str
    tags: tuple[Tag, ...]
    iot_specific: bool = False
    unfocused_flag: bool = False

    def __post_init__(self):
        if not 1 <= len(self.tags) <= 2:
            raise ValueError("a record holds one or two tags")
        if len(self.tags) == 2 and self.tags[0].code == self.tags[1].code:
            raise ValueError("a two-tag record cannot contain the same code twice")

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(t.code for t in self.tags)

    def is_actionable(self, tree: CodingTree) -> bool:
        """An item is actionable for a coder iff any of its tags is."""
        return any(tree.is_actionable(t.code) for t in self.tags)


@dataclass
class CoderRecordSet:
    """All of one coder's records over a dataset, keyed by item index."""

    coder_id: str
    records: dict[int, TagRecord] = field(default_factory=dict)

    def __iter__(self):
        return iter(sorted(self.records))

    def __len__(self):
        return len(self.records)

    def __getitem__(self, item_index: int) -> TagRecord:
        return self.records[item_index]

    def add(self, record: TagRecord) -> None:
        if record.item_index in self.records:
            raise ValueError(f"duplicate record for item {record.item_index}")
        self.records[record.item_index] = record


def make_record(tree: CodingTree, item_index: int, coder_id: str,
                codes: list[str], *, unfocused: bool = False,
                iot_specific: bool = False) -> TagRecord:
    """Build a TagRecord from raw code ids, reconstructing sequences.

    Raw ids pass through the tree's merge map; the Unfocused sub-label is
    attached to an M1 tag when the flag is set and such a tag exists.
    """
    tags = []
    for raw in codes:
        raw = raw.strip()
        code = tree.canonical(raw)
        # legacy leaf ids (e.g. N1) keep their own path; the tag carries
        # the canonical code
        leaf = raw if raw in tree.leaf_codes() else code
        seq = tree.tag_to_sequence(leaf)
        labels = frozenset({UNFOCUSED}) if (unfocused and code == "M1") else frozenset()
        tags.append(Tag(code=code, sequence=seq, sublabels=labels))
    return TagRecord(
        item_index=item_index,
        coder_id=coder_id,
        tags=tuple(tags),
        iot_specific=iot_specific,
        unfocused_flag=unfocused,
    )
