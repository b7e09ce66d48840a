"""Live coding sessions: one coder walking the question tree over a dataset.

Session state is derived by replaying an append-only answer log against
the tree, which makes undo a log pop and makes shortcutting structurally
impossible: a tag only exists if every question on its path was answered.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from codingtree.records import Tag, TagRecord, UNFOCUSED, AdviceItem
from codingtree.tree import NO, YES, CodingTree, QuestionSequence

BOTH = "both"

PENDING = "pending"
IN_PROGRESS = "in_progress"
CODED = "coded"          # all branches reached leaves; awaiting finalization
FINALIZED = "finalized"


class SessionError(ValueError):
    """Raised on answers or edits that violate session rules."""


@dataclass
class BranchState:
    """One root-to-leaf traversal in progress or complete."""

    nodes: list[str]
    answers: list[str]
    at: str | None          # current question id; None once a leaf is reached
    code: str | None = None

    @property
    def complete(self) -> bool:
        return self.code is not None


@dataclass
class ItemState:
    log: list[tuple[str, str]] = field(default_factory=list)
    sublabels: dict[int, set[str]] = field(default_factory=dict)
    iot_specific: bool = False
    finalized: bool = False

    # derived on replay:
    branches: list[BranchState] = field(default_factory=list)
    queued: list[BranchState] = field(default_factory=list)
    forked: bool = False


def _replay(tree: CodingTree, log: list[tuple[str, str]]) -> ItemState:
    """Rebuild traversal state from the answer log (raises on bad logs)."""
    state = ItemState(log=list(log))
    current = BranchState(nodes=[], answers=[], at=tree.root)
    state.branches = [current]
    for question_id, answer in log:
        while current.complete:
            if not state.queued:
                raise SessionError("answer after all branches completed")
            current = state.queued.pop(0)
            state.branches.append(current)
        if question_id != current.at:
            raise SessionError(
                f"expected an answer for {current.at}, got {question_id}")
        if answer == BOTH:
            if state.forked:
                raise SessionError("a second 'both' answer is not allowed on one item")
            state.forked = True
            state.queued.append(BranchState(
                nodes=current.nodes + [question_id],
                answers=current.answers + [NO],
                at=None,
            ))
            # The queued branch resumes from the fork's no-child.
            no_child = tree.step(question_id, NO)
            if tree.is_question(no_child):
                state.queued[-1].at = no_child
            else:
                state.queued[-1].code = no_child
            effective = YES
        elif answer in (YES, NO):
            effective = answer
        else:
            raise SessionError(f"answer must be yes, no, or both; got {answer!r}")
        current.nodes.append(question_id)
        current.answers.append(effective)
        child = tree.step(question_id, effective)
        if tree.is_question(child):
            current.at = child
        else:
            current.at = None
            current.code = child
    # Promote a queued branch if the active one just finished.
    while current.complete and state.queued:
        current = state.queued.pop(0)
        state.branches.append(current)
    return state


@dataclass
class Session:
    coder_id: str
    tree: CodingTree
    dataset: list[AdviceItem]
    items: dict[int, ItemState] = field(default_factory=dict)
    created_at: float = field(default_factory=time.time)
    updated_at: float = field(default_factory=time.time)

    # -- queries -----------------------------------------------------------

    def item(self, item_index: int) -> ItemState:
        if item_index not in self.items:
            raise KeyError(f"unknown item index {item_index}")
        return self.items[item_index]

    def status(self, item_index: int) -> str:
        state = self.item(item_index)
        if state.finalized:
            return FINALIZED
        if not state.log:
            return PENDING
        if self._all_branches_complete(state):
            return CODED
        return IN_PROGRESS

    def cursor(self, item_index: int) -> str | None:
        """The question id awaiting an answer, or None."""
        state = self.item(item_index)
        for branch in state.branches:
            if not branch.complete:
                return branch.at
        for branch in state.queued:
            if not branch.complete:
                return branch.at
        return None

    def progress(self) -> tuple[int, int]:
        done = sum(1 for s in self.items.values() if s.finalized)
        return done, len(self.items)

    @staticmethod
    def _all_branches_complete(state: ItemState) -> bool:
        return (all(b.complete for b in state.branches)
                and all(b.complete for b in state.queued))

    # -- mutations ---------------------------------------------------------

    def answer(self, item_index: int, question_id: str, answer: str) -> dict:
        """Record one answer; returns the resulting item view."""
        state = self.item(item_index)
        if state.finalized:
            raise SessionError(f"item {item_index} is finalized; undo first")
        expected = self.cursor(item_index)
        if expected is None:
            raise SessionError(f"item {item_index} has no open question")
        if question_id != expected:
            raise SessionError(
                f"item {item_index}: cursor is at {expected}, not {question_id}")
        replayed = _replay(self.tree, state.log + [(question_id, answer)])
        replayed.sublabels = state.sublabels
        replayed.iot_specific = state.iot_specific
        self.items[item_index] = replayed
        self.updated_at = time.time()
        return self.item_view(item_index)

    def set_sublabel(self, item_index: int, tag_position: int, label: str) -> dict:
        """Attach a sub-label (idempotent) to a completed tag."""
        state = self.item(item_index)
        completed = [b for b in state.branches if b.complete]
        if not 0 <= tag_position < len(completed):
            raise SessionError(f"item {item_index} has no tag at position {tag_position}")
        code = self.tree.codes.get(completed[tag_position].code)
        if code is None or label not in code.sublabels:
            raise SessionError(
                f"label {label!r} is not configured for code "
                f"{completed[tag_position].code!r}")
        state.sublabels.setdefault(tag_position, set()).add(label)
        self.updated_at = time.time()
        return self.item_view(item_index)

    def set_iot_flag(self, item_index: int, value: bool) -> None:
        self.item(item_index).iot_specific = bool(value)
        self.updated_at = time.time()

    def finalize_item(self, item_index: int) -> TagRecord:
        state = self.item(item_index)
        if state.finalized:
            raise SessionError(f"item {item_index} is already finalized")
        if not state.log or not self._all_branches_complete(state):
            raise SessionError(f"item {item_index} has unreached leaves")
        record = self._build_record(item_index, state)
        state.finalized = True
        self.updated_at = time.time()
        return record

    def undo(self, item_index: int) -> dict:
        """Remove the most recent answer; un-finalizes a finalized item."""
        state = self.item(item_index)
        if not state.log:
            raise SessionError(f"item {item_index} has nothing to undo")
        replayed = _replay(self.tree, state.log[:-1])
        replayed.iot_specific = state.iot_specific
        completed = sum(1 for b in replayed.branches if b.complete)
        replayed.sublabels = {
            pos: set(labels) for pos, labels in state.sublabels.items()
            if pos < completed
        }
        self.items[item_index] = replayed
        self.updated_at = time.time()
        return self.item_view(item_index)

    # -- records and export ------------------------------------------------

    def _build_record(self, item_index: int, state: ItemState) -> TagRecord:
        tags = []
        for position, branch in enumerate(b for b in state.branches if b.complete):
            labels = frozenset(state.sublabels.get(position, ()))
            tags.append(Tag(
                code=branch.code,
                sequence=QuestionSequence(
                    nodes=tuple(branch.nodes),
                    answers=tuple(branch.answers),
                    terminal_code=branch.code,
                ),
                sublabels=labels,
            ))
        return TagRecord(
            item_index=item_index,
            coder_id=self.coder_id,
            tags=tuple(tags),
            iot_specific=state.iot_specific,
            unfocused_flag=any(UNFOCUSED in t.sublabels for t in tags),
        )

    def export_records(self) -> tuple[list[TagRecord], bool]:
        """All finalized records, plus a flag marking incomplete sessions."""
        records = [self._build_record(i, s) for i, s in sorted(self.items.items())
                   if s.finalized]
        complete = len(records) == len(self.items)
        return records, not complete

    # -- views -------------------------------------------------------------

    def item_view(self, item_index: int) -> dict:
        """JSON-friendly snapshot of one item's state."""
        state = self.item(item_index)
        meta = next(i for i in self.dataset if i.index == item_index)
        status = self.status(item_index)
        cursor = self.cursor(item_index)
        view = {
            "item_index": item_index,
            "text": meta.text,
            "category": meta.category,
            "status": status,
            "codes": [b.code for b in state.branches if b.complete],
            "sublabels": {str(k): sorted(v) for k, v in state.sublabels.items()},
            "iot_specific": state.iot_specific,
            "actions": [],
            "question": None,
        }
        if cursor is not None:
            q = self.tree.questions[cursor]
            view["question"] = {
                "id": q.id,
                "text": q.text,
                "annotation": q.annotation,
            }
            view["actions"] = [YES, NO] + ([] if state.forked else [BOTH])
            if state.log:
                view["actions"].append("undo")
        elif status in (CODED, FINALIZED):
            view["actions"] = ["undo"] if status == FINALIZED else ["finalize", "undo"]
            completed = [b for b in state.branches if b.complete]
            for pos, branch in enumerate(completed):
                code = self.tree.codes.get(branch.code)
                if code is not None and code.sublabels:
                    view["actions"].append("sublabel")
                    break
        return view

    # -- persistence -------------------------------------------------------

    def dataset_hash(self) -> str:
        payload = json.dumps(
            [(i.index, i.text, i.category) for i in self.dataset],
            sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()

    def to_json(self) -> dict:
        return {
            "coder_id": self.coder_id,
            "tree_hash": self.tree.source_hash,
            "dataset_hash": self.dataset_hash(),
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            "items": {
                str(index): {
                    "log": [list(entry) for entry in state.log],
                    "sublabels": {str(k): sorted(v)
                                  for k, v in state.sublabels.items()},
                    "iot_specific": state.iot_specific,
                    "finalized": state.finalized,
                }
                for index, state in self.items.items()
            },
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n",
                              encoding="utf-8")

    @classmethod
    def from_json(cls, doc: dict, tree: CodingTree,
                  dataset: list[AdviceItem]) -> "Session":
        session = start_session(tree, dataset, doc["coder_id"])
        if doc.get("tree_hash") and tree.source_hash and \
                doc["tree_hash"] != tree.source_hash:
            raise SessionError("session was recorded against a different tree")
        for key, spec in doc.get("items", {}).items():
            index = int(key)
            state = _replay(tree, [tuple(e) for e in spec.get("log", [])])
            state.sublabels = {int(k): set(v)
                               for k, v in spec.get("sublabels", {}).items()}
            state.iot_specific = bool(spec.get("iot_specific", False))
            state.finalized = bool(spec.get("finalized", False))
            session.items[index] = state
        session.created_at = doc.get("created_at", session.created_at)
        session.updated_at = doc.get("updated_at", session.updated_at)
        return session

    @classmethod
    def load(cls, path: str | Path, tree: CodingTree,
             dataset: list[AdviceItem]) -> "Session":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls.from_json(doc, tree, dataset)


def start_session(tree: CodingTree, dataset: list[AdviceItem],
                  coder_id: str) -> Session:
    if not dataset:
        raise SessionError("cannot start a session over an empty dataset")
    session = Session(coder_id=coder_id, tree=tree, dataset=list(dataset))
    for item in dataset:
        session.items[item.index] = ItemState()
        session.items[item.index].branches = [
            BranchState(nodes=[], answers=[], at=tree.root)]
    return session


def export_session_csv(session: Session, path: str | Path) -> bool:
    """Write finalized records as a single-coder CSV; True if incomplete."""
    import csv

    records, incomplete = session.export_records()
    by_index = {r.item_index: r for r in records}
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["item_index", "text", "category",
                         "tag1", "tag2", "unfocused", "iot_flag"])
        for item in sorted(session.dataset, key=lambda i: i.index):
            record = by_index.get(item.index)
            if record is None:
                continue
            codes = list(record.codes) + [""]
            writer.writerow([
                item.index, item.text, item.category or "",
                codes[0], codes[1],
                "true" if record.unfocused_flag else "false",
                "true" if record.iot_specific else "false",
            ])
    return incomplete
