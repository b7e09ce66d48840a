"""Binary coding trees: loading, validation, and traversal.

A coding tree is a rooted binary tree whose internal nodes are yes/no
questions and whose leaves are codes.  Trees are plain data loaded from a
JSON config; every analysis takes the tree as input, so alternative tree
layouts (a split first question, a legacy extra question) are ordinary
config variants rather than code changes.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

YES = "yes"
NO = "no"

_Q_PREFIX = "Q:"
_C_PREFIX = "C:"


class TreeConfigError(ValueError):
    """Raised when a tree config fails to parse or validate."""


@dataclass(frozen=True)
class Code:
    id: str
    display_name: str
    actionable: bool
    description: str = ""
    sublabels: tuple[str, ...] = ()


@dataclass(frozen=True)
class QuestionNode:
    id: str
    text: str
    annotation: str
    yes_child: str  # "Q:<id>" or "C:<id>"
    no_child: str

    def child(self, answer: str) -> str:
        if answer == YES:
            return self.yes_child
        if answer == NO:
            return self.no_child
        raise ValueError(f"answer must be {YES!r} or {NO!r}, got {answer!r}")


@dataclass(frozen=True)
class QuestionSequence:
    """Root-to-leaf path: question ids, yes/no answers, and the code reached."""

    nodes: tuple[str, ...]
    answers: tuple[str, ...]
    terminal_code: str

    @property
    def n(self) -> int:
        return len(self.nodes)

    def __post_init__(self):
        if len(self.nodes) != len(self.answers):
            raise ValueError("nodes and answers must have equal length")


def _is_question_ref(ref: str) -> bool:
    return ref.startswith(_Q_PREFIX)


def _ref_id(ref: str) -> str:
    return ref[2:]


@dataclass(frozen=True)
class CodingTree:
    root: str
    questions: dict[str, QuestionNode] = field(hash=False)
    codes: dict[str, Code] = field(hash=False)
    merge_map: dict[str, str] = field(default_factory=dict, hash=False)
    treat_T_Tprime_as_equal: bool = False
    source_hash: str = ""

    # -- traversal ---------------------------------------------------------

    def step(self, at: str, answer: str) -> str:
        """Follow one edge; returns the child reference's bare id.

        The returned id names a question if `is_question(id)` holds,
        otherwise a code leaf.
        """
        if at not in self.questions:
            raise KeyError(f"unknown question id: {at!r}")
        return _ref_id(self.questions[at].child(answer))

    def is_question(self, node_id: str) -> bool:
        return node_id in self.questions

    def child_is_question(self, at: str, answer: str) -> bool:
        return _is_question_ref(self.questions[at].child(answer))

    def tag_to_sequence(self, code_id: str) -> QuestionSequence:
        """The unique root-to-leaf question sequence ending at `code_id`."""
        seq = self._paths().get(code_id)
        if seq is None:
            raise KeyError(f"code is not a leaf of this tree: {code_id!r}")
        return seq

    def _paths(self) -> dict[str, QuestionSequence]:
        cached = getattr(self, "_path_cache", None)
        if cached is None:
            cached = {}
            stack = [(self.root, (), ())]
            while stack:
                node, nodes, answers = stack.pop()
                q = self.questions[node]
                for answer in (YES, NO):
                    ref = q.child(answer)
                    if _is_question_ref(ref):
                        stack.append((_ref_id(ref), nodes + (node,), answers + (answer,)))
                    else:
                        cid = _ref_id(ref)
                        cached[cid] = QuestionSequence(
                            nodes=nodes + (node,),
                            answers=answers + (answer,),
                            terminal_code=cid,
                        )
            object.__setattr__(self, "_path_cache", cached)
        return cached

    def leaf_codes(self) -> tuple[str, ...]:
        return tuple(sorted(self._paths()))

    # -- code identity -----------------------------------------------------

    def canonical(self, raw_code_id: str) -> str:
        """Apply the merge map (idempotent by construction)."""
        return self.merge_map.get(raw_code_id, raw_code_id)

    def codes_equal(self, a: str, b: str) -> bool:
        """Engine equality: canonical id equality, optionally unifying T/T'."""
        a, b = self.canonical(a), self.canonical(b)
        if a == b:
            return True
        if self.treat_T_Tprime_as_equal and {a, b} == {"T", "T'"}:
            return True
        return False

    def is_actionable(self, code_id: str) -> bool:
        code = self.codes.get(self.canonical(code_id))
        if code is None:
            raise KeyError(f"unknown code: {code_id!r}")
        return code.actionable

    def actionable_codes(self) -> frozenset[str]:
        return frozenset(c.id for c in self.codes.values() if c.actionable)

    def with_options(self, *, treat_T_Tprime_as_equal: bool | None = None) -> "CodingTree":
        if treat_T_Tprime_as_equal is None:
            return self
        return CodingTree(
            root=self.root,
            questions=self.questions,
            codes=self.codes,
            merge_map=self.merge_map,
            treat_T_Tprime_as_equal=treat_T_Tprime_as_equal,
            source_hash=self.source_hash,
        )


# -- loading ---------------------------------------------------------------

_REQUIRED_QUESTION_FIELDS = ("text", "yes", "no")


def load_tree(source: str | Path | dict) -> CodingTree:
    """Load and validate a tree from a JSON file path or parsed document."""
    if isinstance(source, dict):
        doc = source
        raw = json.dumps(source, sort_keys=True).encode()
    else:
        raw = Path(source).read_bytes()
        doc = json.loads(raw)
    tree = _build(doc, hashlib.sha256(raw).hexdigest())
    findings = validate_tree(tree)
    if findings:
        raise TreeConfigError("; ".join(f.message for f in findings))
    return tree


def load_default_tree() -> CodingTree:
    return load_builtin_tree("default_tree")


def load_builtin_tree(name: str) -> CodingTree:
    """Load one of the shipped configs: default_tree, q1_split_tree, legacy_q11_tree."""
    ref = resources.files("codingtree.configs") / f"{name}.json"
    raw = ref.read_bytes()
    tree = _build(json.loads(raw), hashlib.sha256(raw).hexdigest())
    findings = validate_tree(tree)
    if findings:
        raise TreeConfigError("; ".join(f.message for f in findings))
    return tree


def _build(doc: dict, source_hash: str) -> CodingTree:
    for key in ("root", "questions", "codes"):
        if key not in doc:
            raise TreeConfigError(f"missing required field: {key!r}")
    questions = {}
    for qid, spec in doc["questions"].items():
        for f in _REQUIRED_QUESTION_FIELDS:
            if f not in spec:
                raise TreeConfigError(f"question {qid!r} missing field {f!r}")
        for ref in (spec["yes"], spec["no"]):
            if not (ref.startswith(_Q_PREFIX) or ref.startswith(_C_PREFIX)):
                raise TreeConfigError(
                    f"question {qid!r} child {ref!r} must be prefixed 'Q:' or 'C:'"
                )
        questions[qid] = QuestionNode(
            id=qid,
            text=spec["text"],
            annotation=spec.get("annotation", ""),
            yes_child=spec["yes"],
            no_child=spec["no"],
        )
    codes = {}
    for cid, spec in doc["codes"].items():
        codes[cid] = Code(
            id=cid,
            display_name=spec["name"],
            actionable=bool(spec["actionable"]),
            description=spec.get("description", ""),
            sublabels=tuple(spec.get("sublabels", ())),
        )
    root = doc["root"]
    if not _is_question_ref(root):
        raise TreeConfigError("root must reference a question ('Q:<id>')")
    return CodingTree(
        root=_ref_id(root),
        questions=questions,
        codes=codes,
        merge_map=dict(doc.get("merge_map", {})),
        treat_T_Tprime_as_equal=bool(doc.get("treat_T_Tprime_as_equal", False)),
        source_hash=source_hash,
    )


# -- validation ------------------------------------------------------------

@dataclass(frozen=True)
class Finding:
    kind: str
    message: str


def validate_tree(tree: CodingTree) -> list[Finding]:
    """Check all tree invariants; an empty list means the tree is valid."""
    findings: list[Finding] = []
    if tree.root not in tree.questions:
        findings.append(Finding("dangling-root", f"root question missing: {tree.root!r}"))
        return findings

    seen_codes: dict[str, str] = {}
    visited: set[str] = set()
    stack = [tree.root]
    while stack:
        qid = stack.pop()
        if qid in visited:
            findings.append(Finding("cycle", f"question visited twice: {qid!r}"))
            continue
        visited.add(qid)
        q = tree.questions[qid]
        for answer in (YES, NO):
            ref = q.child(answer)
            cid = _ref_id(ref)
            if _is_question_ref(ref):
                if cid not in tree.questions:
                    findings.append(
                        Finding("dangling-child", f"{qid}/{answer} references missing question {cid!r}")
                    )
                else:
                    stack.append(cid)
            else:
                if cid not in tree.codes:
                    findings.append(
                        Finding("dangling-child", f"{qid}/{answer} references missing code {cid!r}")
                    )
                elif cid in seen_codes:
                    findings.append(
                        Finding(
                            "duplicate-leaf-code",
                            f"code {cid!r} appears at leaves under {seen_codes[cid]} and {qid}",
                        )
                    )
                else:
                    seen_codes[cid] = qid

    unreached = set(tree.questions) - visited
    for qid in sorted(unreached):
        findings.append(Finding("unreachable", f"question not reachable from root: {qid!r}"))

    for raw, target in tree.merge_map.items():
        if target not in tree.codes:
            findings.append(
                Finding("merge-target-missing", f"merge_map {raw!r} -> {target!r}: target not a known code")
            )
        if raw in tree.merge_map.values() and tree.merge_map.get(raw) != raw and raw in seen_codes:
            # raw is itself a target of another entry while being remapped
            findings.append(
                Finding("merge-not-idempotent", f"merge_map chains through {raw!r}")
            )
    for raw, target in tree.merge_map.items():
        if target in tree.merge_map and tree.merge_map[target] != target:
            findings.append(
                Finding("merge-not-idempotent", f"merge_map target {target!r} is itself remapped")
            )
    return findings
