"""Two-coder agreement analysis.

Every statistic is computed from a pair of CoderRecordSets and a tree:
comparison types, tag agreements with ordered pairing, diverging
questions, question tallies, actionability agreement, tag-vs-tag
nonagreement matrices, tag and category distributions, the Unfocused
sub-label breakdown, and the double-double item listing.

All operations are pure over immutable inputs.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

from codingtree.records import AdviceItem, CoderRecordSet, TagRecord, UNFOCUSED
from codingtree.tree import CodingTree

SS = "SS"
SD = "SD"
DD = "DD"

FIRST_FIRST = "First-First"
FIRST_SECOND = "First-Second"
SECOND_SECOND = "Second-Second"


class DivergenceAnomaly(Exception):
    """Two overlapping sequences of equal length end at different nodes."""


def pct(numerator: int, denominator: int) -> int:
    """Integer percentage with half-up rounding (as in published tables)."""
    if denominator == 0:
        return 0
    value = Decimal(100 * numerator) / Decimal(denominator)
    return int(value.quantize(Decimal("1"), rounding=ROUND_HALF_UP))


# -- per-item comparison ---------------------------------------------------

def classify_comparison(rec_a: TagRecord, rec_b: TagRecord) -> str:
    if rec_a.item_index != rec_b.item_index:
        raise ValueError("records compare different items")
    doubles = (len(rec_a.tags) == 2) + (len(rec_b.tags) == 2)
    return (SS, SD, DD)[doubles]


def t_agreement(rec_a: TagRecord, rec_b: TagRecord,
                tree: CodingTree) -> tuple[bool, str | None, str | None]:
    """(agrees?, agreed code, ordered pairing).

    The matched pair is classified First-First, First-Second (which
    includes Second-First), or Second-Second, in that priority order.
    """
    if rec_a.item_index != rec_b.item_index:
        raise ValueError("records compare different items")
    by_priority = [((0, 0), FIRST_FIRST), ((0, 1), FIRST_SECOND),
                   ((1, 0), FIRST_SECOND), ((1, 1), SECOND_SECOND)]
    for (i, j), pairing in by_priority:
        if i < len(rec_a.tags) and j < len(rec_b.tags):
            a, b = rec_a.tags[i], rec_b.tags[j]
            if tree.codes_equal(a.code, b.code):
                return True, tree.canonical(a.code), pairing
    return False, None, None


def _overlap(seq_a, seq_b) -> tuple[tuple[str, ...], int]:
    """Common prefix of two node paths and its length."""
    k = 0
    na, nb = seq_a.nodes, seq_b.nodes
    while k < min(len(na), len(nb)) and na[k] == nb[k]:
        k += 1
    return na[:k], k


def diverging_question(rec_a: TagRecord, rec_b: TagRecord,
                       tree: CodingTree) -> str:
    """Last node of the longest nonagreement overlap (SS and SD only).

    For SD the overlap is taken against each tag of the two-tag coder and
    the longer one wins; an equal-length tie ending at different nodes
    raises DivergenceAnomaly.
    """
    agrees, _, _ = t_agreement(rec_a, rec_b, tree)
    if agrees:
        raise ValueError("diverging question is undefined for agreements")
    if classify_comparison(rec_a, rec_b) == DD:
        raise ValueError("diverging question is not computed for DD comparisons")
    overlaps = [_overlap(a.sequence, b.sequence)
                for a in rec_a.tags for b in rec_b.tags]
    best_nodes, best_len = max(overlaps, key=lambda t: t[1])
    for nodes, length in overlaps:
        if length == best_len and nodes[-1] != best_nodes[-1]:
            raise DivergenceAnomaly(
                f"item {rec_a.item_index}: equal-length overlaps end at "
                f"{nodes[-1]} and {best_nodes[-1]}")
    return best_nodes[-1]


def actionability_agreement(rec_a: TagRecord, rec_b: TagRecord,
                            tree: CodingTree) -> bool:
    """True iff some cross-pair of tags has matching actionability."""
    if rec_a.item_index != rec_b.item_index:
        raise ValueError("records compare different items")
    return any(
        tree.is_actionable(a.code) == tree.is_actionable(b.code)
        for a in rec_a.tags for b in rec_b.tags)


@dataclass(frozen=True)
class ComparisonResult:
    item_index: int
    type: str
    t_agreement: bool
    actionability_agreement: bool
    agreed_code: str | None = None
    pairing: str | None = None
    diverging_question: str | None = None
    anomaly: bool = False


def compare_item(rec_a: TagRecord, rec_b: TagRecord,
                 tree: CodingTree) -> ComparisonResult:
    ctype = classify_comparison(rec_a, rec_b)
    agrees, code, pairing = t_agreement(rec_a, rec_b, tree)
    diverging = None
    anomaly = False
    if not agrees and ctype in (SS, SD):
        try:
            diverging = diverging_question(rec_a, rec_b, tree)
        except DivergenceAnomaly:
            anomaly = True
    return ComparisonResult(
        item_index=rec_a.item_index,
        type=ctype,
        t_agreement=agrees,
        actionability_agreement=actionability_agreement(rec_a, rec_b, tree),
        agreed_code=code,
        pairing=pairing,
        diverging_question=diverging,
        anomaly=anomaly,
    )


def _paired_items(set_a: CoderRecordSet, set_b: CoderRecordSet) -> list[int]:
    return sorted(set(set_a.records) & set(set_b.records))


def compare_all(set_a: CoderRecordSet, set_b: CoderRecordSet,
                tree: CodingTree) -> list[ComparisonResult]:
    return [compare_item(set_a[i], set_b[i], tree)
            for i in _paired_items(set_a, set_b)]


# -- question tallies ------------------------------------------------------

@dataclass
class QTallyCell:
    visits: int = 0
    q_agreements: int = 0
    q_nonagreements: int = 0
    yes_agreements: int = 0
    no_agreements: int = 0


@dataclass
class QTally:
    """Per-question, per-comparison-type joint-visit counters (DD excluded)."""

    cells: dict[tuple[str, str], QTallyCell] = field(default_factory=dict)
    anomalies: list[int] = field(default_factory=list)

    def cell(self, question: str, ctype: str) -> QTallyCell:
        return self.cells.setdefault((question, ctype), QTallyCell())

    def visits(self, question: str, ctype: str) -> int:
        return self.cell(question, ctype).visits

    def nonagreements(self, question: str, ctype: str) -> int:
        return self.cell(question, ctype).q_nonagreements

    def total_nonagreements(self, ctype: str) -> int:
        return sum(c.q_nonagreements for (q, t), c in self.cells.items() if t == ctype)

    def questions(self) -> list[str]:
        return sorted({q for q, _ in self.cells}, key=lambda q: (len(q), q))


def _credit_agreement(tally: QTally, ctype: str, rec_a: TagRecord,
                      rec_b: TagRecord, tree: CodingTree) -> None:
    # Credit the matched pair's shared path.  When the agreed codes are
    # identical this is the agreed code's full sequence; under T/T'
    # unification it reduces to the common prefix.
    for (i, j) in ((0, 0), (0, 1), (1, 0), (1, 1)):
        if i < len(rec_a.tags) and j < len(rec_b.tags):
            a, b = rec_a.tags[i], rec_b.tags[j]
            if tree.codes_equal(a.code, b.code):
                nodes, k = _overlap(a.sequence, b.sequence)
                for pos, q in enumerate(nodes):
                    cell = tally.cell(q, ctype)
                    cell.visits += 1
                    cell.q_agreements += 1
                    answer = a.sequence.answers[pos]
                    if answer == "yes":
                        cell.yes_agreements += 1
                    else:
                        cell.no_agreements += 1
                return


def _credit_nonagreement(tally: QTally, ctype: str, rec_a: TagRecord,
                         rec_b: TagRecord, tree: CodingTree) -> None:
    overlaps = [_overlap(a.sequence, b.sequence)
                for a in rec_a.tags for b in rec_b.tags]
    nodes, length = max(overlaps, key=lambda t: t[1])
    for other_nodes, other_len in overlaps:
        if other_len == length and other_nodes[-1] != nodes[-1]:
            tally.anomalies.append(rec_a.item_index)
            return
    for pos, q in enumerate(nodes):
        cell = tally.cell(q, ctype)
        cell.visits += 1
        if pos == length - 1:
            cell.q_nonagreements += 1
        else:
            cell.q_agreements += 1
            # Both coders answered this shared-prefix node identically;
            # read the answer off whichever sequence covers the prefix.
            answer = None
            for a in rec_a.tags:
                if a.sequence.nodes[:pos + 1] == tuple(nodes[:pos + 1]):
                    answer = a.sequence.answers[pos]
                    break
            if answer == "yes":
                cell.yes_agreements += 1
            else:
                cell.no_agreements += 1


def q_tally(set_a: CoderRecordSet, set_b: CoderRecordSet,
            tree: CodingTree) -> QTally:
    """Joint visit/agreement/nonagreement counts per question (SS and SD)."""
    tally = QTally()
    for index in _paired_items(set_a, set_b):
        rec_a, rec_b = set_a[index], set_b[index]
        ctype = classify_comparison(rec_a, rec_b)
        if ctype == DD:
            continue
        agrees, _, _ = t_agreement(rec_a, rec_b, tree)
        if agrees:
            _credit_agreement(tally, ctype, rec_a, rec_b, tree)
        else:
            _credit_nonagreement(tally, ctype, rec_a, rec_b, tree)
    return tally


# -- tag-vs-tag matrices ---------------------------------------------------

@dataclass
class TagVsTagMatrix:
    type: str
    codes: list[str]
    counts: dict[tuple[str, str], int]

    def at(self, row: str, col: str) -> int:
        return self.counts.get((row, col), 0)

    def row_sum(self, row: str) -> int:
        return sum(n for (r, _), n in self.counts.items() if r == row)

    def col_sum(self, col: str) -> int:
        return sum(n for (_, c), n in self.counts.items() if c == col)

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def _canonical_codes(tree: CodingTree) -> list[str]:
    return sorted({tree.canonical(c) for c in tree.leaf_codes()})


def tag_vs_tag(set_a: CoderRecordSet, set_b: CoderRecordSet,
               tree: CodingTree, ctype: str) -> TagVsTagMatrix:
    """Nonagreement code-pair counts; rows are coder A, columns coder B.

    SS nonagreements contribute one cell; SD nonagreements contribute one
    cell per tag of the two-tag coder.
    """
    if ctype not in (SS, SD):
        raise ValueError("tag-vs-tag matrices exist for SS and SD only")
    counts: Counter[tuple[str, str]] = Counter()
    for index in _paired_items(set_a, set_b):
        rec_a, rec_b = set_a[index], set_b[index]
        if classify_comparison(rec_a, rec_b) != ctype:
            continue
        agrees, _, _ = t_agreement(rec_a, rec_b, tree)
        if agrees:
            continue
        for a in rec_a.tags:
            for b in rec_b.tags:
                counts[(tree.canonical(a.code), tree.canonical(b.code))] += 1
    return TagVsTagMatrix(type=ctype, codes=_canonical_codes(tree), counts=dict(counts))


# -- distributions ---------------------------------------------------------

@dataclass
class TagDistribution:
    coder_id: str
    code_counts: dict[str, int]
    total_tags: int
    second_tags: int
    actionable_items: int
    nonactionable_items: int

    @property
    def item_count(self) -> int:
        return self.actionable_items + self.nonactionable_items


def tag_distribution(recset: CoderRecordSet, tree: CodingTree) -> TagDistribution:
    code_counts = Counter({c: 0 for c in _canonical_codes(tree)})
    second = 0
    actionable = 0
    for index in recset:
        record = recset[index]
        for tag in record.tags:
            code_counts[tree.canonical(tag.code)] += 1
        second += len(record.tags) - 1
        actionable += record.is_actionable(tree)
    return TagDistribution(
        coder_id=recset.coder_id,
        code_counts=dict(code_counts),
        total_tags=sum(code_counts.values()),
        second_tags=second,
        actionable_items=actionable,
        nonactionable_items=len(recset) - actionable,
    )


@dataclass
class CategoryColumn:
    category: str
    size: int
    code_pct: dict[str, tuple[int, int]]        # code -> (coder A %, coder B %)
    actionable_pct: tuple[int, int]
    actionability_delta: int


@dataclass
class CategoryDistribution:
    columns: list[CategoryColumn]
    skipped_items: list[int]                    # items without a category


def category_distribution(set_a: CoderRecordSet, set_b: CoderRecordSet,
                          dataset: list[AdviceItem],
                          tree: CodingTree) -> CategoryDistribution:
    """Per-category percentage of items receiving each code, per coder."""
    codes = _canonical_codes(tree)
    by_cat: dict[str, list[AdviceItem]] = {}
    skipped = []
    paired = set(_paired_items(set_a, set_b))
    for item in dataset:
        if item.index not in paired:
            continue
        if item.category is None:
            skipped.append(item.index)
            continue
        by_cat.setdefault(item.category, []).append(item)

    def sort_key(cat: str) -> tuple:
        prefix, _, num = cat.partition("-")
        return (prefix, int(num)) if num.isdigit() else (cat, 0)

    columns = []
    for cat in sorted(by_cat, key=sort_key):
        items = by_cat[cat]
        size = len(items)
        code_pct = {}
        for code in codes:
            n_a = sum(1 for it in items
                      if code in (tree.canonical(c) for c in set_a[it.index].codes))
            n_b = sum(1 for it in items
                      if code in (tree.canonical(c) for c in set_b[it.index].codes))
            code_pct[code] = (pct(n_a, size), pct(n_b, size))
        act_a = sum(1 for it in items if set_a[it.index].is_actionable(tree))
        act_b = sum(1 for it in items if set_b[it.index].is_actionable(tree))
        pa, pb = pct(act_a, size), pct(act_b, size)
        columns.append(CategoryColumn(
            category=cat, size=size, code_pct=code_pct,
            actionable_pct=(pa, pb), actionability_delta=abs(pa - pb)))
    return CategoryDistribution(columns=columns, skipped_items=skipped)


# -- Unfocused sub-label ---------------------------------------------------

@dataclass
class UnfocusedBucket:
    both: int = 0
    one: int = 0
    neither: int = 0

    @property
    def total(self) -> int:
        return self.both + self.one + self.neither


@dataclass
class UnfocusedBreakdown:
    ss: UnfocusedBucket
    sd: UnfocusedBucket

    @property
    def total(self) -> int:
        return self.ss.total + self.sd.total


def _selected_unfocused(record: TagRecord) -> bool:
    return any(UNFOCUSED in t.sublabels for t in record.tags) or record.unfocused_flag


def unfocused_breakdown(set_a: CoderRecordSet, set_b: CoderRecordSet,
                        tree: CodingTree) -> UnfocusedBreakdown:
    """Sub-label use among SS/SD items whose agreement code is M1."""
    out = UnfocusedBreakdown(ss=UnfocusedBucket(), sd=UnfocusedBucket())
    for index in _paired_items(set_a, set_b):
        rec_a, rec_b = set_a[index], set_b[index]
        ctype = classify_comparison(rec_a, rec_b)
        if ctype == DD:
            continue
        agrees, code, _ = t_agreement(rec_a, rec_b, tree)
        if not agrees or code != "M1":
            continue
        bucket = out.ss if ctype == SS else out.sd
        selected = _selected_unfocused(rec_a) + _selected_unfocused(rec_b)
        if selected == 2:
            bucket.both += 1
        elif selected == 1:
            bucket.one += 1
        else:
            bucket.neither += 1
    return out


# -- DD listing and summary ------------------------------------------------

@dataclass(frozen=True)
class DDItem:
    item_index: int
    coder_a_codes: tuple[str, str]
    coder_b_codes: tuple[str, str]


def dd_listing(set_a: CoderRecordSet, set_b: CoderRecordSet) -> list[DDItem]:
    """All items where both coders gave two tags, ascending by index."""
    out = []
    for index in _paired_items(set_a, set_b):
        rec_a, rec_b = set_a[index], set_b[index]
        if len(rec_a.tags) == 2 and len(rec_b.tags) == 2:
            out.append(DDItem(index, rec_a.codes, rec_b.codes))
    return out


@dataclass
class TypeSummary:
    items: int = 0
    t_agreements: int = 0
    actionability_agreements: int = 0
    pairings: dict[str, int] = field(default_factory=dict)


@dataclass
class Summary:
    by_type: dict[str, TypeSummary]
    item_count: int

    @property
    def total_t_agreements(self) -> int:
        return sum(t.t_agreements for t in self.by_type.values())

    @property
    def overall_agreement_pct(self) -> int:
        return pct(self.total_t_agreements, self.item_count)


def summary(set_a: CoderRecordSet, set_b: CoderRecordSet,
            tree: CodingTree) -> Summary:
    by_type = {t: TypeSummary() for t in (SS, SD, DD)}
    results = compare_all(set_a, set_b, tree)
    for r in results:
        ts = by_type[r.type]
        ts.items += 1
        if r.t_agreement:
            ts.t_agreements += 1
            ts.pairings[r.pairing] = ts.pairings.get(r.pairing, 0) + 1
        if r.actionability_agreement:
            ts.actionability_agreements += 1
    return Summary(by_type=by_type, item_count=len(results))


# -- whole-analysis bundle -------------------------------------------------

@dataclass
class AnalysisResult:
    summary: Summary
    q_tally: QTally
    ss_matrix: TagVsTagMatrix
    sd_matrix: TagVsTagMatrix
    distribution_a: TagDistribution
    distribution_b: TagDistribution
    categories: CategoryDistribution
    unfocused: UnfocusedBreakdown
    dd_items: list[DDItem]
    comparisons: list[ComparisonResult]


def analyze(set_a: CoderRecordSet, set_b: CoderRecordSet,
            dataset: list[AdviceItem], tree: CodingTree) -> AnalysisResult:
    """Run the complete two-coder analysis."""
    return AnalysisResult(
        summary=summary(set_a, set_b, tree),
        q_tally=q_tally(set_a, set_b, tree),
        ss_matrix=tag_vs_tag(set_a, set_b, tree, SS),
        sd_matrix=tag_vs_tag(set_a, set_b, tree, SD),
        distribution_a=tag_distribution(set_a, tree),
        distribution_b=tag_distribution(set_b, tree),
        categories=category_distribution(set_a, set_b, dataset, tree),
        unfocused=unfocused_breakdown(set_a, set_b, tree),
        dd_items=dd_listing(set_a, set_b),
        comparisons=compare_all(set_a, set_b, tree),
    )


class AgreementAnalyzer:
    """Estimator-style wrapper around `analyze`.

    Configure with a tree and options, `fit` on a pair of record sets, and
    read the result from `result_` (or the individual `summary_`,
    `q_tally_`, ... attributes).
    """

    def __init__(self, tree: CodingTree, *, merge_t_tprime: bool = False):
        self.tree = tree
        self.merge_t_tprime = merge_t_tprime

    def get_params(self) -> dict:
        return {"tree": self.tree, "merge_t_tprime": self.merge_t_tprime}

    def set_params(self, **params) -> "AgreementAnalyzer":
        for key, value in params.items():
            if not hasattr(self, key):
                raise ValueError(f"unknown parameter {key!r}")
            setattr(self, key, value)
        return self

    def fit(self, set_a: CoderRecordSet, set_b: CoderRecordSet,
            dataset: list[AdviceItem]) -> "AgreementAnalyzer":
        tree = self.tree.with_options(treat_T_Tprime_as_equal=self.merge_t_tprime) \
            if self.merge_t_tprime else self.tree
        self.result_ = analyze(set_a, set_b, dataset, tree)
        self.summary_ = self.result_.summary
        self.q_tally_ = self.result_.q_tally
        self.ss_matrix_ = self.result_.ss_matrix
        self.sd_matrix_ = self.result_.sd_matrix
        return self
