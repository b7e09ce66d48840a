"""Acceptance checks against the bundled two-coder reference dataset.

Every count asserted here must hold exactly unless a tolerance is stated;
percentages round half-up to whole points.
"""

import random
import time

import pytest

from codingtree.agreement import (
    DD,
    FIRST_FIRST,
    FIRST_SECOND,
    SD,
    SECOND_SECOND,
    SS,
    analyze,
    compare_item,
    diverging_question,
)
from codingtree.records import TagRecord, make_record
from codingtree.tree import CodingTree, load_tree


# 1. Comparison partition ---------------------------------------------------

def test_comparison_partition(analysis):
    by_type = analysis.summary.by_type
    assert by_type[SS].items == 760
    assert by_type[SD].items == 234
    assert by_type[DD].items == 19
    assert analysis.summary.item_count == 1013


# 2. Tag agreements ---------------------------------------------------------

def test_t_agreements(analysis):
    by_type = analysis.summary.by_type
    assert by_type[SS].t_agreements == 315
    assert by_type[SD].t_agreements == 130
    assert by_type[DD].t_agreements == 17
    assert analysis.summary.total_t_agreements == 462
    assert analysis.summary.overall_agreement_pct == 46


# 3. Actionability agreements -----------------------------------------------

def test_actionability_agreements(analysis):
    by_type = analysis.summary.by_type
    assert by_type[SS].actionability_agreements == 608
    assert by_type[SD].actionability_agreements == 204
    assert by_type[DD].actionability_agreements == 18


# 4. Question tallies -------------------------------------------------------

def test_q_tally_totals_and_visits(analysis):
    tally = analysis.q_tally
    assert tally.total_nonagreements(SS) == 445
    assert tally.total_nonagreements(SD) == 104
    assert tally.visits("Q1", SS) == 760
    assert tally.visits("Q1", SD) == 234
    assert tally.visits("Q2", SS) == 508
    assert tally.visits("Q2", SD) == 206


def test_q_nonagreement_shares(analysis):
    tally = analysis.q_tally
    for question, ctype, stated in [
        ("Q1", SS, 35), ("Q1", SD, 17),
        ("Q3", SS, 29), ("Q3", SD, 23),
        ("Q4", SS, 14), ("Q4", SD, 25),
        ("Q8", SS, 8),
    ]:
        share = 100 * tally.nonagreements(question, ctype) \
            / tally.total_nonagreements(ctype)
        assert abs(share - stated) <= 1, (question, ctype, share)


def test_q8_within_question_share(analysis):
    tally = analysis.q_tally
    within = 100 * tally.nonagreements("Q8", SS) / tally.visits("Q8", SS)
    assert abs(within - 34) <= 1


# 5. Tag-vs-tag matrices ----------------------------------------------------

def test_ss_matrix(analysis):
    m = analysis.ss_matrix
    assert m.at("P1", "T") == 61
    assert [m.row_sum(r) for r in ("M1", "P1", "P2", "P4", "P5", "T")] \
        == [132, 138, 47, 47, 43, 26]
    nonzero_rows = [m.row_sum(r) for r in m.codes if m.row_sum(r)]
    assert sorted(nonzero_rows, reverse=True) == [138, 132, 47, 47, 43, 26, 11, 1]
    assert [m.col_sum(c) for c in m.codes] \
        == [24, 7, 24, 55, 47, 1, 86, 47, 0, 142, 12]
    assert m.total == 445


def test_sd_matrix(analysis):
    m = analysis.sd_matrix
    assert m.total == 208
    assert m.row_sum("P1") == 68
    assert m.col_sum("T") == 45


# 6. Tag distribution -------------------------------------------------------

def test_tag_distribution(analysis):
    c1, c2 = analysis.distribution_a, analysis.distribution_b
    assert (c1.total_tags, c2.total_tags) == (1177, 1121)
    assert (c1.code_counts["T"], c2.code_counts["T"]) == (97, 235)
    assert (c1.code_counts["P5"], c2.code_counts["P5"]) == (139, 128)
    assert (c1.code_counts["N"], c2.code_counts["N"]) == (35, 59)
    pct1 = round(100 * c1.actionable_items / c1.item_count)
    pct2 = round(100 * c2.actionable_items / c2.item_count)
    assert abs(pct1 - 32) <= 1
    assert abs(pct2 - 33) <= 1


# 7. Ordered pairing --------------------------------------------------------

def test_pairing_counts(analysis):
    sd = analysis.summary.by_type[SD].pairings
    dd = analysis.summary.by_type[DD].pairings
    assert sd.get(FIRST_FIRST) == 78
    assert sd.get(FIRST_SECOND) == 52
    assert sd.get(SECOND_SECOND, 0) == 0
    assert (dd.get(FIRST_FIRST), dd.get(FIRST_SECOND), dd.get(SECOND_SECOND)) \
        == (5, 7, 5)


# 8. Double-double listing --------------------------------------------------

DD_EXPECTED = {
    24: (("P5", "P4"), ("P2", "P1")),
    67: (("T", "P5"), ("P1", "P4")),
    130: (("P4", "P1"), ("T", "P1")),
    165: (("P4", "P1"), ("P5", "P4")),
    292: (("P4", "P5"), ("P1", "P4")),
    317: (("P4", "P1"), ("P1", "P4")),
    324: (("P4", "P5"), ("P4", "P1")),
    404: (("P4", "P5"), ("P5", "P4")),
    465: (("N", "M1"), ("N", "M1")),
    519: (("P2", "P1"), ("T", "P2")),
    534: (("P5", "P4"), ("P1", "P4")),
    543: (("P2", "P1"), ("P2", "T")),
    551: (("P1", "P4"), ("P4", "P1")),
    680: (("P1", "P4"), ("P5", "P4")),
    686: (("P1", "P4"), ("P5", "P4")),
    691: (("P4", "P1"), ("P1", "P4")),
    734: (("P5", "P4"), ("P1", "P4")),
    787: (("P4", "P1"), ("P4", "P1")),
    801: (("P1", "P4"), ("P1", "P4")),
}


def test_dd_listing(analysis):
    listed = {d.item_index: (d.coder_a_codes, d.coder_b_codes)
              for d in analysis.dd_items}
    assert listed == DD_EXPECTED


# 9. Unfocused breakdown ----------------------------------------------------

def test_unfocused_breakdown(analysis):
    u = analysis.unfocused
    assert (u.ss.both, u.ss.one, u.ss.neither) == (30, 13, 53)
    assert (u.sd.both, u.sd.one, u.sd.neither) == (2, 3, 5)
    assert (u.ss.both + u.sd.both, u.ss.one + u.sd.one,
            u.ss.neither + u.sd.neither) == (32, 16, 58)
    assert u.total == 106


# 10. Per-category table ----------------------------------------------------

def test_category_table(analysis):
    by_cat = {c.category: c for c in analysis.categories.columns}
    uk10 = by_cat["UK-10"]
    m1_a, m1_b = uk10.code_pct["M1"]
    t_a, t_b = uk10.code_pct["T"]
    assert abs(m1_a - 49) <= 1 and abs(m1_b - 29) <= 1
    assert abs(t_a - 10) <= 1 and abs(t_b - 28) <= 1
    assert abs(by_cat["UK-9"].actionability_delta - 23) <= 1


# 11. Dataset-independent properties ----------------------------------------

def _single(tree: CodingTree, code: str, index: int = 1,
            coder: str = "X") -> TagRecord:
    return make_record(tree, index, coder, [code])


def _oracle_divergence(tree: CodingTree, code_a: str, code_b: str) -> str:
    """Walk both root-to-leaf paths in lockstep; return the split node."""
    seq_a = tree.tag_to_sequence(code_a)
    seq_b = tree.tag_to_sequence(code_b)
    last = None
    for qa, aa, qb, ab in zip(seq_a.nodes, seq_a.answers,
                              seq_b.nodes, seq_b.answers):
        assert qa == qb
        last = qa
        if aa != ab:
            return last
    return last  # one path is a strict prefix of the other


def test_divergence_oracle_default_tree(tree):
    for a in tree.leaf_codes():
        for b in tree.leaf_codes():
            if tree.codes_equal(a, b):
                continue
            got = diverging_question(_single(tree, a), _single(tree, b), tree)
            assert got == _oracle_divergence(tree, a, b), (a, b)


def _random_tree_doc(rng: random.Random) -> dict:
    """A random shape with 4 questions and 5 leaves."""
    questions = {}
    leaves = iter(f"L{i}" for i in range(5))
    ids = ["R1", "R2", "R3", "R4"]
    pending = ["R2", "R3", "R4"]
    slots = []  # (question, answer) pairs still needing a child
    for qid in ids:
        questions[qid] = {"text": f"question {qid}?", "yes": None, "no": None}
        slots += [(qid, "yes"), (qid, "no")]
    # attach the remaining questions under random earlier slots
    for child in pending:
        candidates = [s for s in slots
                      if questions[s[0]][s[1]] is None and s[0] < child]
        qid, answer = rng.choice(candidates)
        questions[qid][answer] = f"Q:{child}"
    for qid, answer in slots:
        if questions[qid][answer] is None:
            questions[qid][answer] = f"C:{next(leaves)}"
    return {
        "root": "Q:R1",
        "questions": questions,
        "codes": {f"L{i}": {"name": f"leaf {i}", "actionable": i % 2 == 0}
                  for i in range(5)},
    }


def test_divergence_oracle_random_trees():
    rng = random.Random(7)
    for _ in range(100):
        tree = load_tree(_random_tree_doc(rng))
        leaves = sorted(tree.leaf_codes())
        for a in leaves:
            for b in leaves:
                if a == b:
                    continue
                got = diverging_question(_single(tree, a),
                                         _single(tree, b), tree)
                assert got == _oracle_divergence(tree, a, b)


def test_tally_conservation(analysis):
    tally = analysis.q_tally
    for ctype, expected in ((SS, 445), (SD, 104)):
        assert sum(tally.cell(q, ctype).q_nonagreements
                   for q in tally.questions()) == expected


def test_matrix_conservation(analysis):
    nonagreeing = {SS: 0, SD: 0}
    for comparison in analysis.comparisons:
        if comparison.type in nonagreeing and not comparison.t_agreement:
            nonagreeing[comparison.type] += 1
    # one SS nonagreement yields one code pair; one SD nonagreement yields two
    assert analysis.ss_matrix.total == nonagreeing[SS]
    assert analysis.sd_matrix.total == 2 * nonagreeing[SD]


def test_matrix_transpose_symmetry(tree, dataset, recordsets):
    flipped = analyze(recordsets["C2"], recordsets["C1"], dataset, tree)
    forward = analyze(recordsets["C1"], recordsets["C2"], dataset, tree)
    for ctype in (SS, SD):
        m_ab = forward.ss_matrix if ctype == SS else forward.sd_matrix
        m_ba = flipped.ss_matrix if ctype == SS else flipped.sd_matrix
        for r in m_ab.codes:
            for c in m_ab.codes:
                assert m_ab.at(r, c) == m_ba.at(c, r)


def test_agreement_implies_actionability_agreement(analysis):
    for comparison in analysis.comparisons:
        if comparison.t_agreement:
            assert comparison.actionability_agreement, comparison.item_index


def test_sequence_replay(tree):
    for code in tree.leaf_codes():
        seq = tree.tag_to_sequence(code)
        at = tree.root
        for node, answer in zip(seq.nodes, seq.answers):
            assert node == at
            at = tree.step(at, answer)
        assert at == code


def test_duplicate_code_record_unconstructible(tree):
    with pytest.raises(ValueError):
        make_record(tree, 1, "X", ["P4", "P4"])
    with pytest.raises(ValueError):
        make_record(tree, 1, "X", ["N1", "N2"])  # merge to the same code


# Runtime budget ------------------------------------------------------------

def test_analysis_runtime(tree, dataset, recordsets):
    start = time.perf_counter()
    analyze(recordsets["C1"], recordsets["C2"], dataset, tree)
    assert time.perf_counter() - start < 5.0
