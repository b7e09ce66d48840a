"""Randomized invariants over the engine, independent of any dataset."""

import pytest
from hypothesis import given, settings, strategies as st

from codingtree.agreement import (
    DD,
    SD,
    SS,
    analyze,
    classify_comparison,
    compare_item,
    diverging_question,
    q_tally,
    t_agreement,
    tag_vs_tag,
)
from codingtree.records import AdviceItem, CoderRecordSet, make_record
from codingtree.tree import load_default_tree

TREE = load_default_tree()
LEAVES = sorted(TREE.leaf_codes())

codes_strategy = st.lists(st.sampled_from(LEAVES), min_size=1, max_size=2,
                          unique=True)
rows_strategy = st.lists(st.tuples(codes_strategy, codes_strategy),
                         min_size=1, max_size=30)


def _sets(rows):
    set_a = CoderRecordSet(coder_id="A")
    set_b = CoderRecordSet(coder_id="B")
    for index, (codes_a, codes_b) in enumerate(rows, start=1):
        set_a.add(make_record(TREE, index, "A", list(codes_a)))
        set_b.add(make_record(TREE, index, "B", list(codes_b)))
    return set_a, set_b


@settings(max_examples=150, deadline=None)
@given(rows_strategy)
def test_tally_conservation(rows):
    """Each SS/SD nonagreement contributes exactly one Q-nonagreement."""
    set_a, set_b = _sets(rows)
    tally = q_tally(set_a, set_b, TREE)
    expected = {SS: 0, SD: 0}
    for index in set_a.records:
        result = compare_item(set_a[index], set_b[index], TREE)
        if result.type in expected and not result.t_agreement:
            expected[result.type] += 1
    for ctype in (SS, SD):
        assert tally.total_nonagreements(ctype) == expected[ctype]


@settings(max_examples=150, deadline=None)
@given(rows_strategy)
def test_matrix_conservation(rows):
    """SS nonagreements yield 1 matrix cell each; SD yield 2."""
    set_a, set_b = _sets(rows)
    counts = {SS: 0, SD: 0}
    for index in set_a.records:
        result = compare_item(set_a[index], set_b[index], TREE)
        if result.type in counts and not result.t_agreement:
            counts[result.type] += 1
    assert tag_vs_tag(set_a, set_b, TREE, SS).total == counts[SS]
    assert tag_vs_tag(set_a, set_b, TREE, SD).total == 2 * counts[SD]


@settings(max_examples=100, deadline=None)
@given(rows_strategy)
def test_matrix_transpose_symmetry(rows):
    set_a, set_b = _sets(rows)
    for ctype in (SS, SD):
        forward = tag_vs_tag(set_a, set_b, TREE, ctype)
        backward = tag_vs_tag(set_b, set_a, TREE, ctype)
        for r in forward.codes:
            for c in forward.codes:
                assert forward.at(r, c) == backward.at(c, r)


@settings(max_examples=150, deadline=None)
@given(codes_strategy, codes_strategy)
def test_agreement_implies_actionability_agreement(codes_a, codes_b):
    rec_a = make_record(TREE, 1, "A", list(codes_a))
    rec_b = make_record(TREE, 1, "B", list(codes_b))
    result = compare_item(rec_a, rec_b, TREE)
    if result.t_agreement:
        assert result.actionability_agreement


@settings(max_examples=150, deadline=None)
@given(codes_strategy, codes_strategy)
def test_t_agreement_is_symmetric(codes_a, codes_b):
    rec_a = make_record(TREE, 1, "A", list(codes_a))
    rec_b = make_record(TREE, 1, "B", list(codes_b))
    assert t_agreement(rec_a, rec_b, TREE)[0] == t_agreement(rec_b, rec_a, TREE)[0]
    assert (classify_comparison(rec_a, rec_b)
            == classify_comparison(rec_b, rec_a))


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(LEAVES), st.sampled_from(LEAVES))
def test_divergence_symmetric_and_on_both_paths(code_a, code_b):
    if TREE.codes_equal(code_a, code_b):
        return
    rec_a = make_record(TREE, 1, "A", [code_a])
    rec_b = make_record(TREE, 1, "B", [code_b])
    node = diverging_question(rec_a, rec_b, TREE)
    assert node == diverging_question(rec_b, rec_a, TREE)
    assert node in TREE.tag_to_sequence(code_a).nodes
    assert node in TREE.tag_to_sequence(code_b).nodes


@settings(max_examples=60, deadline=None)
@given(rows_strategy)
def test_analysis_partition_is_total(rows):
    set_a, set_b = _sets(rows)
    dataset = [AdviceItem(index=i, text=f"item {i}") for i in set_a.records]
    result = analyze(set_a, set_b, dataset, TREE)
    by_type = result.summary.by_type
    assert sum(ts.items for ts in by_type.values()) == len(rows)
    assert result.summary.item_count == len(rows)
    for ctype in (SS, SD, DD):
        assert 0 <= by_type[ctype].t_agreements <= by_type[ctype].items
        assert by_type[ctype].t_agreements \
            <= by_type[ctype].actionability_agreements


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(LEAVES))
def test_sequence_replay(code):
    seq = TREE.tag_to_sequence(code)
    at = TREE.root
    for node, answer in zip(seq.nodes, seq.answers):
        assert node == at
        at = TREE.step(at, answer)
    assert at == code


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(LEAVES))
def test_duplicate_codes_unconstructible(code):
    with pytest.raises(ValueError):
        make_record(TREE, 1, "A", [code, code])
