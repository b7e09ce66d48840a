#!/usr/bin/env python3
"""Build the reference two-coder dataset (data/cb1013-dataset-twocoder.csv).

The original study file is not redistributable here, so this script
reconstructs a 1013-item two-coder record set that reproduces the study's
complete published statistics exactly: comparison-type partition, tag
agreements, actionability agreements, both tag-vs-tag nonagreement
matrices cell-for-cell, the full double-double item listing, per-coder tag
distributions, question-level tally totals and shares, ordered pairing
splits, the Unfocused sub-label breakdown, and the pinned category-table
cells.  Item texts are synthetic; every derived statistic is not.

Single-single items are fully determined by the published pair counts.
Double-double items are copied verbatim from the published listing.  The
single-double items are under-determined (the published matrix counts
tag-vs-tag cells, not items), so their decomposition into items is found
with an integer program constrained by every published aggregate, then
frozen via the deterministic solver output.

Run from the repo root:  python3 tools/build_reference_dataset.py
The script asserts all targets before writing anything.
"""

from __future__ import annotations

import csv
import json
import random
import sys
from collections import Counter
from itertools import combinations
from pathlib import Path

import numpy as np
from scipy.optimize import LinearConstraint, milp

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from codingtree.tree import load_default_tree  # noqa: E402

CODES = ["M1", "M2", "N", "P1", "P2", "P3", "P4", "P5", "P6", "T", "T'"]
ACTIONABLE = {"P3", "P4", "P5", "P6"}

# -- published targets -----------------------------------------------------

# SS-type nonagreement pairs: (coder1 code, coder2 code) -> item count.
SS_PAIRS = {
    ("M1", "M2"): 3, ("M1", "N"): 5, ("M1", "P1"): 21, ("M1", "P2"): 19,
    ("M1", "P4"): 33, ("M1", "P5"): 12, ("M1", "T"): 36, ("M1", "T'"): 3,
    ("N", "M1"): 2, ("N", "P1"): 2, ("N", "T"): 7,
    ("P1", "M1"): 11, ("P1", "N"): 12, ("P1", "P2"): 16, ("P1", "P3"): 1,
    ("P1", "P4"): 24, ("P1", "P5"): 9, ("P1", "T"): 61, ("P1", "T'"): 4,
    ("P2", "M1"): 6, ("P2", "M2"): 4, ("P2", "P1"): 3, ("P2", "P4"): 2,
    ("P2", "P5"): 11, ("P2", "T"): 21,
    ("P4", "M1"): 1, ("P4", "N"): 5, ("P4", "P1"): 16, ("P4", "P2"): 1,
    ("P4", "P5"): 11, ("P4", "T"): 13,
    ("P5", "N"): 2, ("P5", "P1"): 7, ("P5", "P2"): 6, ("P5", "P4"): 25,
    ("P5", "T"): 3,
    ("T", "M1"): 4, ("T", "P1"): 6, ("T", "P2"): 5, ("T", "P4"): 2,
    ("T", "P5"): 4, ("T", "T'"): 5,
    ("T'", "T"): 1,
}

# SS-type agreements per code.
SS_AGREEMENTS = {"M1": 96, "N": 18, "P1": 44, "P2": 41, "P4": 45, "P5": 25,
                 "P6": 1, "T": 45}

# SD-type tag-vs-tag nonagreement cells: (coder1 code, coder2 code) -> count.
# Each SD nonagreement item yields two cells (one per tag of the 2-tag coder).
SD_CELLS = {
    ("M1", "P1"): 9, ("M1", "P2"): 2, ("M1", "P4"): 15, ("M1", "P5"): 4,
    ("M1", "T"): 1,
    ("N", "P1"): 2, ("N", "P2"): 1, ("N", "P4"): 1, ("N", "T"): 1,
    ("P1", "M1"): 3, ("P1", "N"): 6, ("P1", "P2"): 10, ("P1", "P3"): 2,
    ("P1", "P4"): 7, ("P1", "P5"): 17, ("P1", "P6"): 1, ("P1", "T"): 17,
    ("P1", "T'"): 5,
    ("P2", "M1"): 2, ("P2", "M2"): 2, ("P2", "P1"): 2, ("P2", "P5"): 2,
    ("P2", "T"): 4,
    ("P4", "M1"): 3, ("P4", "N"): 4, ("P4", "P1"): 7, ("P4", "P2"): 8,
    ("P4", "P3"): 1, ("P4", "P5"): 11, ("P4", "T"): 12, ("P4", "T'"): 2,
    ("P5", "M1"): 1, ("P5", "N"): 3, ("P5", "P1"): 7, ("P5", "P2"): 3,
    ("P5", "P4"): 5, ("P5", "T"): 10,
    ("P6", "P4"): 1,
    ("T", "M1"): 1, ("T", "N"): 1, ("T", "P1"): 3, ("T", "P4"): 4,
    ("T", "P5"): 3, ("T", "T'"): 2,
}

# SD agreements by agreed code (fixed part); P1/P4/P5 are solved for.
SD_AGREEMENT_FIXED = {"M1": 10, "T": 13, "P2": 10, "N": 2}
SD_AGREEMENT_SOLVED = {"P1": 17, "P4": 50, "P5": 28}  # sum with fixed: 130
SD_AGREEMENTS_TOTAL = 130
SD_FIRST_FIRST = 78  # remaining 52 agreements match on the double coder's 2nd tag

# Tag counts each coder contributes inside SD items (singles + doubles).
SD_C1_TAGS = {"M1": 34, "M2": 0, "N": 5, "P1": 121, "P2": 22, "P3": 0,
              "P4": 107, "P5": 64, "P6": 1, "T": 25, "T'": 0}
SD_C2_TAGS = {"M1": 21, "M2": 2, "N": 16, "P1": 71, "P2": 30, "P3": 2,
              "P4": 77, "P5": 52, "P6": 2, "T": 45, "T'": 5}

SD_C1_DOUBLE_ITEMS = 145  # items where coder 1 gave two tags
SD_C2_DOUBLE_ITEMS = 89

# SD nonagreement diverging-question targets (counts over the 104 items).
SD_DIVERGENCE = {"Q1": 18, "Q3": 24, "Q4": 26, "Q6": 1, "Q9": 1,
                 "Q2": 0, "Q7": 0, "Q10": 0}
SD_ACTIONABILITY_CONSISTENT = 74  # of 104 nonagreement items
SD_NONAGREEMENTS_WITH_C2_T = 27   # items where coder 2 used T and tags diverged

# Double-double items: index -> (c1 first, c1 second, c2 first, c2 second).
DD_ITEMS = {
    24: ("P5", "P4", "P2", "P1"),
    67: ("T", "P5", "P1", "P4"),
    130: ("P4", "P1", "T", "P1"),
    165: ("P4", "P1", "P5", "P4"),
    292: ("P4", "P5", "P1", "P4"),
    317: ("P4", "P1", "P1", "P4"),
    324: ("P4", "P5", "P4", "P1"),
    404: ("P4", "P5", "P5", "P4"),
    465: ("N", "M1", "N", "M1"),
    519: ("P2", "P1", "T", "P2"),
    534: ("P5", "P4", "P1", "P4"),
    543: ("P2", "P1", "P2", "T"),
    551: ("P1", "P4", "P4", "P1"),
    680: ("P1", "P4", "P5", "P4"),
    686: ("P1", "P4", "P5", "P4"),
    691: ("P4", "P1", "P1", "P4"),
    734: ("P5", "P4", "P1", "P4"),
    787: ("P4", "P1", "P4", "P1"),
    801: ("P1", "P4", "P1", "P4"),
}

CATEGORY_SIZES = {
    "UK-1": 81, "UK-2": 63, "UK-3": 145, "UK-4": 84, "UK-5": 165,
    "UK-6": 161, "UK-7": 65, "UK-8": 98, "UK-9": 39, "UK-10": 51,
    "UK-11": 22, "UK-12": 18, "UK-13": 21,
}

# Unfocused flag plan (items where both coders agreed on M1).
UNFOCUSED_SS = {"both": 30, "c1_only": 7, "c2_only": 6, "neither": 53}
UNFOCUSED_SD = {"both": 2, "c1_only": 1, "c2_only": 2, "neither": 5}
UNFOCUSED_TOTAL_C1 = 142
UNFOCUSED_TOTAL_C2 = 51

C1_TOTALS = {"M1": 263, "M2": 0, "N": 35, "P1": 314, "P2": 112, "P3": 0,
             "P4": 214, "P5": 139, "P6": 2, "T": 97, "T'": 1}
C2_TOTALS = {"M1": 142, "M2": 9, "N": 59, "P1": 182, "P2": 121, "P3": 3,
             "P4": 222, "P5": 128, "P6": 3, "T": 235, "T'": 17}


# -- divergence helper -----------------------------------------------------

TREE = load_default_tree()
SEQ = {c: TREE.tag_to_sequence(c) for c in TREE.leaf_codes()}


def pair_divergence(a: str, b: str) -> tuple[str, int]:
    """Last node of the common prefix of two distinct codes' sequences."""
    na, nb = SEQ[a].nodes, SEQ[b].nodes
    k = 0
    while k < min(len(na), len(nb)) and na[k] == nb[k]:
        k += 1
    return na[k - 1], k


def sd_divergence(single: str, double: tuple[str, str]) -> str | None:
    """Diverging question via the longest-overlap rule; None on a tied-node
    anomaly (different nodes at equal overlap length)."""
    (qa, la) = pair_divergence(single, double[0])
    (qb, lb) = pair_divergence(single, double[1])
    if la == lb and qa != qb:
        return None
    return qa if la >= lb else qb


def actionability_consistent(single: str, double: tuple[str, str]) -> bool:
    s = single in ACTIONABLE
    return s == (double[0] in ACTIONABLE) or s == (double[1] in ACTIONABLE)


# -- SD nonagreement decomposition (integer program) -----------------------

def solve_sd_nonagreements() -> list[tuple[str, str, tuple[str, str]]]:
    """Return 104 items as (orientation, single, (double_a, double_b)).

    Orientation 'C1S' means coder 1 gave the single tag; 'C2S' means
    coder 2 did.  Cell consumption must equal SD_CELLS exactly.
    """
    variables = []  # (orient, s, (a, b))
    for s in CODES:
        for a, b in combinations([c for c in CODES if c != s], 2):
            if sd_divergence(s, (a, b)) is None:
                continue  # keep the data free of tied-overlap anomalies
            if SD_CELLS.get((s, a), 0) and SD_CELLS.get((s, b), 0):
                variables.append(("C1S", s, (a, b)))
            if SD_CELLS.get((a, s), 0) and SD_CELLS.get((b, s), 0):
                variables.append(("C2S", s, (a, b)))

    nvars = len(variables)
    cons = []

    def add_eq(coeffs: dict[int, float], value: float):
        row = np.zeros(nvars)
        for i, v in coeffs.items():
            row[i] = v
        cons.append(LinearConstraint(row, value, value))

    def add_le(coeffs: dict[int, float], value: float):
        row = np.zeros(nvars)
        for i, v in coeffs.items():
            row[i] = v
        cons.append(LinearConstraint(row, -np.inf, value))

    # Exact cell consumption.
    for cell, count in SD_CELLS.items():
        coeffs: dict[int, float] = {}
        for i, (orient, s, (a, b)) in enumerate(variables):
            hits = 0
            if orient == "C1S":
                hits = (cell == (s, a)) + (cell == (s, b))
            else:
                hits = (cell == (a, s)) + (cell == (b, s))
            if hits:
                coeffs[i] = hits
        add_eq(coeffs, count)

    # Diverging-question totals.
    for q, target in SD_DIVERGENCE.items():
        coeffs = {i: 1 for i, (_, s, d) in enumerate(variables)
                  if sd_divergence(s, d) == q}
        add_eq(coeffs, target)

    # Actionability-consistent item count.
    add_eq({i: 1 for i, (_, s, d) in enumerate(variables)
            if actionability_consistent(s, d)}, SD_ACTIONABILITY_CONSISTENT)

    # Per-coder actionable-item counts among the nonagreements, ranged so
    # that (with the agreement assembly below) the dataset-wide actionable
    # proportions round to 32% and 33%.
    def add_range(coeffs: dict[int, float], lo: float, hi: float):
        row = np.zeros(nvars)
        for i, v in coeffs.items():
            row[i] = v
        cons.append(LinearConstraint(row, lo, hi))

    add_range({i: 1 for i, (o, s, d) in enumerate(variables)
               if (s in ACTIONABLE if o == "C1S"
                   else any(c in ACTIONABLE for c in d))}, 42, 69)
    add_range({i: 1 for i, (o, s, d) in enumerate(variables)
               if (s in ACTIONABLE if o == "C2S"
                   else any(c in ACTIONABLE for c in d))}, 29, 42)

    # Items where coder 2 used tag T and tags diverged.
    coeffs = {}
    for i, (orient, s, d) in enumerate(variables):
        uses_t = (s == "T") if orient == "C2S" else ("T" in d)
        if uses_t:
            coeffs[i] = 1
    add_eq(coeffs, SD_NONAGREEMENTS_WITH_C2_T)

    # Per-code tag budgets: nonagreement usage plus the agreement usage
    # must fit the coder's SD tag totals.  Agreement usage of code c is at
    # least the agreed-code count g_c (it appears on both sides) and the
    # slack is absorbed by the double coder's extra tags, so the binding
    # constraint is usage <= total - g_c.
    g_fixed = dict.fromkeys(CODES, 0)
    g_fixed.update(SD_AGREEMENT_FIXED)
    g_fixed.update(SD_AGREEMENT_SOLVED)

    def usage_c1(code):
        out = {}
        for i, (orient, s, d) in enumerate(variables):
            n = (s == code) if orient == "C1S" else (d[0] == code) + (d[1] == code)
            if n:
                out[i] = n
        return out

    def usage_c2(code):
        out = {}
        for i, (orient, s, d) in enumerate(variables):
            n = (s == code) if orient == "C2S" else (d[0] == code) + (d[1] == code)
            if n:
                out[i] = n
        return out

    for code in CODES:
        add_le(usage_c1(code), SD_C1_TAGS[code] - g_fixed[code])
        add_le(usage_c2(code), SD_C2_TAGS[code] - g_fixed[code])

    # Orientation structure: 104 items total; coder-1-double nonagreements
    # cannot exceed the coder-1-double item budget (the rest are
    # agreements), and likewise for coder 2.
    add_eq({i: 1 for i in range(nvars)}, 104)
    add_le({i: 1 for i, (o, _, _) in enumerate(variables) if o == "C2S"},
           SD_C1_DOUBLE_ITEMS)
    add_le({i: 1 for i, (o, _, _) in enumerate(variables) if o == "C1S"},
           SD_C2_DOUBLE_ITEMS)

    res = milp(c=np.zeros(nvars), constraints=cons,
               integrality=np.ones(nvars))
    if res.status != 0:
        raise RuntimeError(f"SD decomposition infeasible: {res.message}")
    counts = [int(round(x)) for x in res.x]
    items = []
    for i, n in enumerate(counts):
        items.extend([variables[i]] * n)
    assert len(items) == 104
    return items


# -- assembly --------------------------------------------------------------

def build_rows() -> list[dict]:
    rng = random.Random(20230518)

    sd_non = solve_sd_nonagreements()

    # Verify cell consumption.
    cells = Counter()
    for orient, s, (a, b) in sd_non:
        if orient == "C1S":
            cells[(s, a)] += 1
            cells[(s, b)] += 1
        else:
            cells[(a, s)] += 1
            cells[(b, s)] += 1
    assert cells == Counter(SD_CELLS), "SD cells mismatch"

    # Work out agreed-code counts for P1/P4/P5 from leftover tag budgets.
    g = dict.fromkeys(CODES, 0)
    g.update(SD_AGREEMENT_FIXED)
    use_c1 = Counter()
    use_c2 = Counter()
    d1 = d2 = 0  # coder-1-double / coder-2-double nonagreement items
    for orient, s, d in sd_non:
        if orient == "C1S":
            d2 += 1
            use_c1[s] += 1
            use_c2[d[0]] += 1
            use_c2[d[1]] += 1
        else:
            d1 += 1
            use_c2[s] += 1
            use_c1[d[0]] += 1
            use_c1[d[1]] += 1

    g.update(SD_AGREEMENT_SOLVED)
    assert sum(g.values()) == SD_AGREEMENTS_TOTAL

    # Extra (second) tags of the double coder in agreement items.
    o_c1 = {c: SD_C1_TAGS[c] - g[c] - use_c1[c] for c in CODES}  # coder1 doubles
    o_c2 = {c: SD_C2_TAGS[c] - g[c] - use_c2[c] for c in CODES}  # coder2 doubles
    assert all(v >= 0 for v in o_c1.values()), o_c1
    assert all(v >= 0 for v in o_c2.values()), o_c2
    n_s2 = SD_C1_DOUBLE_ITEMS - d1  # agreements where coder 1 doubled
    n_s1 = SD_C2_DOUBLE_ITEMS - d2
    assert sum(o_c1.values()) == n_s2
    assert sum(o_c2.values()) == n_s1
    assert n_s1 + n_s2 == SD_AGREEMENTS_TOTAL

    # Assemble the 130 agreement items: each pairs an agreed code with one
    # extra tag from the double coder.  Solved as a small integer program
    # so the agreement-side actionable item counts land the dataset-wide
    # proportions on 32%/33%: exactly enough coder-1-double items add an
    # actionable extra over a non-actionable agreed code to reach 324
    # coder-1 actionable items, and no coder-2-double item does.
    nonagr_act1 = sum(
        1 for orient, s, d in sd_non
        if (s in ACTIONABLE if orient == "C1S"
            else any(c in ACTIONABLE for c in d)))
    extra_act1 = 324 - 177 - 78 - nonagr_act1  # 177 = SS + DD actionable items
    assert 0 <= extra_act1 <= sum(o_c1[c] for c in ACTIONABLE)
    avars = []  # (orientation, agreed code, extra code)
    for orient, o_pool in (("S1", o_c2), ("S2", o_c1)):
        for gc in CODES:
            if not g[gc]:
                continue
            for oc in CODES:
                if oc != gc and o_pool[oc]:
                    avars.append((orient, gc, oc))
    acons = []

    def a_eq(pred, value):
        row = np.zeros(len(avars))
        for i, v in enumerate(avars):
            if pred(v):
                row[i] = 1
        acons.append(LinearConstraint(row, value, value))

    for code in CODES:
        if g[code]:
            a_eq(lambda v, c=code: v[1] == c, g[code])
        if o_c2[code]:
            a_eq(lambda v, c=code: v[0] == "S1" and v[2] == c, o_c2[code])
        if o_c1[code]:
            a_eq(lambda v, c=code: v[0] == "S2" and v[2] == c, o_c1[code])
    a_eq(lambda v: v[0] == "S2" and v[1] not in ACTIONABLE
         and v[2] in ACTIONABLE, extra_act1)
    a_eq(lambda v: v[0] == "S1" and v[1] not in ACTIONABLE
         and v[2] in ACTIONABLE, 0)
    ares = milp(c=np.zeros(len(avars)), constraints=acons,
                integrality=np.ones(len(avars)))
    if ares.status != 0:
        raise RuntimeError(f"agreement assembly infeasible: {ares.message}")
    s1_pairs, s2_pairs = [], []
    for v, n in zip(avars, (int(round(x)) for x in ares.x)):
        (s1_pairs if v[0] == "S1" else s2_pairs).extend([(v[1], v[2])] * n)
    assert len(s1_pairs) == n_s1 and len(s2_pairs) == n_s2

    # Assemble item records: (c1 tags, c2 tags, kind).
    items: list[dict] = []

    def add(c1, c2, kind):
        items.append({"c1": list(c1), "c2": list(c2), "kind": kind})

    for code, n in SS_AGREEMENTS.items():
        for _ in range(n):
            add([code], [code], "ss_agree")
    for (a, b), n in SS_PAIRS.items():
        for _ in range(n):
            add([a], [b], "ss_non")
    for gc, oc in s1_pairs:
        add([gc], [gc, oc], "sd_agree")   # order fixed later (pairing split)
    for gc, oc in s2_pairs:
        add([gc, oc], [gc], "sd_agree")
    for orient, s, (a, b) in sd_non:
        da, db = (a, b) if rng.random() < 0.5 else (b, a)
        if orient == "C1S":
            add([s], [da, db], "sd_non")
        else:
            add([da, db], [s], "sd_non")

    # Ordered pairing: first 78 SD agreements match first-first, the rest
    # put the agreed code second for the double coder.
    sd_agree = [it for it in items if it["kind"] == "sd_agree"]
    rng.shuffle(sd_agree)
    for i, it in enumerate(sd_agree):
        double = it["c1"] if len(it["c1"]) == 2 else it["c2"]
        if i >= SD_FIRST_FIRST:
            double.reverse()  # agreed code moves to second position

    assert len(items) == 760 + 234
    return items, sd_non


def assign_flags_and_categories(items: list[dict], rng: random.Random):
    """Unfocused flags, categories, indices, texts; returns CSV rows."""
    for it in items:
        it["c1_unfocused"] = False
        it["c2_unfocused"] = False

    m1_ss = [it for it in items if it["kind"] == "ss_agree" and it["c1"] == ["M1"]]
    m1_sd = [it for it in items if it["kind"] == "sd_agree"
             and "M1" in it["c1"] and "M1" in it["c2"]]
    assert len(m1_ss) == 96 and len(m1_sd) == 10

    def apply_split(pool, split):
        i = 0
        for _ in range(split["both"]):
            pool[i]["c1_unfocused"] = pool[i]["c2_unfocused"] = True
            i += 1
        for _ in range(split["c1_only"]):
            pool[i]["c1_unfocused"] = True
            i += 1
        for _ in range(split["c2_only"]):
            pool[i]["c2_unfocused"] = True
            i += 1

    apply_split(m1_ss, UNFOCUSED_SS)
    apply_split(m1_sd, UNFOCUSED_SD)

    # Top up coder-level Unfocused totals on nonagreement M1 tags.
    c1_flagged = sum(it["c1_unfocused"] for it in items)
    c2_flagged = sum(it["c2_unfocused"] for it in items)
    def is_m1_agreement(it):
        return "M1" in it["c1"] and "M1" in it["c2"]

    for it in items:
        if c1_flagged >= UNFOCUSED_TOTAL_C1:
            break
        if "M1" in it["c1"] and not it["c1_unfocused"] and not is_m1_agreement(it):
            it["c1_unfocused"] = True
            c1_flagged += 1
    for it in items:
        if c2_flagged >= UNFOCUSED_TOTAL_C2:
            break
        if "M1" in it["c2"] and not it["c2_unfocused"] and not is_m1_agreement(it):
            it["c2_unfocused"] = True
            c2_flagged += 1
    assert c1_flagged == UNFOCUSED_TOTAL_C1 and c2_flagged == UNFOCUSED_TOTAL_C2

    # Category assignment.  Two categories carry pinned cells; everything
    # else is filled to size.
    for it in items:
        it["category"] = None

    def take(pred, n, category):
        got = 0
        for it in items:
            if got == n:
                break
            if it["category"] is None and pred(it):
                it["category"] = category
                got += 1
        assert got == n, f"could not place {n} items in {category}"

    # UK-10: coder1 M1 on 25 items (49%), coder2 M1 on 15 (29%),
    # coder1 T on 5 (10%), coder2 T on 14 (27%).
    take(lambda it: it["c1"] == ["M1"] and it["c2"] == ["M1"], 12, "UK-10")
    take(lambda it: it["c1"] == ["M1"] and it["c2"] == ["T"], 13, "UK-10")
    take(lambda it: it["c1"] == ["P1"] and it["c2"] == ["M1"], 3, "UK-10")
    take(lambda it: it["c1"] == ["P1"] and it["c2"] == ["T"], 1, "UK-10")
    take(lambda it: it["c1"] == ["T"] and it["c2"] == ["P2"], 5, "UK-10")
    take(lambda it: not ({"M1", "T"} & set(it["c1"] + it["c2"])), 17, "UK-10")

    # UK-9: coder1 actionable on 3 items (8%), coder2 on 12 (31%).
    take(lambda it: it["c1"] == ["P4"] and it["c2"] == ["P4"], 3, "UK-9")
    take(lambda it: it["c1"] == ["P1"] and it["c2"] == ["P4"], 9, "UK-9")
    take(lambda it: not (set(it["c1"] + it["c2"]) & ACTIONABLE), 27, "UK-9")

    # Fill the remaining categories to size, leaving one slot per
    # fixed-position double-double item (those get categories below).
    remaining = [c for c in CATEGORY_SIZES if c not in ("UK-9", "UK-10")]
    pool = [it for it in items if it["category"] is None]
    rng.shuffle(pool)
    slots = [c for c in remaining for _ in range(CATEGORY_SIZES[c])]
    assert len(slots) == len(pool) + len(DD_ITEMS)
    for it, cat in zip(pool, slots):
        it["category"] = cat

    # Indices: double-double items sit at their published positions.
    dd_rows = []
    for idx, (a, b, c, d) in DD_ITEMS.items():
        dd_rows.append({
            "c1": [a, b], "c2": [c, d], "kind": "dd",
            "c1_unfocused": False, "c2_unfocused": False,
            "category": None, "index": idx,
        })
    free_indices = [i for i in range(1, 1014) if i not in DD_ITEMS]
    rng.shuffle(items)
    assert len(items) == len(free_indices)
    for it, idx in zip(items, free_indices):
        it["index"] = idx
    # Categories for the 19 fixed items come from the leftover pool sizes.
    cat_counts = Counter(it["category"] for it in items)
    for row in dd_rows:
        cat = next(c for c in CATEGORY_SIZES
                   if cat_counts[c] < CATEGORY_SIZES[c])
        row["category"] = cat
        cat_counts[cat] += 1
    all_rows = sorted(items + dd_rows, key=lambda r: r["index"])
    assert Counter(r["category"] for r in all_rows) == Counter(CATEGORY_SIZES)

    templates = [
        "Ensure that {topic} is addressed for deployed devices, including remote interfaces.",
        "Manufacturers should document how {topic} is handled across the product lifecycle.",
        "Where applicable, {topic} must be reviewed, tested and verified before release.",
        "Provide a mechanism so that {topic} can be maintained after sale.",
    ]
    topics = ["credential storage", "software update delivery", "telemetry monitoring",
              "input validation", "attack surface minimisation", "secure communication",
              "personal data protection", "vulnerability disclosure", "outage resilience",
              "data deletion", "installation guidance", "software integrity"]
    for row in all_rows:
        t = templates[row["index"] % len(templates)]
        row["text"] = f"Item {row['index']}: " + t.format(
            topic=topics[row["index"] % len(topics)])
    return all_rows


def verify(rows: list[dict]):
    """Recompute every published aggregate from the rows and assert."""
    assert len(rows) == 1013
    by_type = Counter()
    t_agree = Counter()
    act_agree = Counter()
    c1_tags = Counter()
    c2_tags = Counter()
    for r in rows:
        n1, n2 = len(r["c1"]), len(r["c2"])
        typ = {2: "SS", 3: "SD", 4: "DD"}[n1 + n2]
        by_type[typ] += 1
        c1_tags.update(r["c1"])
        c2_tags.update(r["c2"])
        if any(a == b for a in r["c1"] for b in r["c2"]):
            t_agree[typ] += 1
        # Agreement iff some cross-pair of tags has matching actionability.
        if any((a in ACTIONABLE) == (b in ACTIONABLE)
               for a in r["c1"] for b in r["c2"]):
            act_agree[typ] += 1
    assert by_type == Counter({"SS": 760, "SD": 234, "DD": 19}), by_type
    assert t_agree == Counter({"SS": 315, "SD": 130, "DD": 17}), t_agree
    assert act_agree == Counter({"SS": 608, "SD": 204, "DD": 18}), act_agree
    assert c1_tags == Counter({c: n for c, n in C1_TOTALS.items() if n}), c1_tags
    assert c2_tags == Counter({c: n for c, n in C2_TOTALS.items() if n}), c2_tags

    # Pinned category cells.
    uk10 = [r for r in rows if r["category"] == "UK-10"]
    uk9 = [r for r in rows if r["category"] == "UK-9"]
    assert sum("M1" in r["c1"] for r in uk10) == 25
    assert sum("M1" in r["c2"] for r in uk10) == 15
    assert sum("T" in r["c1"] for r in uk10) == 5
    assert sum("T" in r["c2"] for r in uk10) == 14
    assert sum(any(c in ACTIONABLE for c in r["c1"]) for r in uk9) == 3
    assert sum(any(c in ACTIONABLE for c in r["c2"]) for r in uk9) == 12
    act1 = sum(any(c in ACTIONABLE for c in r["c1"]) for r in rows)
    act2 = sum(any(c in ACTIONABLE for c in r["c2"]) for r in rows)
    assert (act1, act2) == (324, 339), (act1, act2)
    assert round(100 * act1 / 1013) == 32 and round(100 * act2 / 1013) == 33


def main():
    items, _sd = build_rows()
    rng = random.Random(1013)
    rows = assign_flags_and_categories(items, rng)
    verify(rows)

    out_dir = Path(__file__).resolve().parents[1] / "data"
    out_dir.mkdir(exist_ok=True)
    out = out_dir / "cb1013-dataset-twocoder.csv"
    with out.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["item_index", "text", "category", "c1_tag1", "c1_tag2",
                    "c1_unfocused", "c2_tag1", "c2_tag2", "c2_unfocused",
                    "iot_flag"])
        for r in rows:
            w.writerow([
                r["index"], r["text"], r["category"],
                r["c1"][0], r["c1"][1] if len(r["c1"]) == 2 else "",
                "true" if r["c1_unfocused"] else "false",
                r["c2"][0], r["c2"][1] if len(r["c2"]) == 2 else "",
                "true" if r["c2_unfocused"] else "false",
                "false",
            ])
    mapping = {
        "item_index": "item_index", "text": "text", "category": "category",
        "coders": {
            "C1": {"tag1": "c1_tag1", "tag2": "c1_tag2", "unfocused": "c1_unfocused"},
            "C2": {"tag1": "c2_tag1", "tag2": "c2_tag2", "unfocused": "c2_unfocused"},
        },
        "iot_flag": "iot_flag",
    }
    (out_dir / "mapping.json").write_text(json.dumps(mapping, indent=2) + "\n")
    print(f"wrote {out} ({len(rows)} rows)")


if __name__ == "__main__":
    main()
