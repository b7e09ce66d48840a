"""Render analysis results as tables (txt/csv/md) and SVG figures.

Rendering is a pure function of the bundle: identical analysis input
yields byte-identical output.  No statistic is computed here; every
number comes from the agreement engine.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from codingtree.agreement import (
    DD,
    SD,
    SS,
    AnalysisResult,
    FIRST_FIRST,
    FIRST_SECOND,
    SECOND_SECOND,
    pct,
)
from codingtree.tree import CodingTree

FORMATS = ("txt", "csv", "md")

# Grey levels for the 5-band heatmap shading used in matrix figures.
_BANDS = ("#ffffff", "#d9d9d9", "#b3b3b3", "#8c8c8c", "#666666")


def shade_band(value: int, maximum: int) -> int:
    """Bucket a cell into one of five shading bands (0 = empty/zero)."""
    if value <= 0 or maximum <= 0:
        return 0
    share = value / maximum
    for band, ceiling in ((1, 0.25), (2, 0.5), (3, 0.75)):
        if share <= ceiling:
            return band
    return 4


@dataclass
class Table:
    name: str
    title: str
    headers: list[str]
    rows: list[list[str]]
    notes: list[str] = field(default_factory=list)


@dataclass
class ReportBundle:
    metadata: dict
    analysis: AnalysisResult
    tables: list[Table] = field(default_factory=list)


def _dash(n: int) -> str:
    return str(n) if n else "--"


def _of(part: int, whole: int) -> str:
    return f"{part} ({pct(part, whole)}% of {whole})"


def build_bundle(analysis: AnalysisResult, tree: CodingTree,
                 metadata: dict | None = None) -> ReportBundle:
    """Assemble every table layout from an analysis result."""
    meta = {"tree_hash": tree.source_hash}
    meta.update(metadata or {})
    bundle = ReportBundle(metadata=meta, analysis=analysis)
    bundle.tables = [
        _summary_table(analysis),
        _pairing_table(analysis),
        _dd_table(analysis),
        _matrix_table(analysis, SS),
        _matrix_table(analysis, SD),
        _distribution_table(analysis),
        _qtally_table(analysis),
        _category_table(analysis),
        _unfocused_table(analysis),
    ]
    return bundle


def _summary_table(analysis: AnalysisResult) -> Table:
    s = analysis.summary
    rows = []
    for ctype in (SS, SD, DD):
        ts = s.by_type[ctype]
        rows.append([
            ctype,
            f"{ts.items} ({pct(ts.items, s.item_count)}%)",
            _of(ts.t_agreements, ts.items),
            _of(ts.actionability_agreements, ts.items),
        ])
    return Table(
        name="summary",
        title="Items by comparison type, with tag and actionability agreements",
        headers=["Comparison type", "Items", "Tag agreements",
                 "Actionability agreements"],
        rows=rows,
        notes=[f"Overall tag agreement: {s.total_t_agreements} of "
               f"{s.item_count} items ({s.overall_agreement_pct}%)"],
    )


def _pairing_table(analysis: AnalysisResult) -> Table:
    s = analysis.summary
    rows = []
    for ctype in (SS, SD, DD):
        ts = s.by_type[ctype]
        cells = [str(ts.t_agreements)]
        for pairing in (FIRST_FIRST, FIRST_SECOND, SECOND_SECOND):
            n = ts.pairings.get(pairing, 0)
            cells.append(_dash(n) if not n else
                         f"{n} ({pct(n, ts.t_agreements)}%)")
        rows.append([ctype] + cells)
    return Table(
        name="pairing",
        title="Tag agreements by ordered code pairing",
        headers=["Type", "Agreements", "First-First", "First-Second",
                 "Second-Second"],
        rows=rows,
        notes=["First-Second includes Second-First."],
    )


def _dd_table(analysis: AnalysisResult) -> Table:
    items = analysis.dd_items
    if not items:
        return Table(name="dd_items", title="Double-double items",
                     headers=["Item"], rows=[],
                     notes=["no DD items"])
    headers = ["Coder tag"] + [str(d.item_index) for d in items]
    rows = [
        ["A1"] + [d.coder_a_codes[0] for d in items],
        ["A2"] + [d.coder_a_codes[1] for d in items],
        ["B1"] + [d.coder_b_codes[0] for d in items],
        ["B2"] + [d.coder_b_codes[1] for d in items],
    ]
    return Table(
        name="dd_items",
        title="Codes assigned on items where both coders gave two tags",
        headers=headers,
        rows=rows,
    )


def _matrix_table(analysis: AnalysisResult, ctype: str) -> Table:
    matrix = analysis.ss_matrix if ctype == SS else analysis.sd_matrix
    codes = matrix.codes
    rows = []
    for r in codes:
        rows.append([r] + [_dash(matrix.at(r, c)) for c in codes]
                    + [_dash(matrix.row_sum(r))])
    rows.append(["total"] + [_dash(matrix.col_sum(c)) for c in codes]
                + [str(matrix.total)])
    return Table(
        name=f"tag_vs_tag_{ctype.lower()}",
        title=f"Tag-vs-tag nonagreements, {ctype}-type comparisons "
              "(rows: coder 1, columns: coder 2)",
        headers=["", *codes, "total"],
        rows=rows,
        notes=["Dash (--) represents 0."],
    )


def _distribution_table(analysis: AnalysisResult) -> Table:
    da, db = analysis.distribution_a, analysis.distribution_b
    codes = sorted(da.code_counts)
    rows = [[c, _dash(da.code_counts[c]), _dash(db.code_counts[c])]
            for c in codes]
    rows.append(["total tags", str(da.total_tags), str(db.total_tags)])
    rows.append(["actionable items",
                 _of(da.actionable_items, da.item_count),
                 _of(db.actionable_items, db.item_count)])
    return Table(
        name="tag_distribution",
        title="Tag distribution per coder (first and second tags)",
        headers=["Code", da.coder_id, db.coder_id],
        rows=rows,
    )


def _qtally_table(analysis: AnalysisResult) -> Table:
    tally = analysis.q_tally
    rows = []
    for q in tally.questions():
        row = [q]
        for ctype in (SS, SD):
            cell = tally.cell(q, ctype)
            row += [str(cell.visits), str(cell.q_agreements),
                    str(cell.q_nonagreements)]
        rows.append(row)
    rows.append(["total",
                 "", "", str(tally.total_nonagreements(SS)),
                 "", "", str(tally.total_nonagreements(SD))])
    return Table(
        name="q_tally",
        title="Per-question joint visits, Q-agreements and Q-nonagreements",
        headers=["Question", "SS visits", "SS Q-agr", "SS Q-nonagr",
                 "SD visits", "SD Q-agr", "SD Q-nonagr"],
        rows=rows,
        notes=[f"{len(tally.anomalies)} anomalous item(s) excluded."]
        if tally.anomalies else [],
    )


def _category_table(analysis: AnalysisResult) -> Table:
    columns = analysis.categories.columns
    if not columns:
        return Table(name="categories", title="Per-category tag shares",
                     headers=["Code"], rows=[], notes=["no categorized items"])
    codes = sorted(columns[0].code_pct)
    headers = ["Code"] + [f"{c.category} (n={c.size})" for c in columns]
    rows = []
    for code in codes:
        rows.append([code] + [f"{c.code_pct[code][0]}/{c.code_pct[code][1]}"
                              for c in columns])
    rows.append(["actionable"] + [f"{c.actionable_pct[0]}/{c.actionable_pct[1]}"
                                  for c in columns])
    rows.append(["delta"] + [str(c.actionability_delta) for c in columns])
    notes = ["Cells show coder1%/coder2% of items in the category."]
    if analysis.categories.skipped_items:
        notes.append(f"{len(analysis.categories.skipped_items)} item(s) "
                     "without a category excluded.")
    return Table(name="categories", title="Per-category tag shares",
                 headers=headers, rows=rows, notes=notes)


def _unfocused_table(analysis: AnalysisResult) -> Table:
    u = analysis.unfocused
    rows = [
        ["both selected", str(u.ss.both), str(u.sd.both),
         str(u.ss.both + u.sd.both)],
        ["exactly one", str(u.ss.one), str(u.sd.one),
         str(u.ss.one + u.sd.one)],
        ["neither", str(u.ss.neither), str(u.sd.neither),
         str(u.ss.neither + u.sd.neither)],
        ["total", str(u.ss.total), str(u.sd.total), str(u.total)],
    ]
    return Table(
        name="unfocused",
        title="Unfocused sub-label use on items whose agreement code is M1",
        headers=["Bucket", "SS", "SD", "All"],
        rows=rows,
    )


# -- table rendering -------------------------------------------------------

def render_table(table: Table, fmt: str) -> str:
    if fmt == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(table.headers)
        writer.writerows(table.rows)
        return out.getvalue()
    if fmt == "md":
        lines = [f"### {table.title}", ""]
        lines.append("| " + " | ".join(table.headers) + " |")
        lines.append("|" + "|".join(" --- " for _ in table.headers) + "|")
        for row in table.rows:
            lines.append("| " + " | ".join(row) + " |")
        for note in table.notes:
            lines += ["", f"_{note}_"]
        return "\n".join(lines) + "\n"
    if fmt == "txt":
        widths = [max(len(str(cell)) for cell in col)
                  for col in zip(table.headers, *table.rows)] \
            if table.rows else [len(h) for h in table.headers]
        def line(cells):
            return "  ".join(str(c).rjust(w) for c, w in zip(cells, widths)).rstrip()
        lines = [table.title, "=" * len(table.title), line(table.headers),
                 line(["-" * w for w in widths])]
        lines += [line(row) for row in table.rows]
        lines += [""] + table.notes if table.notes else []
        return "\n".join(lines) + "\n"
    raise ValueError(f"unsupported format {fmt!r}; choose from {FORMATS}")


def render_tables(bundle: ReportBundle, fmt: str) -> dict[str, str]:
    """name -> rendered document, for one of txt, csv, md."""
    return {t.name: render_table(t, fmt) for t in bundle.tables}


# -- figures ---------------------------------------------------------------

def _svg(width: int, height: int, parts: list[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}" '
            'font-family="sans-serif" font-size="11">')
    return head + "".join(parts) + "</svg>"


def _bar_chart(title: str, labels: list[str],
               series: list[tuple[str, list[int]]], width: int = 640) -> str:
    """Deterministic grouped bar chart."""
    height = 320
    top, bottom, left = 36, 40, 44
    plot_h = height - top - bottom
    peak = max((max(values) for _, values in series if values), default=0) or 1
    group_w = (width - left - 16) / max(len(labels), 1)
    bar_w = group_w / (len(series) + 1)
    fills = ("#4477aa", "#ee6677", "#228833", "#ccbb44")
    parts = [f'<text x="{left}" y="18" font-size="13">{title}</text>']
    if not labels:
        parts.append(f'<text x="{left}" y="{top + 20}" fill="#aa3333">'
                     "no data</text>")
        return _svg(width, height, parts)
    for gi, label in enumerate(labels):
        x0 = left + gi * group_w
        for si, (_, values) in enumerate(series):
            value = values[gi]
            bar_h = round(plot_h * value / peak, 2)
            x = round(x0 + si * bar_w, 2)
            y = round(top + plot_h - bar_h, 2)
            parts.append(f'<rect x="{x}" y="{y}" width="{round(bar_w * 0.9, 2)}" '
                         f'height="{bar_h}" fill="{fills[si % len(fills)]}"/>')
            if value:
                parts.append(f'<text x="{round(x + bar_w * 0.45, 2)}" '
                             f'y="{round(y - 3, 2)}" text-anchor="middle" '
                             f'font-size="9">{value}</text>')
        parts.append(f'<text x="{round(x0 + group_w / 2, 2)}" '
                     f'y="{height - bottom + 14}" text-anchor="middle">'
                     f"{label}</text>")
    for si, (name, _) in enumerate(series):
        x = left + si * 110
        parts.append(f'<rect x="{x}" y="{height - 18}" width="10" height="10" '
                     f'fill="{fills[si % len(fills)]}"/>')
        parts.append(f'<text x="{x + 14}" y="{height - 9}">{name}</text>')
    return _svg(width, height, parts)


def _matrix_figure(analysis: AnalysisResult, ctype: str) -> str:
    matrix = analysis.ss_matrix if ctype == SS else analysis.sd_matrix
    codes = matrix.codes
    cell = 34
    left, top = 60, 60
    width = left + cell * len(codes) + 20
    height = top + cell * len(codes) + 20
    peak = max(matrix.counts.values(), default=0)
    parts = [f'<text x="8" y="20" font-size="13">Tag-vs-tag nonagreements '
             f'({ctype})</text>']
    for j, c in enumerate(codes):
        parts.append(f'<text x="{left + j * cell + cell // 2}" y="{top - 8}" '
                     f'text-anchor="middle">{c}</text>')
    for i, r in enumerate(codes):
        parts.append(f'<text x="{left - 8}" y="{top + i * cell + cell // 2 + 4}" '
                     f'text-anchor="end">{r}</text>')
        for j, c in enumerate(codes):
            value = matrix.at(r, c)
            band = shade_band(value, peak)
            x, y = left + j * cell, top + i * cell
            parts.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                         f'fill="{_BANDS[band]}" stroke="#999"/>')
            if value:
                color = "#ffffff" if band >= 3 else "#000000"
                parts.append(f'<text x="{x + cell // 2}" y="{y + cell // 2 + 4}" '
                             f'text-anchor="middle" fill="{color}">{value}</text>')
    return _svg(width, height, parts)


def _tree_figure(analysis: AnalysisResult, tree: CodingTree) -> str:
    """The tree with per-question yes/no Q-agreement sums (SS + SD)."""
    tally = analysis.q_tally
    positions: dict[str, tuple[int, int]] = {}

    def walk(node: str, depth: int, lane: float, span: float):
        positions[node] = (int(40 + lane * 150), 50 + depth * 64)
        q = tree.questions[node]
        offset = span / 2
        for answer, sign in (("yes", -1), ("no", 1)):
            ref = q.child(answer)
            child = ref[2:]
            if tree.is_question(child):
                walk(child, depth + 1, lane + sign * offset, span / 2)

    walk(tree.root, 0, 2.6, 2.4)
    parts = ['<text x="8" y="20" font-size="13">Q-agreement sums per '
             'question (yes / no)</text>']
    for node, (x, y) in positions.items():
        q = tree.questions[node]
        for answer in ("yes", "no"):
            ref = q.child(answer)
            child = ref[2:]
            if tree.is_question(child) and child in positions:
                cx, cy = positions[child]
                parts.append(f'<line x1="{x}" y1="{y}" x2="{cx}" y2="{cy}" '
                             'stroke="#bbb"/>')
    for node, (x, y) in sorted(positions.items()):
        yes = sum(tally.cell(node, t).yes_agreements for t in (SS, SD))
        no = sum(tally.cell(node, t).no_agreements for t in (SS, SD))
        parts.append(f'<circle cx="{x}" cy="{y}" r="17" fill="#eef" '
                     'stroke="#447"/>')
        parts.append(f'<text x="{x}" y="{y + 4}" text-anchor="middle">'
                     f"{node}</text>")
        parts.append(f'<text x="{x}" y="{y + 30}" text-anchor="middle" '
                     f'font-size="9">{yes} / {no}</text>')
    width = max(x for x, _ in positions.values()) + 80
    height = max(y for _, y in positions.values()) + 60
    return _svg(width, height, parts)


def render_figures(bundle: ReportBundle, tree: CodingTree) -> dict[str, str]:
    """name -> SVG document."""
    analysis = bundle.analysis
    da, db = analysis.distribution_a, analysis.distribution_b
    codes = sorted(da.code_counts)
    tally = analysis.q_tally
    questions = tally.questions()
    figures = {
        "tag_distribution": _bar_chart(
            "Tag distribution per coder",
            codes,
            [(da.coder_id, [da.code_counts[c] for c in codes]),
             (db.coder_id, [db.code_counts[c] for c in codes])],
        ),
        "q_nonagreements": _bar_chart(
            "Q-nonagreements per question",
            questions,
            [(SS, [tally.nonagreements(q, SS) for q in questions]),
             (SD, [tally.nonagreements(q, SD) for q in questions])],
        ),
        "q_visits": _bar_chart(
            "Joint visits per question",
            questions,
            [(SS, [tally.visits(q, SS) for q in questions]),
             (SD, [tally.visits(q, SD) for q in questions])],
        ),
        "unfocused": _bar_chart(
            "Unfocused sub-label use on M1 agreements",
            ["both", "one", "neither"],
            [(SS, [analysis.unfocused.ss.both, analysis.unfocused.ss.one,
                   analysis.unfocused.ss.neither]),
             (SD, [analysis.unfocused.sd.both, analysis.unfocused.sd.one,
                   analysis.unfocused.sd.neither])],
        ),
        "matrix_ss": _matrix_figure(analysis, SS),
        "matrix_sd": _matrix_figure(analysis, SD),
        "agreement_tree": _tree_figure(analysis, tree),
    }
    return figures


# -- bundle serialization and writing --------------------------------------

def bundle_to_jsonable(bundle: ReportBundle) -> dict:
    analysis = bundle.analysis
    s = analysis.summary
    tally = analysis.q_tally
    return {
        "metadata": bundle.metadata,
        "summary": {
            "item_count": s.item_count,
            "overall_agreement_pct": s.overall_agreement_pct,
            "by_type": {
                ctype: {
                    "items": ts.items,
                    "t_agreements": ts.t_agreements,
                    "actionability_agreements": ts.actionability_agreements,
                    "pairings": ts.pairings,
                }
                for ctype, ts in s.by_type.items()
            },
        },
        "q_tally": {
            q: {
                ctype: {
                    "visits": tally.cell(q, ctype).visits,
                    "q_agreements": tally.cell(q, ctype).q_agreements,
                    "q_nonagreements": tally.cell(q, ctype).q_nonagreements,
                    "yes_agreements": tally.cell(q, ctype).yes_agreements,
                    "no_agreements": tally.cell(q, ctype).no_agreements,
                }
                for ctype in (SS, SD)
            }
            for q in tally.questions()
        },
        "anomalies": list(tally.anomalies),
        "matrices": {
            ctype: {
                "codes": matrix.codes,
                "cells": {f"{r}|{c}": n
                          for (r, c), n in sorted(matrix.counts.items())},
                "total": matrix.total,
            }
            for ctype, matrix in ((SS, analysis.ss_matrix),
                                  (SD, analysis.sd_matrix))
        },
        "distributions": {
            d.coder_id: {
                "code_counts": d.code_counts,
                "total_tags": d.total_tags,
                "second_tags": d.second_tags,
                "actionable_items": d.actionable_items,
                "nonactionable_items": d.nonactionable_items,
            }
            for d in (analysis.distribution_a, analysis.distribution_b)
        },
        "categories": [
            {
                "category": c.category,
                "size": c.size,
                "code_pct": {code: list(v) for code, v in c.code_pct.items()},
                "actionable_pct": list(c.actionable_pct),
                "actionability_delta": c.actionability_delta,
            }
            for c in analysis.categories.columns
        ],
        "unfocused": {
            "SS": vars(analysis.unfocused.ss),
            "SD": vars(analysis.unfocused.sd),
        },
        "dd_items": [
            {"item_index": d.item_index,
             "coder_a": list(d.coder_a_codes),
             "coder_b": list(d.coder_b_codes)}
            for d in analysis.dd_items
        ],
    }


def write_report(bundle: ReportBundle, tree: CodingTree,
                 out_dir: str | Path, formats: tuple[str, ...] = FORMATS) -> Path:
    """Write report/tables/*, report/figures/*.svg, report/bundle.json."""
    out = Path(out_dir)
    tables_dir = out / "tables"
    figures_dir = out / "figures"
    tables_dir.mkdir(parents=True, exist_ok=True)
    figures_dir.mkdir(parents=True, exist_ok=True)
    for fmt in formats:
        for name, doc in render_tables(bundle, fmt).items():
            (tables_dir / f"{name}.{fmt}").write_text(doc, encoding="utf-8")
    for name, svg in render_figures(bundle, tree).items():
        (figures_dir / f"{name}.svg").write_text(svg, encoding="utf-8")
    (out / "bundle.json").write_text(
        json.dumps(bundle_to_jsonable(bundle), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    return out
