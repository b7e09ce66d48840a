"""Command-line entry points: validate-tree, ingest, analyze, report, serve."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from codingtree.agreement import analyze
from codingtree.ingest import (
    ColumnMapping,
    IngestError,
    parse_codings,
    parse_dataset,
    validate_records,
    write_canonical_csv,
    write_canonical_json,
)
from codingtree.reporting import (
    FORMATS,
    build_bundle,
    bundle_to_jsonable,
    write_report,
)
from codingtree.tree import (
    TreeConfigError,
    load_default_tree,
    load_tree,
    validate_tree,
)


@click.group()
def main():
    """Coding-tree workbench: run coding sessions and agreement analyses."""


def _load_tree(tree_path: str | None):
    try:
        return load_tree(tree_path) if tree_path else load_default_tree()
    except (TreeConfigError, OSError) as exc:
        raise click.ClickException(f"tree config: {exc}")


def _load_inputs(tree_path, dataset_path, mapping_path, merge_t_tprime=False):
    tree = _load_tree(tree_path)
    if merge_t_tprime:
        tree = tree.with_options(treat_T_Tprime_as_equal=True)
    mapping = ColumnMapping.from_json(mapping_path) if mapping_path else None
    try:
        dataset = parse_dataset(dataset_path, mapping)
        sets = parse_codings(dataset_path, tree, mapping)
    except (IngestError, OSError) as exc:
        raise click.ClickException(str(exc))
    return tree, dataset, sets


_tree_opt = click.option("--tree", "tree_path", type=click.Path(exists=True),
                         default=None, help="Tree config JSON (default: built-in).")
_dataset_opt = click.option("--dataset", "dataset_path",
                            type=click.Path(exists=True), required=True,
                            help="Two-coder wide CSV or JSON file.")
_mapping_opt = click.option("--mapping", "mapping_path",
                            type=click.Path(exists=True), default=None,
                            help="Column-mapping JSON (default: canonical names).")
_merge_opt = click.option("--merge-t-tprime", is_flag=True, default=False,
                          help="Treat T and T' as one code in comparisons.")


@main.command("validate-tree")
@click.argument("tree_file", type=click.Path(exists=True))
def validate_tree_cmd(tree_file: str):
    """Check a tree config; exit nonzero if any invariant fails."""
    import codingtree.tree as tree_mod

    raw = Path(tree_file).read_bytes()
    try:
        doc = json.loads(raw)
        tree = tree_mod._build(doc, "")
    except (json.JSONDecodeError, TreeConfigError) as exc:
        raise click.ClickException(f"cannot parse tree: {exc}")
    findings = validate_tree(tree)
    for finding in findings:
        click.echo(f"{finding.kind}: {finding.message}")
    if findings:
        sys.exit(1)
    click.echo(f"ok: {len(tree.questions)} questions, "
               f"{len(tree.leaf_codes())} leaf codes")


@main.command("ingest")
@_tree_opt
@_dataset_opt
@_mapping_opt
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Re-export the canonical layout (.csv or .json).")
def ingest_cmd(tree_path, dataset_path, mapping_path, out_path):
    """Parse and validate a dataset; optionally re-export it canonically."""
    tree, dataset, sets = _load_inputs(tree_path, dataset_path, mapping_path)
    findings = validate_records(sets, dataset, tree)
    for finding in findings:
        click.echo(f"{finding.kind}: {finding.message}")
    if findings:
        raise click.ClickException(f"{len(findings)} validation finding(s)")
    click.echo(f"ok: {len(dataset)} items, coders {sorted(sets)}")
    if out_path:
        if out_path.endswith(".json"):
            write_canonical_json(out_path, dataset, sets)
        else:
            write_canonical_csv(out_path, dataset, sets)
        click.echo(f"wrote {out_path}")


@main.command("analyze")
@_tree_opt
@_dataset_opt
@_mapping_opt
@_merge_opt
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Also write the full report bundle here.")
def analyze_cmd(tree_path, dataset_path, mapping_path, merge_t_tprime, out_dir):
    """Run the two-coder agreement analysis and print the summary."""
    tree, dataset, sets = _load_inputs(tree_path, dataset_path, mapping_path,
                                       merge_t_tprime)
    coders = sorted(sets)
    if len(coders) != 2:
        raise click.ClickException(f"need exactly two coders, found {coders}")
    result = analyze(sets[coders[0]], sets[coders[1]], dataset, tree)
    bundle = build_bundle(result, tree, {
        "coders": coders, "dataset": str(dataset_path),
        "merge_t_tprime": merge_t_tprime,
    })
    doc = bundle_to_jsonable(bundle)
    click.echo(json.dumps(doc["summary"], indent=2, sort_keys=True))
    if out_dir:
        write_report(bundle, tree, out_dir)
        click.echo(f"wrote report to {out_dir}", err=True)


@main.command("report")
@_tree_opt
@_dataset_opt
@_mapping_opt
@_merge_opt
@click.option("--out", "out_dir", type=click.Path(), default="report",
              help="Output directory (default: report/).")
@click.option("--format", "formats", multiple=True,
              type=click.Choice(FORMATS), help="Table formats (default: all).")
def report_cmd(tree_path, dataset_path, mapping_path, merge_t_tprime,
               out_dir, formats):
    """Write the full report: tables, figures, and bundle.json."""
    tree, dataset, sets = _load_inputs(tree_path, dataset_path, mapping_path,
                                       merge_t_tprime)
    coders = sorted(sets)
    if len(coders) != 2:
        raise click.ClickException(f"need exactly two coders, found {coders}")
    result = analyze(sets[coders[0]], sets[coders[1]], dataset, tree)
    bundle = build_bundle(result, tree, {
        "coders": coders, "dataset": str(dataset_path),
        "merge_t_tprime": merge_t_tprime,
    })
    write_report(bundle, tree, out_dir, formats=tuple(formats) or FORMATS)
    click.echo(f"wrote report to {out_dir}")


@main.command("serve")
@_tree_opt
@_dataset_opt
@_mapping_opt
@click.option("--port", type=int, default=8400, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--sessions-dir", type=click.Path(), default="sessions",
              show_default=True, help="Directory where sessions persist.")
def serve_cmd(tree_path, dataset_path, mapping_path, port, host, sessions_dir):
    """Serve the coding-session and analysis HTTP API."""
    from codingtree.service import load_config, serve

    try:
        config = load_config(tree_path, dataset_path, mapping_path, sessions_dir)
    except (TreeConfigError, IngestError, OSError) as exc:
        raise click.ClickException(str(exc))
    serve(config, host=host, port=port)


if __name__ == "__main__":
    main()
