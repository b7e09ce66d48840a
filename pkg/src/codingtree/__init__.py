"""Coding-tree workbench: coding sessions and two-coder agreement analysis."""

from codingtree.agreement import (
    AgreementAnalyzer,
    AnalysisResult,
    analyze,
    compare_all,
    compare_item,
    summary,
)
from codingtree.ingest import (
    ColumnMapping,
    IngestError,
    parse_codings,
    parse_dataset,
    validate_records,
)
from codingtree.records import AdviceItem, CoderRecordSet, Tag, TagRecord
from codingtree.reporting import ReportBundle, build_bundle, write_report
from codingtree.session import Session, SessionError, start_session
from codingtree.tree import (
    Code,
    CodingTree,
    QuestionNode,
    QuestionSequence,
    TreeConfigError,
    load_builtin_tree,
    load_default_tree,
    load_tree,
    validate_tree,
)

__all__ = [
    "AdviceItem",
    "AgreementAnalyzer",
    "AnalysisResult",
    "Code",
    "CoderRecordSet",
    "CodingTree",
    "ColumnMapping",
    "IngestError",
    "QuestionNode",
    "QuestionSequence",
    "ReportBundle",
    "Session",
    "SessionError",
    "Tag",
    "TagRecord",
    "TreeConfigError",
    "analyze",
    "build_bundle",
    "compare_all",
    "compare_item",
    "load_builtin_tree",
    "load_default_tree",
    "load_tree",
    "parse_codings",
    "parse_dataset",
    "start_session",
    "summary",
    "validate_records",
    "validate_tree",
    "write_report",
]

__version__ = "0.1.0"
