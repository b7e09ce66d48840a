"""Local HTTP API exposing coding sessions and the agreement analysis.

Sessions live in memory and are persisted to a directory on every
mutation, so a restarted service resumes where coders left off.
Mutations on one session are serialized with a per-session lock;
a mutation that targets a question other than the session's current
cursor is rejected with 409 rather than applied last-writer-wins.
"""

from __future__ import annotations

import io
import threading
import uuid
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Response
from pydantic import BaseModel

from codingtree.agreement import analyze
from codingtree.ingest import ColumnMapping, parse_codings, parse_dataset
from codingtree.records import AdviceItem
from codingtree.reporting import (
    FORMATS,
    build_bundle,
    bundle_to_jsonable,
    render_tables,
)
from codingtree.session import Session, SessionError, start_session
from codingtree.tree import CodingTree


@dataclass
class ServiceConfig:
    tree: CodingTree
    dataset: list[AdviceItem]
    dataset_path: Path | None = None
    mapping: ColumnMapping | None = None
    sessions_dir: Path | None = None


class _SessionStore:
    """Persisted sessions with per-session mutation locks."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.sessions: dict[str, Session] = {}
        self.locks: dict[str, threading.Lock] = {}
        self._registry = threading.Lock()
        if config.sessions_dir is not None:
            config.sessions_dir.mkdir(parents=True, exist_ok=True)
            for path in sorted(config.sessions_dir.glob("*.json")):
                session = Session.load(path, config.tree, config.dataset)
                self.sessions[path.stem] = session
                self.locks[path.stem] = threading.Lock()

    def create(self, coder_id: str) -> str:
        session_id = uuid.uuid4().hex[:12]
        session = start_session(self.config.tree, self.config.dataset, coder_id)
        with self._registry:
            self.sessions[session_id] = session
            self.locks[session_id] = threading.Lock()
        self.persist(session_id)
        return session_id

    def get(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise HTTPException(404, f"no session {session_id!r}")

    def lock(self, session_id: str) -> threading.Lock:
        self.get(session_id)
        return self.locks[session_id]

    def persist(self, session_id: str) -> None:
        if self.config.sessions_dir is not None:
            self.sessions[session_id].save(
                self.config.sessions_dir / f"{session_id}.json")


class CreateSession(BaseModel):
    coder_id: str


class AnswerBody(BaseModel):
    question: str
    answer: str


class SublabelBody(BaseModel):
    tag_position: int
    label: str


class IotBody(BaseModel):
    value: bool


def _session_view(session_id: str, session: Session) -> dict:
    done, total = session.progress()
    next_item = next(
        (i.index for i in sorted(session.dataset, key=lambda x: x.index)
         if session.status(i.index) != "finalized"), None)
    return {
        "session_id": session_id,
        "coder_id": session.coder_id,
        "progress": {"finalized": done, "total": total},
        "next_item": next_item,
        "tree_hash": session.tree.source_hash,
    }


def _export_csv(session: Session) -> str:
    import csv

    records, _ = session.export_records()
    by_index = {r.item_index: r for r in records}
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\r\n")
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
    return out.getvalue()


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="codingtree", version="0.1.0")
    store = _SessionStore(config)

    def mutate(session_id: str, op):
        """Run one serialized mutation; SessionError maps to 409."""
        with store.lock(session_id):
            session = store.get(session_id)
            try:
                result = op(session)
            except SessionError as exc:
                raise HTTPException(409, str(exc))
            except KeyError as exc:
                raise HTTPException(404, str(exc))
            store.persist(session_id)
            return result

    @app.get("/tree")
    def tree_view() -> dict:
        tree = config.tree
        return {
            "root": tree.root,
            "source_hash": tree.source_hash,
            "questions": {
                qid: {"text": q.text, "annotation": q.annotation,
                      "yes": q.child("yes"), "no": q.child("no")}
                for qid, q in sorted(tree.questions.items())
            },
            "codes": {
                cid: {"label": c.display_name, "actionable": c.actionable,
                      "sublabels": sorted(c.sublabels)}
                for cid, c in sorted(tree.codes.items())
            },
        }

    @app.get("/dataset")
    def dataset_view() -> dict:
        return {"items": [
            {"index": i.index, "text": i.text, "category": i.category}
            for i in sorted(config.dataset, key=lambda x: x.index)
        ]}

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSession) -> dict:
        session_id = store.create(body.coder_id)
        return _session_view(session_id, store.get(session_id))

    @app.get("/sessions")
    def list_sessions() -> list[dict]:
        return [_session_view(sid, s) for sid, s in sorted(store.sessions.items())]

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        return _session_view(session_id, store.get(session_id))

    @app.get("/sessions/{session_id}/items/{item_index}")
    def get_item(session_id: str, item_index: int) -> dict:
        session = store.get(session_id)
        try:
            return session.item_view(item_index)
        except (KeyError, StopIteration):
            raise HTTPException(404, f"no item {item_index}")

    @app.post("/sessions/{session_id}/items/{item_index}/answer")
    def answer(session_id: str, item_index: int, body: AnswerBody) -> dict:
        return mutate(session_id,
                      lambda s: s.answer(item_index, body.question, body.answer))

    @app.post("/sessions/{session_id}/items/{item_index}/sublabel")
    def sublabel(session_id: str, item_index: int, body: SublabelBody) -> dict:
        return mutate(
            session_id,
            lambda s: s.set_sublabel(item_index, body.tag_position, body.label))

    @app.post("/sessions/{session_id}/items/{item_index}/iot")
    def set_iot(session_id: str, item_index: int, body: IotBody) -> dict:
        def op(session: Session) -> dict:
            session.set_iot_flag(item_index, body.value)
            return session.item_view(item_index)
        return mutate(session_id, op)

    @app.post("/sessions/{session_id}/items/{item_index}/undo")
    def undo(session_id: str, item_index: int) -> dict:
        return mutate(session_id, lambda s: s.undo(item_index))

    @app.post("/sessions/{session_id}/items/{item_index}/finalize")
    def finalize(session_id: str, item_index: int) -> dict:
        def op(session: Session) -> dict:
            session.finalize_item(item_index)
            return session.item_view(item_index)
        return mutate(session_id, op)

    @app.get("/sessions/{session_id}/export")
    def export(session_id: str) -> Response:
        session = store.get(session_id)
        return Response(content=_export_csv(session), media_type="text/csv")

    def _recordsets():
        if config.dataset_path is None:
            raise HTTPException(409, "service was started without a coded dataset")
        return parse_codings(config.dataset_path, config.tree, config.mapping)

    @app.get("/analyze")
    def analyze_endpoint(
        set_a: str = Query("C1", alias="setA"),
        set_b: str = Query("C2", alias="setB"),
        merge_t_tprime: bool = False,
    ) -> dict:
        sets = _recordsets()
        for name in (set_a, set_b):
            if name not in sets:
                raise HTTPException(404, f"no coder {name!r} in dataset")
        tree = config.tree.with_options(treat_T_Tprime_as_equal=True) \
            if merge_t_tprime else config.tree
        result = analyze(sets[set_a], sets[set_b], config.dataset, tree)
        bundle = build_bundle(result, tree, _analysis_metadata(set_a, set_b))
        return bundle_to_jsonable(bundle)["summary"]

    @app.get("/report")
    def report_endpoint(
        set_a: str = Query("C1", alias="setA"),
        set_b: str = Query("C2", alias="setB"),
        merge_t_tprime: bool = False,
        table: str | None = None,
        fmt: str = Query("md", alias="format"),
    ):
        sets = _recordsets()
        tree = config.tree.with_options(treat_T_Tprime_as_equal=True) \
            if merge_t_tprime else config.tree
        result = analyze(sets[set_a], sets[set_b], config.dataset, tree)
        bundle = build_bundle(result, tree, _analysis_metadata(set_a, set_b))
        if table is None:
            return bundle_to_jsonable(bundle)
        if fmt not in FORMATS:
            raise HTTPException(422, f"format must be one of {FORMATS}")
        docs = render_tables(bundle, fmt)
        if table not in docs:
            raise HTTPException(404, f"no table {table!r}; have {sorted(docs)}")
        media = "text/csv" if fmt == "csv" else "text/plain"
        return Response(content=docs[table], media_type=media)

    def _analysis_metadata(set_a: str, set_b: str) -> dict:
        return {
            "coders": [set_a, set_b],
            "dataset": str(config.dataset_path) if config.dataset_path else None,
        }

    return app


def load_config(tree_path: str | Path | None, dataset_path: str | Path,
                mapping_path: str | Path | None = None,
                sessions_dir: str | Path | None = None) -> ServiceConfig:
    from codingtree.tree import load_default_tree, load_tree

    tree = load_tree(tree_path) if tree_path else load_default_tree()
    mapping = ColumnMapping.from_json(mapping_path) if mapping_path else None
    dataset = parse_dataset(dataset_path, mapping)
    return ServiceConfig(
        tree=tree,
        dataset=dataset,
        dataset_path=Path(dataset_path),
        mapping=mapping,
        sessions_dir=Path(sessions_dir) if sessions_dir else None,
    )


def serve(config: ServiceConfig, host: str = "127.0.0.1", port: int = 8400):
    import uvicorn

    uvicorn.run(create_app(config), host=host, port=port)
