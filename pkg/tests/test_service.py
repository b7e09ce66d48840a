import pytest
from fastapi.testclient import TestClient

from codingtree.service import ServiceConfig, create_app
from tests.conftest import DATASET_CSV


@pytest.fixture
def app_client(tree, dataset, tmp_path):
    config = ServiceConfig(
        tree=tree,
        dataset=dataset,
        dataset_path=DATASET_CSV,
        sessions_dir=tmp_path / "sessions",
    )
    return TestClient(create_app(config)), config


def _new_session(client):
    response = client.post("/sessions", json={"coder_id": "alice"})
    assert response.status_code == 201
    return response.json()["session_id"]


def test_tree_and_dataset_endpoints(app_client):
    client, _ = app_client
    tree_doc = client.get("/tree").json()
    assert tree_doc["root"] == "Q1"
    assert len(tree_doc["questions"]) == 10
    items = client.get("/dataset").json()["items"]
    assert len(items) == 1013
    assert items[0]["index"] == 1


def test_session_lifecycle(app_client):
    client, _ = app_client
    session_id = _new_session(client)
    assert client.get(f"/sessions/{session_id}").json()["progress"] \
        == {"finalized": 0, "total": 1013}
    assert client.get("/sessions").json()[0]["session_id"] == session_id
    assert client.get("/sessions/missing").status_code == 404

    view = client.get(f"/sessions/{session_id}/items/1").json()
    assert view["question"]["id"] == "Q1"
    view = client.post(f"/sessions/{session_id}/items/1/answer",
                       json={"question": "Q1", "answer": "no"}).json()
    assert view["status"] == "coded" and view["codes"] == ["M1"]
    assert client.post(f"/sessions/{session_id}/items/1/sublabel",
                       json={"tag_position": 0, "label": "Unfocused"}) \
        .status_code == 200
    assert client.post(f"/sessions/{session_id}/items/1/finalize") \
        .json()["status"] == "finalized"
    assert client.get(f"/sessions/{session_id}").json()["progress"] \
        == {"finalized": 1, "total": 1013}
    assert client.get(f"/sessions/{session_id}").json()["next_item"] == 2


def test_conflicting_cursor_mutation_rejected(app_client):
    client, _ = app_client
    session_id = _new_session(client)
    client.post(f"/sessions/{session_id}/items/1/answer",
                json={"question": "Q1", "answer": "yes"})
    stale = client.post(f"/sessions/{session_id}/items/1/answer",
                        json={"question": "Q1", "answer": "no"})
    assert stale.status_code == 409
    # the rejected write changed nothing
    view = client.get(f"/sessions/{session_id}/items/1").json()
    assert view["question"]["id"] == "Q2"


def test_undo_endpoint(app_client):
    client, _ = app_client
    session_id = _new_session(client)
    client.post(f"/sessions/{session_id}/items/1/answer",
                json={"question": "Q1", "answer": "yes"})
    view = client.post(f"/sessions/{session_id}/items/1/undo").json()
    assert view["question"]["id"] == "Q1"
    assert client.post(f"/sessions/{session_id}/items/1/undo").status_code == 409


def test_iot_endpoint(app_client):
    client, _ = app_client
    session_id = _new_session(client)
    view = client.post(f"/sessions/{session_id}/items/1/iot",
                       json={"value": True}).json()
    assert view["iot_specific"] is True


def test_export_csv(app_client):
    client, _ = app_client
    session_id = _new_session(client)
    client.post(f"/sessions/{session_id}/items/1/answer",
                json={"question": "Q1", "answer": "no"})
    client.post(f"/sessions/{session_id}/items/1/finalize")
    response = client.get(f"/sessions/{session_id}/export")
    assert response.headers["content-type"].startswith("text/csv")
    lines = response.text.splitlines()
    assert lines[0] == "item_index,text,category,tag1,tag2,unfocused,iot_flag"
    assert lines[1].startswith("1,") and lines[1].endswith(",M1,,false,false")


def test_sessions_survive_restart(app_client, tree, dataset):
    client, config = app_client
    session_id = _new_session(client)
    client.post(f"/sessions/{session_id}/items/1/answer",
                json={"question": "Q1", "answer": "no"})
    client.post(f"/sessions/{session_id}/items/1/finalize")

    reopened = TestClient(create_app(config))
    assert reopened.get(f"/sessions/{session_id}").json()["progress"] \
        == {"finalized": 1, "total": 1013}


def test_analyze_endpoint_matches_engine(app_client, analysis):
    client, _ = app_client
    doc = client.get("/analyze").json()
    expected = analysis.summary
    assert doc["item_count"] == expected.item_count
    assert doc["overall_agreement_pct"] == expected.overall_agreement_pct
    for ctype, ts in expected.by_type.items():
        assert doc["by_type"][ctype]["t_agreements"] == ts.t_agreements
    assert client.get("/analyze", params={"setA": "C9"}).status_code == 404


def test_analyze_merge_option(app_client):
    client, _ = app_client
    merged = client.get("/analyze", params={"merge_t_tprime": "true"}).json()
    assert merged["by_type"]["SS"]["t_agreements"] == 321


def test_report_endpoint(app_client):
    client, _ = app_client
    doc = client.get("/report").json()
    assert doc["matrices"]["SS"]["total"] == 445
    table = client.get("/report", params={"table": "summary", "format": "txt"})
    assert "315 (41% of 760)" in table.text
    assert client.get("/report", params={"table": "nope"}).status_code == 404
    assert client.get("/report", params={"table": "summary",
                                         "format": "pdf"}).status_code == 422
