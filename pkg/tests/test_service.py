"""HTTP API behavior via an in-process test client."""

from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

import helpers
from ragrisk.catalog import load_workspace
from ragrisk.flows import build_surface_graph, export_dot
from ragrisk.service import create_app, create_app_from_dir

ALL_CONTROL_IDS = [
    "input_validation",
    "adversarial_training",
    "monitoring",
    "data_governance",
    "lifecycle_mlops",
    "incident_response",
    "red_teaming_tools",
    "crispml_phase1",
    "crispml_phase2",
    "crispml_phase3",
    "crispml_phase4",
    "crispml_phase5",
    "crispml_phase6",
]

PRIORITY_ORDER = [
    "adversarial_training",
    "crispml_phase3",
    "data_governance",
    "lifecycle_mlops",
    "crispml_phase2",
    "input_validation",
    "crispml_phase1",
    "monitoring",
    "crispml_phase4",
    "red_teaming_tools",
    "crispml_phase5",
    "crispml_phase6",
    "incident_response",
]


@pytest.fixture(scope="module")
def client(workspace_dir):
    app = create_app_from_dir(workspace_dir)
    with TestClient(app) as c:
        yield c


class TestHealth:
    def test_healthz(self, client):
        response = client.get("/healthz")
        assert response.status_code == 200
        assert response.text == "ok"
        assert response.headers["content-type"].startswith("text/plain")


class TestWorkspaceEndpoint:
    def test_census_and_title(self, client):
        doc = client.get("/api/v1/workspace").json()
        assert doc["title"] == "Enterprise knowledge assistant"
        assert len(doc["model"]["components"]) == 10
        assert len(doc["model"]["data_flows"]) == 13
        assert len(doc["model"]["trust_boundaries"]) == 1
        assert len(doc["threats"]) == 2
        assert [c["id"] for c in doc["controls"]] == ALL_CONTROL_IDS

    def test_crossing_flows(self, client):
        doc = client.get("/api/v1/workspace").json()
        assert doc["model"]["crossing_flows"] == [
            "f_user_query",
            "f_external_content",
        ]

    def test_data_flows_use_from_to(self, client):
        doc = client.get("/api/v1/workspace").json()
        flow = doc["model"]["data_flows"][0]
        assert set(flow) == {"id", "from", "to", "data_kind", "loopback"}

    def test_threat_flow_summaries(self, client):
        doc = client.get("/api/v1/workspace").json()
        by_id = {t["id"]: t for t in doc["threats"]}
        poison = by_id["rag_poisoning"]["flows"][0]
        assert poison == {
            "id": "poison_flow",
            "step_count": 8,
            "actors": ["external", "insider"],
        }

    def test_controls_carry_adjustments(self, client):
        doc = client.get("/api/v1/workspace").json()
        gov = next(c for c in doc["controls"] if c["id"] == "data_governance")
        assert gov["layers"] == ["data_provenance"]
        assert all(adj["delta"] < 0 for adj in gov["adjustments"])

    def test_json_content_type(self, client):
        response = client.get("/api/v1/workspace")
        assert response.headers["content-type"] == "application/json; charset=utf-8"


class TestAssessEndpoint:
    def test_empty_selection_is_inherent(self, client):
        response = client.post("/api/v1/assess", json={"controls": []})
        assert response.status_code == 200
        displays = [a["severity_score"]["display"] for a in response.json()]
        assert displays == ["19.50", "19.88"]

    def test_all_controls(self, client):
        response = client.post(
            "/api/v1/assess", json={"controls": ALL_CONTROL_IDS}
        )
        assert response.status_code == 200
        body = response.json()
        displays = [a["severity_score"]["display"] for a in body]
        assert displays == ["10.41", "6.94"]
        labels = [a["severity_label"] for a in body]
        assert labels == ["Low", "Low"]

    def test_duplicate_ids_are_harmless(self, client):
        once = client.post(
            "/api/v1/assess", json={"controls": ["monitoring"]}
        ).json()
        twice = client.post(
            "/api/v1/assess", json={"controls": ["monitoring", "monitoring"]}
        ).json()
        assert once == twice

    def test_unknown_id_is_422(self, client):
        response = client.post(
            "/api/v1/assess", json={"controls": ["bogus", "monitoring"]}
        )
        assert response.status_code == 422
        error = response.json()["error"]
        assert error["code"] == "UNKNOWN_ID"
        assert "bogus" in error["message"]

    def test_malformed_body_is_bad_request(self, client):
        for payload in ({"nope": []}, {"controls": "monitoring"}, [1, 2]):
            response = client.post("/api/v1/assess", json=payload)
            assert response.status_code == 422
            assert response.json()["error"]["code"] == "BAD_REQUEST"


class TestFlowEndpoint:
    def test_poisoning_insider_skips_five(self, client):
        doc = client.get("/api/v1/flows/poison_flow", params={"actor": "insider"}).json()
        assert doc["threat_id"] == "rag_poisoning"
        assert doc["entry_index"] == 6
        assert doc["skipped_count"] == 5
        flags = [step["skipped"] for step in doc["steps"]]
        assert flags == [True] * 5 + [False] * 3

    def test_default_actor_is_external(self, client):
        doc = client.get("/api/v1/flows/poison_flow").json()
        assert doc["actor"] == "external"
        assert doc["entry_index"] == 1
        assert doc["skipped_count"] == 0
        assert not any(step["skipped"] for step in doc["steps"])

    def test_unwitting_falls_back_to_insider(self, client):
        doc = client.get(
            "/api/v1/flows/exfil_flow", params={"actor": "unwitting_insider"}
        ).json()
        assert doc["actor"] == "unwitting_insider"
        assert doc["entry_index"] == 3
        assert doc["skipped_count"] == 2

    def test_steps_carry_stage_and_technique(self, client):
        doc = client.get("/api/v1/flows/poison_flow").json()
        first = doc["steps"][0]
        assert set(first) == {"index", "stage", "technique", "target", "skipped"}
        techniques = [s["technique"] for s in doc["steps"] if s["technique"]]
        assert any(t["framework"] == "ATLAS" for t in techniques)

    def test_missing_flow_is_404(self, client):
        response = client.get("/api/v1/flows/nope")
        assert response.status_code == 404
        error = response.json()["error"]
        assert error["code"] == "UNKNOWN_ID"
        assert "nope" in error["message"]

    def test_bad_actor_string_is_422(self, client):
        response = client.get(
            "/api/v1/flows/poison_flow", params={"actor": "alien"}
        )
        assert response.status_code == 422
        error = response.json()["error"]
        assert error["code"] == "BAD_REQUEST"
        assert "alien" in error["message"]
        assert "unwitting_insider" in error["message"]

    def test_actor_without_entry_is_422(self, tmp_path):
        threats = helpers.threats_doc()
        threats["threats"][0]["flows"][0]["entry_points"] = {"external": 1}
        root = helpers.write_docs(tmp_path / "ws", threats=threats)
        app = create_app(load_workspace(root))
        with TestClient(app) as local:
            response = local.get("/api/v1/flows/fl1", params={"actor": "insider"})
            assert response.status_code == 422
            assert response.json()["error"]["code"] == "UNKNOWN_ID"


class TestPyramidEndpoint:
    def test_priority_order(self, client):
        doc = client.get("/api/v1/pyramid").json()
        assert [p["control_id"] for p in doc["priorities"]] == PRIORITY_ORDER

    def test_coverage_rows(self, client):
        doc = client.get("/api/v1/pyramid").json()
        assert [row["rank"] for row in doc["coverage"]] == [6, 5, 4, 3, 2, 1]
        top = doc["coverage"][0]
        ids = [c["id"] for c in top["controls"]]
        assert "adversarial_training" in ids


class TestGraphEndpoint:
    def test_dot_text(self, client, ws):
        response = client.get("/api/v1/graph.dot")
        assert response.status_code == 200
        assert response.headers["content-type"].startswith("text/plain")
        assert response.text == export_dot(build_surface_graph(ws))


class TestErrorEnvelopes:
    def test_unknown_route(self, client):
        response = client.get("/api/v1/nothing")
        assert response.status_code == 404
        assert response.json() == {
            "error": {"code": "BAD_REQUEST", "message": "Not Found"}
        }

    def test_wrong_method(self, client):
        response = client.get("/api/v1/assess")
        assert response.status_code == 405
        assert response.json()["error"]["code"] == "BAD_REQUEST"


class TestAppOptions:
    def test_cors_preflight_when_enabled(self, ws):
        app = create_app(ws, allow_origin="http://localhost:5173")
        with TestClient(app) as local:
            response = local.options(
                "/api/v1/workspace",
                headers={
                    "Origin": "http://localhost:5173",
                    "Access-Control-Request-Method": "GET",
                },
            )
            assert response.status_code == 200
            assert (
                response.headers["access-control-allow-origin"]
                == "http://localhost:5173"
            )

    def test_no_cors_header_by_default(self, client):
        response = client.get(
            "/api/v1/workspace", headers={"Origin": "http://localhost:5173"}
        )
        assert "access-control-allow-origin" not in response.headers

    def test_ui_mount_serves_index(self, ws, tmp_path):
        ui = tmp_path / "dist"
        ui.mkdir()
        (ui / "index.html").write_text("<!doctype html><title>rr</title>")
        app = create_app(ws, ui_dir=ui)
        with TestClient(app) as local:
            response = local.get("/ui/")
            assert response.status_code == 200
            assert "rr" in response.text

    def test_missing_ui_dir_is_ignored(self, ws, tmp_path):
        app = create_app(ws, ui_dir=tmp_path / "absent")
        with TestClient(app) as local:
            assert local.get("/ui/").status_code == 404
            assert local.get("/healthz").status_code == 200


def test_identical_requests_identical_responses(client):
    first = client.post("/api/v1/assess", json={"controls": ALL_CONTROL_IDS})
    second = client.post("/api/v1/assess", json={"controls": ALL_CONTROL_IDS})
    assert json.dumps(first.json(), sort_keys=True) == json.dumps(
        second.json(), sort_keys=True
    )
