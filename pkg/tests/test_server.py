from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from tmkqa.config import ServiceConfig
from tmkqa.embedding import HashEmbeddingProvider
from tmkqa.evaluation import EvalHarness
from tmkqa.server import create_app

from .conftest import FIXTURES_DIR, make_engine


@pytest.fixture
def client(popp_model, sort_model, default_mock_backend):
    engine = make_engine([popp_model, sort_model], default_mock_backend)
    harness = EvalHarness(engine, HashEmbeddingProvider())
    app = create_app(engine, harness, ServiceConfig())
    return TestClient(app)


def test_health(client):
    response = client.get("/api/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok", "skills": 2}


def test_skills_listing(client):
    response = client.get("/api/skills")
    assert response.status_code == 200
    listing = response.json()
    assert len(listing) == 2
    by_id = {entry["skill_id"]: entry for entry in listing}
    popp = by_id["partial-order-planning"]
    assert popp["skill_name"] == "Partial Order Planning"
    assert popp["task_count"] == 1
    assert popp["method_count"] == 1
    assert popp["concept_count"] == 5


def test_skill_detail(client):
    response = client.get("/api/skills/bubble-sort")
    assert response.status_code == 200
    detail = response.json()
    assert detail["hierarchy_depth"] == 2
    assert "sort list" in detail["component_names"]


def test_skill_detail_unknown_404(client):
    response = client.get("/api/skills/ghost")
    assert response.status_code == 404
    assert response.json()["detail"]["code"] == "unknown-skill"


def test_ask_returns_answer_and_full_trace(client):
    response = client.post(
        "/api/skills/partial-order-planning/ask",
        json={"question": "What is the goal of the painting task in partial order planning?"},
    )
    assert response.status_code == 200
    body = response.json()
    assert "Painted(Ladder)" in body["final_response"]
    assert body["refused"] is False

    trace_response = client.get(f"/api/traces/{body['trace_id']}")
    assert trace_response.status_code == 200
    trace = trace_response.json()
    assert trace["kscore"] == 3
    assert len(trace["retrieved"]) == 3
    assert [c["tag"] for c in trace["llm_calls"]] == [
        "relevance", "kscore", "generate", "refine", "refine", "optimize",
    ]


def test_ask_unknown_skill_404(client):
    response = client.post("/api/skills/ghost/ask", json={"question": "hi?"})
    assert response.status_code == 404
    assert response.json()["detail"]["code"] == "unknown-skill"


def test_ask_refusal_flagged(client):
    response = client.post(
        "/api/skills/partial-order-planning/ask",
        json={"question": "How do you make a quesadilla?"},
    )
    assert response.status_code == 200
    assert response.json()["refused"] is True


def test_ask_validates_body(client):
    response = client.post("/api/skills/partial-order-planning/ask", json={"question": ""})
    assert response.status_code == 422


def test_trace_unknown_404(client):
    response = client.get("/api/traces/nope")
    assert response.status_code == 404
    assert response.json()["detail"]["code"] == "unknown-trace"


def test_eval_endpoint_runs_suite(client):
    response = client.post(
        "/api/eval",
        json={"suite_ref": str(FIXTURES_DIR / "suite-verification.json"), "repeats": 1},
    )
    assert response.status_code == 200
    report = response.json()
    # Active suite: 4 in-scope planning questions + 6 cannot-answer.
    assert report["trace_count"] == 10
    assert report["refusal_count"] == 6


def test_eval_endpoint_unknown_suite_404(client):
    response = client.post("/api/eval", json={"suite_ref": "nope.json"})
    assert response.status_code == 404


def test_baseline_index_missing_conflict(client):
    response = client.post(
        "/api/skills/bubble-sort/ask",
        json={"question": "How does sorting work?", "mode": "baseline"},
    )
    assert response.status_code == 409
    assert response.json()["detail"]["code"] == "index-missing"
