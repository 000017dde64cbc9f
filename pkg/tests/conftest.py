from __future__ import annotations

from pathlib import Path

import pytest

from tmkqa.embedding import HashEmbeddingProvider
from tmkqa.gateway import LlmGateway, ScriptedMockBackend
from tmkqa.pipeline import AnswerEngine
from tmkqa.tmk.parser import parse_tmk
from tmkqa.traces import TraceStore

REPO_ROOT = Path(__file__).resolve().parents[1]
SKILLS_DIR = REPO_ROOT / "skills"
FIXTURES_DIR = REPO_ROOT / "fixtures"


@pytest.fixture(scope="session")
def repo_root() -> Path:
    return REPO_ROOT


@pytest.fixture(scope="session")
def popp_model():
    return parse_tmk((SKILLS_DIR / "partial-order-planning.tmk").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def sort_model():
    return parse_tmk((SKILLS_DIR / "bubble-sort.tmk").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def stub_models():
    return [
        parse_tmk(p.read_text(encoding="utf-8"))
        for p in sorted((FIXTURES_DIR / "stub-skills").glob("*.tmk"))
    ]


@pytest.fixture
def default_mock_backend() -> ScriptedMockBackend:
    return ScriptedMockBackend.from_file(FIXTURES_DIR / "mock-scripts" / "default.json")


def make_engine(models, backend, baseline_texts=None, trace_dir=None) -> AnswerEngine:
    engine = AnswerEngine(
        gateway=LlmGateway(backend),
        retrieval_provider=HashEmbeddingProvider(),
        trace_store=TraceStore(trace_dir),
    )
    baseline_texts = baseline_texts or {}
    for model in models:
        engine.add_skill(model, baseline_text=baseline_texts.get(model.skill_id))
    return engine


@pytest.fixture
def popp_engine(popp_model, default_mock_backend) -> AnswerEngine:
    baseline = (SKILLS_DIR / "partial-order-planning.txt").read_text(encoding="utf-8")
    return make_engine(
        [popp_model], default_mock_backend,
        baseline_texts={"partial-order-planning": baseline},
    )
