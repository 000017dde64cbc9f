from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from tmkqa.cli import main

from .conftest import FIXTURES_DIR, REPO_ROOT, SKILLS_DIR


@pytest.fixture
def runner():
    return CliRunner()


def _config_text(tmp_path) -> str:
    return f"""\
model_dir: {SKILLS_DIR}
index_dir: {tmp_path}/indexes
trace_dir: {tmp_path}/traces
gateway:
  backend: mock
  mock_script: {FIXTURES_DIR}/mock-scripts/default.json
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(_config_text(tmp_path), encoding="utf-8")
    return path


def test_validate_clean_exemplar_exit_zero(runner):
    result = runner.invoke(main, ["validate", str(SKILLS_DIR / "partial-order-planning.tmk")])
    assert result.exit_code == 0
    assert "0 errors" in result.output


def test_validate_seeded_defect_exit_one(runner):
    result = runner.invoke(
        main, ["validate", str(FIXTURES_DIR / "defects" / "dangling-subgoal.tmk")]
    )
    assert result.exit_code == 1
    assert "dangling-subgoal" in result.output


def test_validate_json_format(runner):
    result = runner.invoke(
        main,
        ["validate", str(FIXTURES_DIR / "defects" / "missing-root-task.tmk"), "--format", "json"],
    )
    assert result.exit_code == 1
    payload = json.loads(result.output)
    assert payload["defects"][0]["code"] == "missing-root-task"


def test_validate_parse_error_exit_two(runner, tmp_path):
    bad = tmp_path / "broken.tmk"
    bad.write_text("skill: x\nname: X\n\ntask: t\n", encoding="utf-8")
    result = runner.invoke(main, ["validate", str(bad)])
    assert result.exit_code == 2
    assert "goal" in result.output


def test_report_prints_agreement_indices(runner):
    result = runner.invoke(main, ["report", str(FIXTURES_DIR / "votes-developer-study.json")])
    assert result.exit_code == 0
    assert "82.14" in result.output
    assert "53.57" in result.output


def test_ask_with_mock_config(runner, config_file):
    result = runner.invoke(main, [
        "ask", "partial-order-planning",
        "What is the goal of the painting task in partial order planning?",
        "--config", str(config_file),
    ])
    assert result.exit_code == 0
    assert "Painted(Ladder)" in result.output


def test_ask_show_trace(runner, config_file):
    result = runner.invoke(main, [
        "ask", "partial-order-planning", "How do you make a quesadilla?",
        "--show-trace", "--config", str(config_file),
    ])
    assert result.exit_code == 0
    assert "outside the scope" in result.output
    assert '"relevant": false' in result.output


def test_ask_unknown_skill_fails(runner, config_file):
    result = runner.invoke(main, ["ask", "ghost", "hello?", "--config", str(config_file)])
    assert result.exit_code == 1


def test_index_writes_directory(runner, config_file, tmp_path):
    result = runner.invoke(main, [
        "index", "partial-order-planning", "--config", str(config_file),
    ])
    assert result.exit_code == 0
    out_dir = tmp_path / "indexes" / "partial-order-planning" / "tmk"
    assert (out_dir / "header.json").is_file()
    assert (out_dir / "vectors.npy").is_file()


def test_index_baseline_mode(runner, config_file, tmp_path):
    result = runner.invoke(main, [
        "index", "partial-order-planning", "--mode", "baseline", "--config", str(config_file),
    ])
    assert result.exit_code == 0
    header = json.loads(
        (tmp_path / "indexes" / "partial-order-planning" / "baseline" / "header.json").read_text()
    )
    assert header["mode"] == "baseline"
    assert header["entry_count"] >= 2


def test_eval_command_writes_report(runner, config_file, tmp_path):
    report_path = tmp_path / "report.json"
    result = runner.invoke(main, [
        "eval", "--suite", str(FIXTURES_DIR / "suite-verification.json"),
        "--repeats", "1", "--report-out", str(report_path),
        "--config", str(config_file),
    ])
    assert result.exit_code == 0, result.output
    payload = json.loads(report_path.read_text(encoding="utf-8"))
    assert payload["trace_count"] == 10
    assert payload["refusal_count"] == 6


def test_chat_loop_single_turn(runner, config_file):
    result = runner.invoke(main, [
        "chat", "partial-order-planning", "--config", str(config_file),
    ], input="How do you make a quesadilla?\n\n")
    assert result.exit_code == 0
    assert "outside the scope" in result.output


def test_cli_and_http_ask_produce_identical_traces(config_file, tmp_path):
    # Same inputs through both entry points, same mocks: identical traces
    # apart from ids and timestamps.
    from fastapi.testclient import TestClient

    from tmkqa.config import ServiceConfig, build_engine, build_harness
    from tmkqa.server import create_app

    question = "What is the goal of the painting task in partial order planning?"
    config = ServiceConfig.load(config_file)

    cli_engine = build_engine(config, base_dir=REPO_ROOT)
    cli_trace = cli_engine.trace(
        cli_engine.answer(question, "partial-order-planning").trace_id
    ).to_dict()

    http_engine = build_engine(config, base_dir=REPO_ROOT)
    app = create_app(http_engine, build_harness(config, http_engine), config)
    client = TestClient(app)
    response = client.post(
        "/api/skills/partial-order-planning/ask", json={"question": question}
    )
    http_trace = client.get(f"/api/traces/{response.json()['trace_id']}").json()

    for volatile in ("trace_id", "started_at", "finished_at"):
        cli_trace.pop(volatile)
        http_trace.pop(volatile)
    assert cli_trace == http_trace
