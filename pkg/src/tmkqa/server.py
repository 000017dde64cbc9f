"""HTTP service exposing the answer pipeline and evaluation harness.

All endpoints are stateless; each POST /ask is one independent question
whose full knowledge trace is persisted and retrievable by id.  Error
payloads carry machine-readable codes mirroring the CLI's.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .config import ServiceConfig, build_engine, build_harness
from .documents import TMK_MODE
from .errors import IndexMissingError, UnknownSkillError
from .evaluation import EvalHarness, load_suite
from .pipeline import AnswerEngine
from .tmk.validator import hierarchy_depth


class AskBody(BaseModel):
    question: str = Field(min_length=1)
    mode: str = TMK_MODE


class EvalBody(BaseModel):
    suite_ref: str
    repeats: int = 1
    mode: str = TMK_MODE
    include_inactive: bool = False


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


def create_app(engine: AnswerEngine, harness: EvalHarness, config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="tmkqa", version="0.1.0")

    @app.get("/api/health")
    def health():
        return {"status": "ok", "skills": len(engine.skill_ids())}

    @app.get("/api/skills")
    def skills():
        out = []
        for skill_id in engine.skill_ids():
            model = engine.model(skill_id)
            out.append({
                "skill_id": skill_id,
                "skill_name": model.skill_name,
                "task_count": len(model.tasks),
                "method_count": len(model.methods),
                "concept_count": len(model.knowledge.concepts),
            })
        return out

    @app.get("/api/skills/{skill_id}")
    def skill_detail(skill_id: str):
        try:
            model = engine.model(skill_id)
        except UnknownSkillError as exc:
            raise _error(404, "unknown-skill", str(exc))
        corpus = engine.corpus(skill_id)
        return {
            "skill_id": skill_id,
            "skill_name": model.skill_name,
            "task_count": len(model.tasks),
            "method_count": len(model.methods),
            "concept_count": len(model.knowledge.concepts),
            "hierarchy_depth": hierarchy_depth(model),
            "component_names": list(corpus.component_names()),
        }

    @app.post("/api/skills/{skill_id}/ask")
    def ask(skill_id: str, body: AskBody):
        try:
            answered = engine.answer(body.question, skill_id, body.mode)
        except UnknownSkillError as exc:
            raise _error(404, "unknown-skill", str(exc))
        except IndexMissingError as exc:
            raise _error(409, "index-missing", str(exc))
        trace = engine.trace(answered.trace_id)
        assert trace is not None
        return {
            "final_response": answered.final_response,
            "trace_id": answered.trace_id,
            "refused": not trace.verdict.relevant,
        }

    @app.get("/api/traces/{trace_id}")
    def get_trace(trace_id: str):
        trace = engine.trace(trace_id)
        if trace is None:
            raise _error(404, "unknown-trace", f"no trace with id '{trace_id}'")
        return trace.to_dict()

    @app.post("/api/eval")
    def run_eval(body: EvalBody):
        suite_path = Path(body.suite_ref)
        if not suite_path.is_file():
            raise _error(404, "unknown-suite", f"no suite file at '{body.suite_ref}'")
        suite = load_suite(suite_path, include_inactive=body.include_inactive)
        report = harness.run_eval(suite, repeats=body.repeats, mode=body.mode)
        return report.to_dict()

    if config.frontend_dist and Path(config.frontend_dist).is_dir():
        app.mount("/", StaticFiles(directory=config.frontend_dist, html=True), name="ui")

    return app


def serve(config: ServiceConfig, base_dir: Path | None = None) -> None:
    """Build the runtime from config and block serving HTTP."""
    import uvicorn

    engine = build_engine(config, base_dir=base_dir)
    if not engine.skill_ids():
        raise SystemExit("no validated skill models found; check model_dir")
    harness = build_harness(config, engine)
    app = create_app(engine, harness, config)
    host, _, port = config.listen_addr.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8077))
