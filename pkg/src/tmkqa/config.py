"""Service configuration: YAML file plus environment overrides.

Mock backends are selectable with no credentials at all, so the whole
system runs offline out of the box.  Credentials are referenced
indirectly: the config names an environment variable, never a secret.

Environment overrides:

* ``TMKQA_LISTEN_ADDR``   -- overrides ``listen_addr``
* ``TMKQA_GATEWAY_URL``   -- overrides ``gateway.base_url``
* the variable named by ``*.api_key_env`` supplies the credential
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .embedding import HashEmbeddingProvider, RemoteEmbeddingProvider
from .errors import TmkqaError
from .evaluation import EvalHarness
from .gateway import LlmGateway, RemoteChatBackend, ScriptedMockBackend
from .pipeline import DEFAULT_BLACKLIST, DEFAULT_REFUSAL, AnswerEngine, PipelineSettings
from .prompts import PromptLibrary
from .tmk.parser import parse_tmk
from .tmk.types import TmkModel
from .tmk.validator import validate
from .traces import TraceStore


@dataclass(frozen=True)
class GatewayConfig:
    backend: str = "mock"  # mock | remote
    mock_script: str | None = None
    base_url: str = ""
    model: str = ""
    api_key_env: str = "TMKQA_API_KEY"
    timeout: float = 30.0


@dataclass(frozen=True)
class EmbedderConfig:
    provider: str = "hash"  # hash | remote
    dim: int = 64
    base_url: str = ""
    model: str = ""
    api_key_env: str = "TMKQA_EMBED_API_KEY"


@dataclass(frozen=True)
class ServiceConfig:
    model_dir: str = "skills"
    index_dir: str = "var/indexes"
    trace_dir: str = "var/traces"
    template_dir: str | None = None
    frontend_dist: str | None = None
    gateway: GatewayConfig = field(default_factory=GatewayConfig)
    retrieval_embedder: EmbedderConfig = field(default_factory=EmbedderConfig)
    evaluation_embedder: EmbedderConfig = field(default_factory=EmbedderConfig)
    blacklist: tuple[str, ...] = DEFAULT_BLACKLIST
    refusal_template: str = DEFAULT_REFUSAL
    kscore_fallback: int = 2
    baseline_chunk_tokens: int = 300
    baseline_overlap_tokens: int = 50
    worker_pool: int = 4
    listen_addr: str = "127.0.0.1:8077"

    @classmethod
    def load(cls, path: Path | None = None) -> "ServiceConfig":
        config = cls()
        if path is not None:
            data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
            config = cls(
                model_dir=data.get("model_dir", config.model_dir),
                index_dir=data.get("index_dir", config.index_dir),
                trace_dir=data.get("trace_dir", config.trace_dir),
                template_dir=data.get("template_dir"),
                frontend_dist=data.get("frontend_dist"),
                gateway=GatewayConfig(**data.get("gateway", {})),
                retrieval_embedder=EmbedderConfig(**data.get("retrieval_embedder", {})),
                evaluation_embedder=EmbedderConfig(**data.get("evaluation_embedder", {})),
                blacklist=tuple(data.get("blacklist", DEFAULT_BLACKLIST)),
                refusal_template=data.get("refusal_template", DEFAULT_REFUSAL),
                kscore_fallback=data.get("kscore_fallback", 2),
                baseline_chunk_tokens=data.get("baseline_chunk_tokens", 300),
                baseline_overlap_tokens=data.get("baseline_overlap_tokens", 50),
                worker_pool=data.get("worker_pool", 4),
                listen_addr=data.get("listen_addr", config.listen_addr),
            )
        listen = os.environ.get("TMKQA_LISTEN_ADDR")
        if listen:
            config = replace(config, listen_addr=listen)
        gateway_url = os.environ.get("TMKQA_GATEWAY_URL")
        if gateway_url:
            config = replace(config, gateway=replace(config.gateway, base_url=gateway_url))
        return config

    def pipeline_settings(self) -> PipelineSettings:
        return PipelineSettings(
            blacklist=self.blacklist,
            refusal_template=self.refusal_template,
            kscore_fallback=self.kscore_fallback,
            baseline_chunk_tokens=self.baseline_chunk_tokens,
            baseline_overlap_tokens=self.baseline_overlap_tokens,
        )


def _build_gateway(config: GatewayConfig) -> LlmGateway:
    if config.backend == "mock":
        if config.mock_script:
            backend = ScriptedMockBackend.from_file(Path(config.mock_script))
        else:
            backend = ScriptedMockBackend()
        return LlmGateway(backend)
    if config.backend == "remote":
        if not config.base_url:
            raise TmkqaError("remote gateway requires gateway.base_url")
        return LlmGateway(
            RemoteChatBackend(
                base_url=config.base_url,
                model=config.model,
                api_key=os.environ.get(config.api_key_env),
                timeout=config.timeout,
            )
        )
    raise TmkqaError(f"unknown gateway backend '{config.backend}'")


def _build_embedder(config: EmbedderConfig):
    if config.provider == "hash":
        return HashEmbeddingProvider(dim=config.dim)
    if config.provider == "remote":
        if not config.base_url:
            raise TmkqaError("remote embedder requires base_url")
        return RemoteEmbeddingProvider(
            base_url=config.base_url,
            model=config.model,
            dim=config.dim,
            api_key=os.environ.get(config.api_key_env),
        )
    raise TmkqaError(f"unknown embedding provider '{config.provider}'")


def load_models(model_dir: Path) -> dict[str, TmkModel]:
    """Parse and validate every ``*.tmk`` file in a directory."""
    models = {}
    for path in sorted(Path(model_dir).glob("*.tmk")):
        model = parse_tmk(path.read_text(encoding="utf-8"))
        report = validate(model)
        if not report.ok:
            codes = ", ".join(d.code.value for d in report.errors)
            raise TmkqaError(f"model {path.name} has validation errors: {codes}")
        if model.skill_id in models:
            raise TmkqaError(f"duplicate skill id '{model.skill_id}' in {path.name}")
        models[model.skill_id] = model
    return models


def build_engine(config: ServiceConfig, base_dir: Path | None = None) -> AnswerEngine:
    """Assemble a ready engine: models loaded, backends wired, store open."""
    base = Path(base_dir) if base_dir is not None else Path.cwd()

    def resolve(p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() else base / path

    prompts = (
        PromptLibrary(resolve(config.template_dir))
        if config.template_dir
        else PromptLibrary.packaged()
    )
    engine = AnswerEngine(
        gateway=_build_gateway(config.gateway),
        retrieval_provider=_build_embedder(config.retrieval_embedder),
        prompts=prompts,
        settings=config.pipeline_settings(),
        trace_store=TraceStore(resolve(config.trace_dir)),
    )
    model_dir = resolve(config.model_dir)
    if model_dir.is_dir():
        for model in load_models(model_dir).values():
            baseline_path = model_dir / f"{model.skill_id}.txt"
            baseline = baseline_path.read_text(encoding="utf-8") if baseline_path.is_file() else None
            engine.add_skill(model, baseline_text=baseline)
    return engine


def build_harness(config: ServiceConfig, engine: AnswerEngine) -> EvalHarness:
    return EvalHarness(
        engine=engine,
        evaluation_provider=_build_embedder(config.evaluation_embedder),
        workers=config.worker_pool,
    )
