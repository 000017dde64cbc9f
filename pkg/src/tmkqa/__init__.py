"""Grounded skill-explanation question answering over TMK models."""

__version__ = "0.1.0"

from .documents import Corpus, TmkDocument, chunk_text, render_documents
from .embedding import HashEmbeddingProvider
from .gateway import ChatRequest, ChatResponse, LlmGateway, MockRule, ScriptedMockBackend, Tag
from .index import VectorIndex, build_index, top_k
from .pipeline import AnsweredQuestion, AnswerEngine, PipelineSettings
from .tmk import TmkModel, hierarchy_depth, parse_tmk, serialize, validate
from .traces import KnowledgeTrace, KScore, RelevanceVerdict, TraceStore

__all__ = [
    "AnsweredQuestion",
    "AnswerEngine",
    "ChatRequest",
    "ChatResponse",
    "Corpus",
    "HashEmbeddingProvider",
    "KScore",
    "KnowledgeTrace",
    "LlmGateway",
    "MockRule",
    "PipelineSettings",
    "RelevanceVerdict",
    "ScriptedMockBackend",
    "Tag",
    "TmkDocument",
    "TmkModel",
    "TraceStore",
    "VectorIndex",
    "build_index",
    "chunk_text",
    "hierarchy_depth",
    "parse_tmk",
    "render_documents",
    "serialize",
    "top_k",
    "validate",
]
