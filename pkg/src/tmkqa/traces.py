"""Knowledge-trace records and their append-only store.

A trace is the complete audit record of one answered question: the
relevance verdict, the complexity score, every retrieved document, every
intermediate response, the final response, and one entry per gateway call
in the order the calls happened.  Traces are frozen once built.
"""

from __future__ import annotations

import json
import os
import tempfile
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .gateway import CallRecord


@dataclass(frozen=True)
class KScore:
    """Question complexity grade; equals the retrieval fan-out."""

    value: int

    def __post_init__(self):
        if not 1 <= self.value <= 4:
            raise ValueError(f"k-score must be in [1, 4], got {self.value}")


@dataclass(frozen=True)
class RelevanceVerdict:
    relevant: bool
    matched_component_names: tuple[str, ...] = ()
    rationale: str = ""

    def __post_init__(self):
        if self.relevant and not self.matched_component_names:
            raise ValueError("a relevant verdict must name at least one matched component")


@dataclass(frozen=True)
class KnowledgeTrace:
    trace_id: str
    skill_id: str
    question: str
    mode: str
    verdict: RelevanceVerdict
    kscore: KScore | None
    retrieved: tuple[tuple[str, float], ...]
    intermediate_responses: tuple[str, ...]
    final_response: str
    llm_calls: tuple[CallRecord, ...]
    started_at: str
    finished_at: str
    notes: tuple[str, ...] = ()
    error: str | None = None

    def __post_init__(self):
        if self.error is not None:
            return  # partial trace preserved after an aborting failure
        if not self.verdict.relevant:
            if self.kscore is not None or self.retrieved or self.intermediate_responses:
                raise ValueError("an irrelevant-question trace must carry no retrieval work")
        else:
            if len(self.intermediate_responses) != len(self.retrieved):
                raise ValueError(
                    "expected one intermediate response per retrieved document, got "
                    f"{len(self.intermediate_responses)} for {len(self.retrieved)}"
                )

    def to_dict(self) -> dict:
        return {
            "trace_id": self.trace_id,
            "skill_id": self.skill_id,
            "question": self.question,
            "mode": self.mode,
            "verdict": {
                "relevant": self.verdict.relevant,
                "matched_component_names": list(self.verdict.matched_component_names),
                "rationale": self.verdict.rationale,
            },
            "kscore": self.kscore.value if self.kscore else None,
            "retrieved": [[doc_id, score] for doc_id, score in self.retrieved],
            "intermediate_responses": list(self.intermediate_responses),
            "final_response": self.final_response,
            "llm_calls": [c.to_dict() for c in self.llm_calls],
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "notes": list(self.notes),
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "KnowledgeTrace":
        return cls(
            trace_id=data["trace_id"],
            skill_id=data["skill_id"],
            question=data["question"],
            mode=data["mode"],
            verdict=RelevanceVerdict(
                relevant=data["verdict"]["relevant"],
                matched_component_names=tuple(data["verdict"]["matched_component_names"]),
                rationale=data["verdict"]["rationale"],
            ),
            kscore=KScore(data["kscore"]) if data["kscore"] else None,
            retrieved=tuple((d, float(s)) for d, s in data["retrieved"]),
            intermediate_responses=tuple(data["intermediate_responses"]),
            final_response=data["final_response"],
            llm_calls=tuple(CallRecord(**c) for c in data["llm_calls"]),
            started_at=data["started_at"],
            finished_at=data["finished_at"],
            notes=tuple(data.get("notes", ())),
            error=data.get("error"),
        )


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class TraceBuilder:
    """Mutable accumulator; ``build`` freezes it into a KnowledgeTrace."""

    skill_id: str
    question: str
    mode: str
    trace_id: str = field(default_factory=lambda: uuid.uuid4().hex)
    started_at: str = field(default_factory=_now)
    verdict: RelevanceVerdict | None = None
    kscore: KScore | None = None
    retrieved: list[tuple[str, float]] = field(default_factory=list)
    intermediates: list[str] = field(default_factory=list)
    calls: list[CallRecord] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def record_call(self, record: CallRecord) -> None:
        self.calls.append(record)

    def note(self, text: str) -> None:
        self.notes.append(text)

    def build(self, final_response: str, error: str | None = None) -> KnowledgeTrace:
        if self.verdict is None:
            raise ValueError("cannot build a trace before the relevance verdict")
        return KnowledgeTrace(
            trace_id=self.trace_id,
            skill_id=self.skill_id,
            question=self.question,
            mode=self.mode,
            verdict=self.verdict,
            kscore=self.kscore,
            retrieved=tuple(self.retrieved),
            intermediate_responses=tuple(self.intermediates),
            final_response=final_response,
            llm_calls=tuple(self.calls),
            started_at=self.started_at,
            finished_at=_now(),
            notes=tuple(self.notes),
            error=error,
        )


class TraceStore:
    """One JSON file per trace in an append-only directory.

    Writes go through a temp file plus atomic rename, so concurrent saves
    of distinct traces never interleave.
    """

    def __init__(self, directory: Path | None = None):
        self.directory = Path(directory) if directory is not None else None
        self._memory: dict[str, KnowledgeTrace] = {}
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)

    def save(self, trace: KnowledgeTrace) -> None:
        self._memory[trace.trace_id] = trace
        if self.directory is None:
            return
        payload = json.dumps(trace.to_dict(), ensure_ascii=False, indent=2) + "\n"
        fd, tmp_path = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(payload)
            os.replace(tmp_path, self.directory / f"{trace.trace_id}.json")
        finally:
            if os.path.exists(tmp_path):
                os.unlink(tmp_path)

    def load(self, trace_id: str) -> KnowledgeTrace | None:
        if trace_id in self._memory:
            return self._memory[trace_id]
        if self.directory is not None:
            path = self.directory / f"{trace_id}.json"
            if path.is_file():
                return KnowledgeTrace.from_dict(json.loads(path.read_text(encoding="utf-8")))
        return None

    def __len__(self) -> int:
        if self.directory is not None:
            return len(list(self.directory.glob("*.json")))
        return len(self._memory)
