"""Automated evaluation: verification suites, similarity scoring against
expected answers, two trace judges, repeat runs, and vote arithmetic.

Judge verdicts from live models are recorded, never hard-asserted; the
offline suites drive the judges with scripted backends.  Vote records are
ingested from files (this package aggregates votes, it does not run the
voting study).
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .documents import Corpus
from .embedding import EmbeddingProvider
from .gateway import ChatRequest, Tag
from .pipeline import AnswerEngine
from .traces import KnowledgeTrace

CATEGORIES = ("task", "method", "knowledge", "student", "cannot-answer")
VOTE_METRICS = ("correctness", "completeness", "confidence", "comprehensibility", "compactness")

_PERCENT_RE = {
    "derived": re.compile(r"^\s*DERIVED_PERCENT\s*:\s*(\d{1,3})\s*$", re.IGNORECASE | re.MULTILINE),
    "retained": re.compile(r"^\s*RETAINED_PERCENT\s*:\s*(\d{1,3})\s*$", re.IGNORECASE | re.MULTILINE),
}
_SPANS_RE = re.compile(r"^\s*(?:EXTERNAL_SPANS|OMISSIONS)\s*:\s*(.+)$", re.IGNORECASE | re.MULTILINE)
_REASONING_RE = re.compile(r"^\s*REASONING\s*:\s*(.+)$", re.IGNORECASE | re.MULTILINE)


# ----- suite ----------------------------------------------------------------


@dataclass(frozen=True)
class VerificationQuestion:
    question: str
    category: str
    skill_id: str | None = None
    expected_response: str | None = None
    asked_against: str | None = None  # where a cannot-answer question is posed
    active: bool = True

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category '{self.category}'")
        if self.category == "cannot-answer":
            if self.skill_id is not None or self.expected_response is not None:
                raise ValueError("cannot-answer questions carry no skill binding or expected response")
        elif self.skill_id is None:
            raise ValueError(f"{self.category} questions must name a skill")

    @property
    def target_skill(self) -> str | None:
        return self.skill_id if self.skill_id is not None else self.asked_against


def load_suite(path: Path, include_inactive: bool = False) -> list[VerificationQuestion]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    questions = [
        VerificationQuestion(
            question=entry["question"],
            category=entry["category"],
            skill_id=entry.get("skill"),
            expected_response=entry.get("expected_response"),
            asked_against=entry.get("asked_against"),
            active=entry.get("active", True),
        )
        for entry in data["questions"]
    ]
    if include_inactive:
        return questions
    return [q for q in questions if q.active]


# ----- similarity ------------------------------------------------------------


@dataclass(frozen=True)
class SimilarityResult:
    question_ref: str
    score: float  # max(0, cosine), so always within [0, 1]


def similarity_score(
    generated: str, expected: str, provider: EmbeddingProvider, question_ref: str = ""
) -> SimilarityResult:
    if not generated.strip() or not expected.strip():
        raise ValueError("similarity_score requires two non-empty texts")
    a = provider.embed(generated)
    b = provider.embed(expected)
    denom = np.linalg.norm(a) * np.linalg.norm(b)
    cosine = float(a @ b / denom) if denom > 0 else 0.0
    return SimilarityResult(question_ref=question_ref, score=max(0.0, min(1.0, cosine)))


# ----- judges ----------------------------------------------------------------


@dataclass(frozen=True)
class GroundingVerdict:
    trace_ref: str
    derived_fraction: float
    externally_added_spans: tuple[str, ...]
    reasoning: str
    valid: bool = True


@dataclass(frozen=True)
class RetentionVerdict:
    trace_ref: str
    retained_fraction: float
    omissions: tuple[str, ...]
    reasoning: str
    valid: bool = True


def _parse_judge(text: str, kind: str) -> tuple[float, tuple[str, ...], str] | None:
    percent_match = _PERCENT_RE[kind].search(text)
    if percent_match is None:
        return None
    value = int(percent_match.group(1))
    if value > 100:
        return None
    spans: tuple[str, ...] = ()
    spans_match = _SPANS_RE.search(text)
    if spans_match is not None:
        raw = spans_match.group(1).strip()
        if raw.lower() != "none":
            spans = tuple(s.strip() for s in raw.split("|||") if s.strip())
    reasoning_match = _REASONING_RE.search(text)
    reasoning = reasoning_match.group(1).strip() if reasoning_match else ""
    return value / 100.0, spans, reasoning


class EvalHarness:
    """Runs suites through an engine and judges the resulting traces."""

    def __init__(
        self,
        engine: AnswerEngine,
        evaluation_provider: EmbeddingProvider,
        workers: int = 1,
    ):
        self.engine = engine
        self.evaluation_provider = evaluation_provider
        self.workers = max(1, workers)

    # -- judge calls --

    def _judge(self, template: str, tag: Tag, values: dict[str, str]) -> str | None:
        system, user = self.engine.prompts.get(template).render(**values)
        request = ChatRequest(system_prompt=system, user_message=user, tag=tag)
        return self.engine.gateway.complete(request).text

    def judge_grounding(self, trace: KnowledgeTrace, corpus: Corpus) -> GroundingVerdict:
        if not trace.verdict.relevant or not trace.intermediate_responses:
            raise ValueError("grounding judge requires a relevant, complete trace")
        docs_by_id = corpus.by_id()
        bodies = "\n\n".join(docs_by_id[doc_id].body for doc_id, _ in trace.retrieved)
        values = {"documents": bodies, "response": trace.intermediate_responses[-1]}
        for _ in range(2):  # one reprompt allowed
            parsed = _parse_judge(
                self._judge("judge_grounding", Tag.JUDGE_GROUNDING, values), "derived"
            )
            if parsed is not None:
                fraction, spans, reasoning = parsed
                return GroundingVerdict(trace.trace_id, fraction, spans, reasoning)
        return GroundingVerdict(trace.trace_id, 0.0, (), "judge output unparseable", valid=False)

    def judge_retention(self, trace: KnowledgeTrace) -> RetentionVerdict:
        if not trace.verdict.relevant or not trace.intermediate_responses:
            raise ValueError("retention judge requires a relevant, complete trace")
        values = {
            "intermediate": trace.intermediate_responses[-1],
            "final": trace.final_response,
        }
        for _ in range(2):
            parsed = _parse_judge(
                self._judge("judge_retention", Tag.JUDGE_RETENTION, values), "retained"
            )
            if parsed is not None:
                fraction, omissions, reasoning = parsed
                return RetentionVerdict(trace.trace_id, fraction, omissions, reasoning)
        return RetentionVerdict(trace.trace_id, 0.0, (), "judge output unparseable", valid=False)

    # -- full runs --

    def run_eval(
        self,
        suite: list[VerificationQuestion],
        repeats: int,
        mode: str = "tmk",
        judge: bool = True,
    ) -> "EvalReport":
        if repeats < 1:
            raise ValueError("repeats must be >= 1")
        jobs = [(q, r) for q in suite for r in range(repeats)]

        def run_one(job) -> EvalRow:
            question, repeat = job
            return self._eval_row(question, repeat, mode, judge)

        if self.workers > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                rows = list(pool.map(run_one, jobs))
        else:
            rows = [run_one(job) for job in jobs]
        return build_report(rows)

    def _eval_row(
        self, question: VerificationQuestion, repeat: int, mode: str, judge: bool
    ) -> "EvalRow":
        loaded = self.engine.skill_ids()
        target = question.target_skill
        if question.skill_id is None and target not in loaded:
            # cannot-answer questions only need *some* active skill session
            target = loaded[0] if loaded else None
        row = EvalRow(question=question, repeat=repeat, target_skill=target)
        if target is None:
            row.error = "no skill loaded to pose the question against"
            return row
        try:
            answered = self.engine.answer(question.question, target, mode)
        except Exception as exc:  # record, keep running
            row.error = f"{type(exc).__name__}: {exc}"
            return row
        trace = self.engine.trace(answered.trace_id)
        assert trace is not None
        row.trace_id = trace.trace_id
        row.refused = not trace.verdict.relevant
        if question.category == "cannot-answer":
            row.relevance_ok = row.refused
        else:
            correct_skill = question.skill_id
            row.relevance_ok = any(
                doc_id.startswith(f"{correct_skill}/") for doc_id, _ in trace.retrieved
            )
            expected_kind = question.category if question.category in ("task", "method", "knowledge") else None
            if expected_kind is not None and trace.retrieved:
                top_doc = self.engine.corpus(target, mode).by_id().get(trace.retrieved[0][0])
                row.kind_ok = top_doc is not None and top_doc.component_kind == expected_kind
        if not row.refused and trace.intermediate_responses:
            if judge:
                grounding = self.judge_grounding(trace, self.engine.corpus(target, mode))
                retention = self.judge_retention(trace)
                row.grounding = grounding
                row.retention = retention
            if question.expected_response:
                row.similarity = similarity_score(
                    trace.final_response,
                    question.expected_response,
                    self.evaluation_provider,
                    question_ref=question.question,
                ).score
        return row


# ----- report ----------------------------------------------------------------


@dataclass
class EvalRow:
    question: VerificationQuestion
    repeat: int
    target_skill: str | None
    trace_id: str | None = None
    refused: bool = False
    relevance_ok: bool | None = None
    kind_ok: bool | None = None
    similarity: float | None = None
    grounding: GroundingVerdict | None = None
    retention: RetentionVerdict | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "question": self.question.question,
            "category": self.question.category,
            "skill": self.question.skill_id,
            "target_skill": self.target_skill,
            "repeat": self.repeat,
            "trace_id": self.trace_id,
            "refused": self.refused,
            "relevance_ok": self.relevance_ok,
            "kind_ok": self.kind_ok,
            "similarity": self.similarity,
            "derived_fraction": self.grounding.derived_fraction if self.grounding and self.grounding.valid else None,
            "retained_fraction": self.retention.retained_fraction if self.retention and self.retention.valid else None,
            "error": self.error,
        }


def _mean_std(values: list[float]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    mean = float(np.mean(values))
    std = float(np.std(values))  # population std
    return mean, std


@dataclass
class EvalReport:
    rows: list[EvalRow] = field(default_factory=list)
    trace_count: int = 0
    refusal_count: int = 0
    error_count: int = 0
    relevance_accuracy: float | None = None
    kind_accuracy: float | None = None
    mean_similarity: float | None = None
    derived_mean: float | None = None
    derived_std: float | None = None
    retained_mean: float | None = None
    retained_std: float | None = None
    invalid_grounding_count: int = 0
    invalid_retention_count: int = 0
    per_category: dict[str, int] = field(default_factory=dict)
    vote_summary: "VoteSummary | None" = None

    def to_dict(self) -> dict:
        return {
            "trace_count": self.trace_count,
            "refusal_count": self.refusal_count,
            "error_count": self.error_count,
            "relevance_accuracy": self.relevance_accuracy,
            "kind_accuracy": self.kind_accuracy,
            "mean_similarity": self.mean_similarity,
            "derived_mean": self.derived_mean,
            "derived_std": self.derived_std,
            "retained_mean": self.retained_mean,
            "retained_std": self.retained_std,
            "invalid_grounding_count": self.invalid_grounding_count,
            "invalid_retention_count": self.invalid_retention_count,
            "per_category": self.per_category,
            "rows": [r.to_dict() for r in self.rows],
            "vote_summary": self.vote_summary.to_dict() if self.vote_summary else None,
        }

    def render_text(self) -> str:
        def fmt(x, pct=False):
            if x is None:
                return "n/a"
            return f"{100 * x:.2f}%" if pct else f"{x:.4f}"

        lines = [
            f"traces: {self.trace_count}  refusals: {self.refusal_count}  errors: {self.error_count}",
            f"relevance accuracy: {fmt(self.relevance_accuracy, pct=True)}",
            f"top-1 kind accuracy: {fmt(self.kind_accuracy, pct=True)}",
            f"mean similarity: {fmt(self.mean_similarity)}",
            f"derived fraction: mean {fmt(self.derived_mean)} std {fmt(self.derived_std)}"
            f" (invalid: {self.invalid_grounding_count})",
            f"retained fraction: mean {fmt(self.retained_mean)} std {fmt(self.retained_std)}"
            f" (invalid: {self.invalid_retention_count})",
        ]
        if self.vote_summary is not None:
            lines.append(self.vote_summary.render_text())
        return "\n".join(lines)


def build_report(rows: list[EvalRow]) -> EvalReport:
    report = EvalReport(rows=rows)
    report.trace_count = sum(1 for r in rows if r.trace_id is not None)
    report.refusal_count = sum(1 for r in rows if r.refused)
    report.error_count = sum(1 for r in rows if r.error is not None)
    relevance = [r.relevance_ok for r in rows if r.relevance_ok is not None]
    if relevance:
        report.relevance_accuracy = sum(relevance) / len(relevance)
    kinds = [r.kind_ok for r in rows if r.kind_ok is not None]
    if kinds:
        report.kind_accuracy = sum(kinds) / len(kinds)
    similarities = [r.similarity for r in rows if r.similarity is not None]
    if similarities:
        report.mean_similarity = float(np.mean(similarities))
    derived = [r.grounding.derived_fraction for r in rows if r.grounding and r.grounding.valid]
    report.derived_mean, report.derived_std = _mean_std(derived)
    report.invalid_grounding_count = sum(1 for r in rows if r.grounding and not r.grounding.valid)
    retained = [r.retention.retained_fraction for r in rows if r.retention and r.retention.valid]
    report.retained_mean, report.retained_std = _mean_std(retained)
    report.invalid_retention_count = sum(1 for r in rows if r.retention and not r.retention.valid)
    for row in rows:
        report.per_category[row.question.category] = (
            report.per_category.get(row.question.category, 0) + 1
        )
    return report


# ----- votes -----------------------------------------------------------------


@dataclass(frozen=True)
class VoteRecord:
    question_ref: str
    evaluator_id: str
    preferred: frozenset[str]
    category: str
    skill: str
    metric_ratings: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        if self.metric_ratings:
            names = tuple(sorted(name for name, _ in self.metric_ratings))
            if names != tuple(sorted(VOTE_METRICS)):
                raise ValueError(
                    f"metric ratings must cover exactly {sorted(VOTE_METRICS)}, got {names}"
                )


def load_votes(path: Path) -> list[VoteRecord]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    records = []
    for entry in data["records"]:
        ratings = entry.get("metric_ratings") or {}
        records.append(
            VoteRecord(
                question_ref=entry["question"],
                evaluator_id=entry["evaluator"],
                preferred=frozenset(entry["preferred"]),
                category=entry["category"],
                skill=entry["skill"],
                metric_ratings=tuple(sorted(ratings.items())),
            )
        )
    return records


def agreement_index(votes: list[VoteRecord], system: str) -> float:
    """Percentage of records whose preferred set contains the system."""
    if not votes:
        raise ValueError("agreement_index requires at least one vote record")
    count = sum(1 for v in votes if system in v.preferred)
    return round(100.0 * count / len(votes), 2)


def tally_votes(votes: list[VoteRecord]) -> dict[str, dict[str, dict[str, int]]]:
    """Per-(system, category) and per-(system, skill) vote counts."""
    systems = sorted({s for v in votes for s in v.preferred})
    tallies: dict[str, dict[str, dict[str, int]]] = {
        s: {"category": {}, "skill": {}, "total": {}} for s in systems
    }
    for vote in votes:
        for system in vote.preferred:
            bucket = tallies[system]
            bucket["category"][vote.category] = bucket["category"].get(vote.category, 0) + 1
            bucket["skill"][vote.skill] = bucket["skill"].get(vote.skill, 0) + 1
            bucket["total"]["votes"] = bucket["total"].get("votes", 0) + 1
    return tallies


@dataclass
class VoteSummary:
    record_count: int
    agreement: dict[str, float]
    tallies: dict[str, dict[str, dict[str, int]]]

    def to_dict(self) -> dict:
        return {
            "record_count": self.record_count,
            "agreement": self.agreement,
            "tallies": self.tallies,
        }

    def render_text(self) -> str:
        lines = [f"vote records: {self.record_count}"]
        for system in sorted(self.agreement):
            lines.append(f"agreement index [{system}]: {self.agreement[system]:.2f}")
        for system, bucket in sorted(self.tallies.items()):
            cats = ", ".join(f"{c}={n}" for c, n in sorted(bucket["category"].items()))
            skills = ", ".join(f"{s}={n}" for s, n in sorted(bucket["skill"].items()))
            lines.append(f"  {system}: by category: {cats}")
            lines.append(f"  {system}: by skill: {skills}")
        return "\n".join(lines)


def summarize_votes(votes: list[VoteRecord]) -> VoteSummary:
    systems = sorted({s for v in votes for s in v.preferred})
    return VoteSummary(
        record_count=len(votes),
        agreement={s: agreement_index(votes, s) for s in systems},
        tallies=tally_votes(votes),
    )
