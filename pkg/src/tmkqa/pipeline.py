"""The answer pipeline: scope gate, complexity grading, retrieval,
iterative response generation, and response optimisation.

Every stage runs through the gateway and lands in the knowledge trace.
Questions the gate rejects short-circuit to a fixed refusal, with no
retrieval and no generation calls.  The same stage sequence runs in both
modes; ``tmk`` retrieves structured component documents, ``baseline``
retrieves unstructured text chunks.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from string import Template

from .documents import (
    BASELINE_MODE,
    TMK_MODE,
    Corpus,
    TmkDocument,
    chunk_text,
    render_documents,
)
from .embedding import EmbeddingProvider
from .errors import IndexMissingError, UnknownSkillError
from .gateway import ChatRequest, LlmGateway, Tag
from .index import VectorIndex, build_index, top_k
from .prompts import PromptLibrary
from .tmk.types import TmkModel
from .traces import KnowledgeTrace, KScore, RelevanceVerdict, TraceBuilder, TraceStore

logger = logging.getLogger(__name__)

DEFAULT_BLACKLIST = (
    "based on the previous information",
    "as mentioned earlier",
    "in the previous response",
)

DEFAULT_REFUSAL = "This question is outside the scope of $skill_name."

_RELEVANT_RE = re.compile(r"^\s*RELEVANT\s*:\s*(yes|no)\s*$", re.IGNORECASE | re.MULTILINE)
_MATCHES_RE = re.compile(r"^\s*MATCHES\s*:\s*(.+)$", re.IGNORECASE | re.MULTILINE)
_RATIONALE_RE = re.compile(r"^\s*RATIONALE\s*:\s*(.+)$", re.IGNORECASE | re.MULTILINE)

VERBOSITY_INSTRUCTIONS = {
    1: "Answer in at most two short lines.",
    2: "Answer briefly, in a few sentences.",
    3: "Answer in one clear paragraph.",
    4: "Answer thoroughly, using structured paragraphs or bullet points where they help.",
}


@dataclass(frozen=True)
class AnsweredQuestion:
    final_response: str
    trace_id: str


@dataclass(frozen=True)
class PipelineSettings:
    blacklist: tuple[str, ...] = DEFAULT_BLACKLIST
    refusal_template: str = DEFAULT_REFUSAL
    kscore_fallback: int = 2
    baseline_chunk_tokens: int = 300
    baseline_overlap_tokens: int = 50

    def refusal_for(self, skill_name: str) -> str:
        return Template(self.refusal_template).safe_substitute(skill_name=skill_name)


@dataclass
class SkillRuntime:
    """Everything loaded for one skill: model, corpora, indexes per mode."""

    model: TmkModel
    baseline_text: str | None = None
    corpora: dict[str, Corpus] = field(default_factory=dict)
    indexes: dict[str, VectorIndex] = field(default_factory=dict)


def _parse_relevance(text: str) -> RelevanceVerdict | None:
    flag_match = _RELEVANT_RE.search(text)
    if flag_match is None:
        return None
    relevant = flag_match.group(1).lower() == "yes"
    matches: tuple[str, ...] = ()
    match_line = _MATCHES_RE.search(text)
    if match_line is not None:
        raw = match_line.group(1).strip()
        if raw.lower() != "none":
            matches = tuple(p.strip() for p in raw.split(";") if p.strip())
    rationale_match = _RATIONALE_RE.search(text)
    rationale = rationale_match.group(1).strip() if rationale_match else ""
    if relevant and not matches:
        return None  # yes without named components is not a usable verdict
    if not relevant:
        matches = ()
    return RelevanceVerdict(relevant=relevant, matched_component_names=matches, rationale=rationale)


def strip_phrases(text: str, phrases: tuple[str, ...]) -> str:
    """Mechanically delete each phrase, case-insensitively, tidying spaces."""
    for phrase in phrases:
        text = re.sub(re.escape(phrase), "", text, flags=re.IGNORECASE)
    text = re.sub(r"[ \t]{2,}", " ", text)
    text = re.sub(r" +([,.;:!?])", r"\1", text)
    text = re.sub(r"(^|\n) +", r"\1", text)
    return text.strip()


def find_phrases(text: str, phrases: tuple[str, ...]) -> list[str]:
    lowered = text.lower()
    return [p for p in phrases if p.lower() in lowered]


class AnswerEngine:
    """Shared immutable environment serving per-request answer pipelines."""

    def __init__(
        self,
        gateway: LlmGateway,
        retrieval_provider: EmbeddingProvider,
        prompts: PromptLibrary | None = None,
        settings: PipelineSettings | None = None,
        trace_store: TraceStore | None = None,
    ):
        self.gateway = gateway
        self.retrieval_provider = retrieval_provider
        self.prompts = prompts if prompts is not None else PromptLibrary.packaged()
        self.settings = settings if settings is not None else PipelineSettings()
        self.trace_store = trace_store if trace_store is not None else TraceStore()
        self._skills: dict[str, SkillRuntime] = {}

    # ----- skill registry -------------------------------------------------

    def add_skill(self, model: TmkModel, baseline_text: str | None = None) -> None:
        self._skills[model.skill_id] = SkillRuntime(model=model, baseline_text=baseline_text)

    def skill_ids(self) -> list[str]:
        return sorted(self._skills)

    def model(self, skill_id: str) -> TmkModel:
        return self._runtime(skill_id).model

    def _runtime(self, skill_id: str) -> SkillRuntime:
        try:
            return self._skills[skill_id]
        except KeyError:
            raise UnknownSkillError(f"no skill loaded with id '{skill_id}'") from None

    def corpus(self, skill_id: str, mode: str = TMK_MODE) -> Corpus:
        runtime = self._runtime(skill_id)
        if mode not in runtime.corpora:
            if mode == TMK_MODE:
                runtime.corpora[mode] = render_documents(runtime.model)
            elif mode == BASELINE_MODE:
                if runtime.baseline_text is None:
                    raise IndexMissingError(
                        f"skill '{skill_id}' has no baseline text configured"
                    )
                runtime.corpora[mode] = chunk_text(
                    runtime.baseline_text,
                    skill_id,
                    chunk_size=self.settings.baseline_chunk_tokens,
                    overlap=self.settings.baseline_overlap_tokens,
                )
            else:
                raise IndexMissingError(f"unknown mode '{mode}'")
        return runtime.corpora[mode]

    def index(self, skill_id: str, mode: str = TMK_MODE) -> VectorIndex:
        runtime = self._runtime(skill_id)
        if mode not in runtime.indexes:
            runtime.indexes[mode] = build_index(self.corpus(skill_id, mode), self.retrieval_provider)
        return runtime.indexes[mode]

    # ----- pipeline stages ------------------------------------------------

    def assess_relevance(
        self, question: str, model: TmkModel, recorder=None
    ) -> tuple[RelevanceVerdict, bool]:
        """Scope-gate one question; returns (verdict, used_reprompt)."""
        if not question.strip():
            raise ValueError("question must not be empty")
        names = self.corpus(model.skill_id, TMK_MODE).component_names()
        system, user = self.prompts.get("relevance").render(
            skill_name=model.skill_name,
            component_names="\n".join(f"- {n}" for n in names),
            question=question,
        )
        request = ChatRequest(system_prompt=system, user_message=user, tag=Tag.RELEVANCE)
        verdict = _parse_relevance(self.gateway.complete(request, on_call=recorder).text)
        if verdict is not None:
            return verdict, False
        strict = ChatRequest(
            system_prompt=system
            + "\nYour previous reply did not follow the required format. "
            "Reply again using exactly the three lines described.",
            user_message=user,
            tag=Tag.RELEVANCE,
        )
        verdict = _parse_relevance(self.gateway.complete(strict, on_call=recorder).text)
        if verdict is not None:
            return verdict, True
        # Fail closed: an unreadable gate verdict means we decline to answer.
        return (
            RelevanceVerdict(relevant=False, rationale="gate output unparseable; failing closed"),
            True,
        )

    def assess_complexity(self, question: str, recorder=None) -> tuple[KScore, bool]:
        """Grade expected answer depth 1..4; returns (kscore, used_fallback)."""
        if not question.strip():
            raise ValueError("question must not be empty")
        system, user = self.prompts.get("kscore").render(question=question)
        request = ChatRequest(system_prompt=system, user_message=user, tag=Tag.KSCORE)
        text = self.gateway.complete(request, on_call=recorder).text.strip()
        try:
            value = int(text)
        except ValueError:
            return KScore(self.settings.kscore_fallback), True
        if not 1 <= value <= 4:
            return KScore(self.settings.kscore_fallback), True
        return KScore(value), False

    def retrieve(
        self, question: str, index: VectorIndex, kscore: KScore
    ) -> list[tuple[str, float]]:
        """Top min(k, |index|) documents for the question."""
        if len(index) == 0:
            return []
        query = self.retrieval_provider.embed(question)
        return top_k(index, query, min(kscore.value, len(index)))

    def generate_response(
        self, question: str, skill_name: str, docs: list[TmkDocument], recorder=None
    ) -> list[str]:
        """Initial response from docs[0], then one refinement per further doc."""
        if not docs:
            raise ValueError("generate_response requires at least one document")
        system, user = self.prompts.get("generate").render(
            skill_name=skill_name, question=question, document=docs[0].body
        )
        first = self.gateway.complete(
            ChatRequest(system_prompt=system, user_message=user, tag=Tag.GENERATE),
            on_call=recorder,
        ).text
        responses = [first]
        for doc in docs[1:]:
            system, user = self.prompts.get("refine").render(
                skill_name=skill_name,
                question=question,
                previous_response=responses[-1],
                document=doc.body,
            )
            refined = self.gateway.complete(
                ChatRequest(system_prompt=system, user_message=user, tag=Tag.REFINE),
                on_call=recorder,
            ).text
            responses.append(refined)
        return responses

    def optimize_response(
        self, question: str, intermediate: str, kscore: KScore, recorder=None
    ) -> tuple[str, list[str]]:
        """Final rewrite; guarantees the output is free of blacklisted phrases.

        Returns (text, notes): notes mention a corrective reprompt or a
        mechanical deletion when either was needed.
        """
        if not intermediate.strip():
            raise ValueError("intermediate response must not be empty")
        banned = self.settings.blacklist
        system, user = self.prompts.get("optimize").render(
            question=question,
            verbosity_instruction=VERBOSITY_INSTRUCTIONS[kscore.value],
            banned_phrases="; ".join(f'"{p}"' for p in banned),
            response=intermediate,
        )
        text = self.gateway.complete(
            ChatRequest(system_prompt=system, user_message=user, tag=Tag.OPTIMIZE),
            on_call=recorder,
        ).text
        notes: list[str] = []
        if find_phrases(text, banned):
            notes.append("optimizer output contained a banned phrase; reprompted")
            retry_system = (
                system
                + "\nYour previous rewrite still contained a banned phrase. "
                "Rewrite the answer again without any of the banned phrases."
            )
            text = self.gateway.complete(
                ChatRequest(system_prompt=retry_system, user_message=text, tag=Tag.OPTIMIZE),
                on_call=recorder,
            ).text
        leftovers = find_phrases(text, banned)
        if leftovers:
            notes.append(
                "banned phrases deleted mechanically: " + ", ".join(sorted(leftovers))
            )
            text = strip_phrases(text, banned)
        return text, notes

    # ----- full pipeline --------------------------------------------------

    def answer(self, question: str, skill_id: str, mode: str = TMK_MODE) -> AnsweredQuestion:
        """Run the full pipeline and persist one complete knowledge trace."""
        runtime = self._runtime(skill_id)
        model = runtime.model
        corpus = self.corpus(skill_id, mode)
        index = self.index(skill_id, mode)

        builder = TraceBuilder(skill_id=skill_id, question=question, mode=mode)
        recorder = builder.record_call
        refusal = self.settings.refusal_for(model.skill_name)

        try:
            verdict, reprompted = self.assess_relevance(question, model, recorder)
            builder.verdict = verdict
            if reprompted:
                builder.note("relevance gate needed a reprompt")
            if not verdict.relevant:
                return self._finish(builder, refusal)

            kscore, fell_back = self.assess_complexity(question, recorder)
            builder.kscore = kscore
            if fell_back:
                builder.note(f"k-score unparseable; fell back to {kscore.value}")

            retrieved = self.retrieve(question, index, kscore)
            builder.retrieved = list(retrieved)
            if not retrieved:
                builder.note("index is empty; declining to answer")
                builder.kscore = kscore
                return self._finish(builder, refusal)

            docs_by_id = corpus.by_id()
            docs = [docs_by_id[doc_id] for doc_id, _ in retrieved]
            intermediates = self.generate_response(question, model.skill_name, docs, recorder)
            builder.intermediates = list(intermediates)

            final, notes = self.optimize_response(question, intermediates[-1], kscore, recorder)
            for note in notes:
                builder.note(note)
            return self._finish(builder, final)
        except (UnknownSkillError, IndexMissingError, ValueError):
            raise
        except Exception as exc:
            logger.exception("pipeline aborted for skill %s", skill_id)
            if builder.verdict is None:
                builder.verdict = RelevanceVerdict(
                    relevant=False, rationale="pipeline aborted before the gate verdict"
                )
            trace = builder.build("", error=f"{type(exc).__name__}: {exc}")
            self.trace_store.save(trace)
            raise

    def _finish(self, builder: TraceBuilder, final: str) -> AnsweredQuestion:
        trace = builder.build(final)
        self.trace_store.save(trace)
        return AnsweredQuestion(final_response=final, trace_id=trace.trace_id)

    def trace(self, trace_id: str) -> KnowledgeTrace | None:
        return self.trace_store.load(trace_id)
