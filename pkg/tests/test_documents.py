from __future__ import annotations

import re

import pytest
from hypothesis import given, settings, strategies as st

from tmkqa.documents import chunk_text, load_corpus, render_documents, save_corpus
from tmkqa.errors import ModelValidationError
from tmkqa.tmk.parser import parse_tmk

from .test_tmk_parser import MINIMAL


def test_minimal_model_renders_exactly_three_documents():
    corpus = render_documents(parse_tmk(MINIMAL))
    assert len(corpus) == 3
    assert [d.component_kind for d in corpus.documents] == ["task", "method", "knowledge"]


def test_popp_exemplar_renders_expected_components(popp_model):
    corpus = render_documents(popp_model)
    assert len(corpus) >= 3
    names = corpus.component_names()
    assert "paint ladder and ceiling" in names
    assert "partial order planning" in names
    kinds = {d.component_name: d.component_kind for d in corpus.documents}
    assert kinds["paint ladder and ceiling"] == "task"
    assert kinds["partial order planning"] == "method"


def test_document_count_matches_component_walk(sort_model):
    # Oracle: count components directly off the model.
    knowledge = sort_model.knowledge
    group_docs = 1 if (knowledge.relations or knowledge.ground_truths) else 0
    expected = (
        len(sort_model.tasks)
        + len(sort_model.methods)
        + len(knowledge.concepts)
        + group_docs
    )
    assert len(render_documents(sort_model)) == expected


def test_component_names_appear_verbatim_in_bodies(popp_model, sort_model):
    for model in (popp_model, sort_model):
        for doc in render_documents(model).documents:
            assert doc.component_name in doc.body


def test_task_body_names_its_methods(popp_model):
    corpus = render_documents(popp_model)
    task_doc = corpus.by_id()["partial-order-planning/task/paint-ladder-and-ceiling"]
    assert "partial order planning" in task_doc.body  # resolved cross-reference
    assert "Goal:" in task_doc.body
    assert "Makes:" in task_doc.body


def test_rendering_is_deterministic(popp_model):
    first = render_documents(popp_model)
    second = render_documents(popp_model)
    assert first == second
    assert [d.body for d in first.documents] == [d.body for d in second.documents]


def test_doc_ids_stable_and_unique(popp_model):
    corpus = render_documents(popp_model)
    ids = [d.doc_id for d in corpus.documents]
    assert len(set(ids)) == len(ids)
    assert all(i.startswith("partial-order-planning/") for i in ids)


def test_unvalidated_model_rejected():
    broken = parse_tmk(MINIMAL.replace("  root: true\n", ""))
    with pytest.raises(ModelValidationError):
        render_documents(broken)


def test_corpus_roundtrips_through_disk(tmp_path, popp_model):
    corpus = render_documents(popp_model)
    save_corpus(corpus, tmp_path / "c")
    assert load_corpus(tmp_path / "c") == corpus


# --- chunking ----------------------------------------------------------------

_TOKEN_RE = re.compile(r"\S+")


def _reassemble(raw: str, chunks: list[str], overlap: int) -> str:
    """Oracle: drop each later chunk's overlap prefix and concatenate."""
    if not chunks:
        return ""
    out = [chunks[0]]
    for chunk in chunks[1:]:
        spans = [m.span() for m in _TOKEN_RE.finditer(chunk)]
        if overlap == 0 or len(spans) <= overlap:
            cut = 0 if overlap == 0 else len(chunk)
        else:
            cut = spans[overlap][0]
        out.append(chunk[cut:])
    return "".join(out)


def test_exact_fit_yields_single_identical_chunk():
    raw = " ".join(f"w{i}" for i in range(10))
    corpus = chunk_text(raw, "s", chunk_size=10, overlap=2)
    assert len(corpus) == 1
    assert corpus.documents[0].body == raw


def test_double_size_no_overlap_concatenates_back():
    raw = " ".join(f"w{i}" for i in range(20))
    corpus = chunk_text(raw, "s", chunk_size=10, overlap=0)
    assert len(corpus) == 2
    assert "".join(d.body for d in corpus.documents) == raw


def test_empty_input_yields_empty_corpus():
    corpus = chunk_text("", "s", chunk_size=10, overlap=0)
    assert len(corpus) == 0
    assert corpus.mode == "baseline"


def test_chunk_parameter_validation():
    with pytest.raises(ValueError):
        chunk_text("a b c", "s", chunk_size=5, overlap=5)
    with pytest.raises(ValueError):
        chunk_text("a b c", "s", chunk_size=5, overlap=-1)


@settings(max_examples=100, deadline=None)
@given(
    raw=st.text(alphabet=" \nabcdefg.", min_size=0, max_size=400),
    chunk_size=st.integers(min_value=2, max_value=30),
    overlap_fraction=st.floats(min_value=0.0, max_value=0.9),
)
def test_chunk_coverage_and_reassembly(raw, chunk_size, overlap_fraction):
    overlap = min(int(chunk_size * overlap_fraction), chunk_size - 1)
    corpus = chunk_text(raw, "s", chunk_size=chunk_size, overlap=overlap)
    chunks = [d.body for d in corpus.documents]
    if not raw:
        assert chunks == []
        return
    assert _reassemble(raw, chunks, overlap) == raw
    # Coverage: every character position falls inside some chunk.
    covered = 0
    for chunk in chunks:
        at = raw.index(chunk, max(0, covered - len(chunk)))
        covered = max(covered, at + len(chunk))
    assert covered == len(raw)


def test_baseline_corpus_kind_and_ids():
    raw = " ".join(f"w{i}" for i in range(25))
    corpus = chunk_text(raw, "skill-x", chunk_size=10, overlap=2)
    assert all(d.component_kind == "text-chunk" for d in corpus.documents)
    assert corpus.documents[0].doc_id == "skill-x/chunk/0000"
