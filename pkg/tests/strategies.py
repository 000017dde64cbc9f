"""Hypothesis strategies for generating skill models and FSMs."""

from __future__ import annotations

import string

from hypothesis import strategies as st

from tmkqa.tmk.types import (
    Concept,
    Fsm,
    Knowledge,
    Method,
    Parameter,
    Relation,
    State,
    Task,
    TmkModel,
    Transition,
)

identifiers = st.from_regex(r"[a-z][a-z0-9-]{0,7}", fullmatch=True)

_TEXT_ALPHABET = string.ascii_letters + string.digits + " .,:;()&!?'-_/"
free_text = (
    st.text(alphabet=_TEXT_ALPHABET, min_size=1, max_size=60)
    .map(str.strip)
    .filter(bool)
)

parameters = st.builds(Parameter, name=identifiers, type_name=identifiers)


@st.composite
def fsms(draw, max_states: int = 5) -> Fsm:
    n = draw(st.integers(min_value=1, max_value=max_states))
    ids = [f"s{i}" for i in range(n)]
    states = tuple(State(state_id=sid, description=draw(free_text)) for sid in ids)
    transition_count = draw(st.integers(min_value=0, max_value=2 * n))
    transitions = tuple(
        Transition(
            from_state=draw(st.sampled_from(ids)),
            label=draw(identifiers),
            to_state=draw(st.sampled_from(ids)),
        )
        for _ in range(transition_count)
    )
    accepting = frozenset(draw(st.sets(st.sampled_from(ids), max_size=n)))
    return Fsm(
        states=states,
        start_state=ids[0],
        accepting_states=accepting,
        transitions=transitions,
    )


@st.composite
def models(draw) -> TmkModel:
    """Structurally well-formed models; semantic validity not guaranteed."""
    task_count = draw(st.integers(min_value=1, max_value=3))
    method_count = draw(st.integers(min_value=0, max_value=3))
    method_ids = [f"m{i}" for i in range(method_count)]
    task_ids = [f"t{i}" for i in range(task_count)]

    def task_for(tid: str) -> Task:
        return Task(
            task_id=tid,
            goal=draw(free_text),
            inputs=tuple(draw(st.lists(parameters, max_size=2))),
            givens=tuple(draw(st.lists(free_text, max_size=2))),
            makes=tuple(draw(st.lists(free_text, max_size=2))),
            outputs=tuple(draw(st.lists(parameters, max_size=2))),
            method_refs=tuple(draw(st.lists(st.sampled_from(method_ids), max_size=2)))
            if method_ids
            else (),
            is_root=draw(st.booleans()),
        )

    def method_for(mid: str) -> Method:
        fsm = draw(fsms(max_states=4))
        if draw(st.booleans()) and fsm.states:
            target = draw(st.sampled_from(task_ids))
            states = tuple(
                State(s.state_id, s.description, sub_goal=target if i == 0 else s.sub_goal)
                for i, s in enumerate(fsm.states)
            )
            fsm = Fsm(states, fsm.start_state, fsm.accepting_states, fsm.transitions)
        return Method(method_id=mid, organizer=fsm)

    concepts = tuple(
        Concept(
            concept_id=f"c{i}",
            name=draw(free_text),
            properties=tuple(draw(st.lists(parameters, max_size=2))),
        )
        for i in range(draw(st.integers(min_value=0, max_value=3)))
    )
    concept_ids = [c.concept_id for c in concepts]
    relations = tuple(
        Relation(
            subject=draw(st.sampled_from(concept_ids)),
            relation_name=draw(identifiers),
            object=draw(st.sampled_from(concept_ids)),
        )
        for _ in range(draw(st.integers(min_value=0, max_value=2)))
    ) if concept_ids else ()

    return TmkModel(
        skill_id=draw(identifiers),
        skill_name=draw(free_text),
        tasks=tuple(task_for(t) for t in task_ids),
        methods=tuple(method_for(m) for m in method_ids),
        knowledge=Knowledge(
            concepts=concepts,
            relations=relations,
            ground_truths=tuple(draw(st.lists(free_text, max_size=2))),
        ),
    )
