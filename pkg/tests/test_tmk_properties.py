"""Property suites over generated models and FSMs."""

from __future__ import annotations

from collections import Counter, deque

from hypothesis import given, settings

from tmkqa.tmk.parser import parse_tmk, serialize
from tmkqa.tmk.types import DefectCode
from tmkqa.tmk.validator import validate

from .strategies import fsms, models


@settings(max_examples=100, deadline=None)
@given(models())
def test_parse_serialize_roundtrip(model):
    assert parse_tmk(serialize(model)) == model


@settings(max_examples=100, deadline=None)
@given(models())
def test_validate_is_total(model):
    validate(model)  # must never raise, whatever the semantic defects


def _bfs_reachable(fsm) -> set[str]:
    """Independent breadth-first oracle over the transition graph."""
    adjacency: dict[str, set[str]] = {}
    for t in fsm.transitions:
        adjacency.setdefault(t.from_state, set()).add(t.to_state)
    seen = {fsm.start_state}
    queue = deque([fsm.start_state])
    while queue:
        node = queue.popleft()
        for nxt in sorted(adjacency.get(node, ())):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def _wrap(fsm):
    from tmkqa.tmk.types import Method, Task, TmkModel

    return TmkModel(
        skill_id="f",
        skill_name="F",
        tasks=(Task(task_id="t", goal="g", method_refs=("m",), is_root=True),),
        methods=(Method(method_id="m", organizer=fsm),),
    )


@settings(max_examples=150, deadline=None)
@given(fsms(max_states=50))
def test_reachability_defects_match_bfs_oracle(fsm):
    report = validate(_wrap(fsm))
    flagged = {
        d.location.rsplit(".", 1)[-1]
        for d in report.defects
        if d.code is DefectCode.UNREACHABLE_STATE
    }
    reachable = _bfs_reachable(fsm)
    expected = {s.state_id for s in fsm.states} - reachable
    assert flagged == expected


@settings(max_examples=150, deadline=None)
@given(fsms(max_states=20))
def test_determinism_check_exact(fsm):
    report = validate(_wrap(fsm))
    has_defect = any(
        d.code is DefectCode.NONDETERMINISTIC_TRANSITION for d in report.defects
    )
    pair_counts = Counter((t.from_state, t.label) for t in fsm.transitions)
    assert has_defect == any(n > 1 for n in pair_counts.values())
    if not has_defect:
        assert all(n <= 1 for n in pair_counts.values())


def _kahn_topological(edges: dict[str, set[str]]) -> bool:
    """Oracle: Kahn's algorithm succeeds iff the graph is acyclic."""
    indegree = {node: 0 for node in edges}
    for targets in edges.values():
        for target in targets:
            indegree[target] = indegree.get(target, 0) + 1
    queue = deque(n for n, d in indegree.items() if d == 0)
    emitted = 0
    while queue:
        node = queue.popleft()
        emitted += 1
        for target in edges.get(node, ()):
            indegree[target] -= 1
            if indegree[target] == 0:
                queue.append(target)
    return emitted == len(indegree)


@settings(max_examples=150, deadline=None)
@given(models())
def test_accepted_models_admit_topological_order(model):
    from tmkqa.tmk.validator import _decomposition_edges

    report = validate(model)
    cycle_flagged = any(d.code is DefectCode.DECOMPOSITION_CYCLE for d in report.defects)
    acyclic = _kahn_topological(_decomposition_edges(model))
    assert cycle_flagged == (not acyclic)
