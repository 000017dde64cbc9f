"""Semantic validation of parsed skill models.

``validate`` is total over parser output: it never raises, it returns a
report listing every violated invariant.  A model with zero error-severity
defects is accepted by every downstream module.

Checks, in order:

* root task designation and identifier uniqueness
* reference resolution (task->method, state->sub-goal task, relation
  endpoints, concept references inside condition expressions)
* FSM structure per method: start/accepting membership, determinism,
  reachability, a reachable accepting state
* acyclicity of the task -> method -> sub-goal decomposition graph
* hygiene warnings: methods no task uses, concepts nothing refers to

Condition expressions are opaque except for one rule: alphabetic
identifiers inside parentheses (``Painted(Ladder)`` -> ``Ladder``) must
resolve to a declared concept, matched case-insensitively against concept
ids and names with spaces/underscores treated as hyphens.
"""

from __future__ import annotations

import re
from collections import Counter

from ..errors import ModelValidationError
from .types import (
    Defect,
    DefectCode,
    Fsm,
    Severity,
    TmkModel,
    ValidationReport,
)

_PAREN_RE = re.compile(r"\(([^()]*)\)")
_ARG_RE = re.compile(r"[A-Za-z][A-Za-z0-9_-]*")


def _canon(name: str) -> str:
    return re.sub(r"[\s_]+", "-", name.strip().lower())


def expression_concept_refs(expression: str) -> list[str]:
    """Extract the concept references of a condition expression.

    Only alphabetic arguments inside parentheses count; predicates and
    bare words outside parentheses are opaque.
    """
    refs: list[str] = []
    for group in _PAREN_RE.findall(expression):
        refs.extend(_ARG_RE.findall(group))
    return refs


def validate(model: TmkModel) -> ValidationReport:
    """Check every model invariant; defects are data, not failures."""
    defects: list[Defect] = []

    def add(severity: Severity, code: DefectCode, location: str, message: str) -> None:
        defects.append(Defect(severity, code, location, message))

    task_ids = [t.task_id for t in model.tasks]
    method_ids = [m.method_id for m in model.methods]
    concept_ids = [c.concept_id for c in model.knowledge.concepts]

    for tid, n in sorted(Counter(task_ids).items()):
        if n > 1:
            add(Severity.ERROR, DefectCode.DUPLICATE_TASK_ID, f"task.{tid}",
                f"task id '{tid}' declared {n} times")
    for mid, n in sorted(Counter(method_ids).items()):
        if n > 1:
            add(Severity.ERROR, DefectCode.DUPLICATE_METHOD_ID, f"method.{mid}",
                f"method id '{mid}' declared {n} times")
    for cid, n in sorted(Counter(concept_ids).items()):
        if n > 1:
            add(Severity.ERROR, DefectCode.DUPLICATE_CONCEPT_ID, f"knowledge.concept.{cid}",
                f"concept id '{cid}' declared {n} times")

    if not model.root_tasks():
        add(Severity.ERROR, DefectCode.MISSING_ROOT_TASK, "model",
            "no task is designated as the root task")

    task_set = set(task_ids)
    method_set = set(method_ids)
    concept_lookup = {_canon(c.concept_id) for c in model.knowledge.concepts}
    concept_lookup |= {_canon(c.name) for c in model.knowledge.concepts}

    def check_exprs(exprs: tuple[str, ...], location: str) -> None:
        for expr in exprs:
            for ref in expression_concept_refs(expr):
                if _canon(ref) not in concept_lookup:
                    add(Severity.ERROR, DefectCode.UNKNOWN_CONCEPT_REFERENCE, location,
                        f"expression {expr!r} references undeclared concept '{ref}'")

    for task in model.tasks:
        loc = f"task.{task.task_id}"
        for ref in task.method_refs:
            if ref not in method_set:
                add(Severity.ERROR, DefectCode.DANGLING_METHOD_REF, loc,
                    f"task '{task.task_id}' references undefined method '{ref}'")
        check_exprs(task.givens, loc)
        check_exprs(task.makes, loc)

    for method in model.methods:
        _check_fsm(method.method_id, method.organizer, task_set, add)

    for concept in model.knowledge.concepts:
        loc = f"knowledge.concept.{concept.concept_id}"
        for pname, n in sorted(Counter(p.name for p in concept.properties).items()):
            if n > 1:
                add(Severity.ERROR, DefectCode.DUPLICATE_PROPERTY, loc,
                    f"property '{pname}' declared {n} times on concept '{concept.concept_id}'")

    for i, rel in enumerate(model.knowledge.relations):
        loc = f"knowledge.relation[{i}]"
        for endpoint in (rel.subject, rel.object):
            if _canon(endpoint) not in concept_lookup:
                add(Severity.ERROR, DefectCode.DANGLING_RELATION_ENDPOINT, loc,
                    f"relation '{rel.subject} {rel.relation_name} {rel.object}' "
                    f"names undeclared concept '{endpoint}'")

    check_exprs(model.knowledge.ground_truths, "knowledge.truths")

    _check_decomposition_cycles(model, add)

    used_methods = {ref for t in model.tasks for ref in t.method_refs}
    for method in model.methods:
        if method.method_id not in used_methods:
            add(Severity.WARNING, DefectCode.UNUSED_METHOD, f"method.{method.method_id}",
                f"method '{method.method_id}' is not referenced by any task")

    referenced_concepts = set()
    for rel in model.knowledge.relations:
        referenced_concepts.add(_canon(rel.subject))
        referenced_concepts.add(_canon(rel.object))
    all_exprs = list(model.knowledge.ground_truths)
    for task in model.tasks:
        all_exprs.extend(task.givens)
        all_exprs.extend(task.makes)
    for expr in all_exprs:
        referenced_concepts.update(_canon(r) for r in expression_concept_refs(expr))
    for concept in model.knowledge.concepts:
        if (_canon(concept.concept_id) not in referenced_concepts
                and _canon(concept.name) not in referenced_concepts):
            add(Severity.WARNING, DefectCode.ISOLATED_CONCEPT,
                f"knowledge.concept.{concept.concept_id}",
                f"concept '{concept.concept_id}' appears in no relation or expression")

    return ValidationReport(defects=tuple(defects))


def _check_fsm(method_id: str, fsm: Fsm, task_set: set[str], add) -> None:
    loc = f"method.{method_id}"
    state_ids = [s.state_id for s in fsm.states]
    state_set = set(state_ids)

    for sid, n in sorted(Counter(state_ids).items()):
        if n > 1:
            add(Severity.ERROR, DefectCode.DUPLICATE_STATE_ID, f"{loc}.state.{sid}",
                f"state id '{sid}' declared {n} times in method '{method_id}'")

    if fsm.start_state not in state_set:
        add(Severity.ERROR, DefectCode.UNKNOWN_START_STATE, loc,
            f"start state '{fsm.start_state}' is not defined in method '{method_id}'")
    for sid in sorted(fsm.accepting_states):
        if sid not in state_set:
            add(Severity.ERROR, DefectCode.UNKNOWN_ACCEPTING_STATE, loc,
                f"accepting state '{sid}' is not defined in method '{method_id}'")

    for i, t in enumerate(fsm.transitions):
        for endpoint in (t.from_state, t.to_state):
            if endpoint not in state_set:
                add(Severity.ERROR, DefectCode.UNKNOWN_TRANSITION_ENDPOINT,
                    f"{loc}.transition[{i}]",
                    f"transition '{t.from_state} -> {t.to_state} [{t.label}]' "
                    f"names undefined state '{endpoint}'")

    seen_pairs = Counter((t.from_state, t.label) for t in fsm.transitions)
    for (frm, label), n in sorted(seen_pairs.items()):
        if n > 1:
            add(Severity.ERROR, DefectCode.NONDETERMINISTIC_TRANSITION, loc,
                f"{n} transitions leave state '{frm}' on condition '{label}'")

    for state in fsm.states:
        if state.sub_goal is not None and state.sub_goal not in task_set:
            add(Severity.ERROR, DefectCode.DANGLING_SUBGOAL, f"{loc}.state.{state.state_id}",
                f"state '{state.state_id}' has sub-goal '{state.sub_goal}' "
                "which names no defined task")

    # Reachability only makes sense over well-formed pieces.
    if fsm.start_state not in state_set:
        return
    reachable = _reachable_states(fsm)
    for sid in state_ids:
        if sid not in reachable:
            add(Severity.ERROR, DefectCode.UNREACHABLE_STATE, f"{loc}.state.{sid}",
                f"state '{sid}' is unreachable from start state '{fsm.start_state}'")
    if not (fsm.accepting_states & reachable):
        add(Severity.ERROR, DefectCode.NO_REACHABLE_ACCEPTING_STATE, loc,
            f"no accepting state is reachable from start state '{fsm.start_state}' "
            f"in method '{method_id}'")


def _reachable_states(fsm: Fsm) -> set[str]:
    adjacency: dict[str, list[str]] = {}
    for t in fsm.transitions:
        adjacency.setdefault(t.from_state, []).append(t.to_state)
    seen = {fsm.start_state}
    frontier = [fsm.start_state]
    while frontier:
        current = frontier.pop()
        for nxt in adjacency.get(current, ()):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def _decomposition_edges(model: TmkModel) -> dict[str, set[str]]:
    """Task -> task edges induced by method sub-goals."""
    methods = model.method_by_id()
    task_set = set(t.task_id for t in model.tasks)
    edges: dict[str, set[str]] = {t.task_id: set() for t in model.tasks}
    for task in model.tasks:
        for ref in task.method_refs:
            method = methods.get(ref)
            if method is None:
                continue
            for state in method.organizer.states:
                if state.sub_goal is not None and state.sub_goal in task_set:
                    edges[task.task_id].add(state.sub_goal)
    return edges


def _check_decomposition_cycles(model: TmkModel, add) -> None:
    edges = _decomposition_edges(model)
    color: dict[str, int] = {}  # 0 unseen, 1 in-progress, 2 done
    reported: set[frozenset[str]] = set()

    def visit(node: str, path: list[str]) -> None:
        color[node] = 1
        path.append(node)
        for nxt in sorted(edges.get(node, ())):
            if color.get(nxt, 0) == 1:
                cycle = path[path.index(nxt):] + [nxt]
                key = frozenset(cycle)
                if key not in reported:
                    reported.add(key)
                    add(Severity.ERROR, DefectCode.DECOMPOSITION_CYCLE, f"task.{nxt}",
                        "task decomposition cycles: " + " -> ".join(cycle))
            elif color.get(nxt, 0) == 0:
                visit(nxt, path)
        path.pop()
        color[node] = 2

    for task in model.tasks:
        if color.get(task.task_id, 0) == 0:
            visit(task.task_id, [])


def hierarchy_depth(model: TmkModel) -> int:
    """Longest task -> method -> sub-goal chain in a defect-free model.

    0 for a model whose methods have no sub-goals.  Raises
    :class:`ModelValidationError` when the model has error defects.
    """
    report = validate(model)
    if not report.ok:
        raise ModelValidationError([d.code.value for d in report.errors])

    edges = _decomposition_edges(model)
    memo: dict[str, int] = {}

    def depth(task_id: str) -> int:
        if task_id in memo:
            return memo[task_id]
        children = edges.get(task_id, ())
        value = 0 if not children else 1 + max(depth(c) for c in children)
        memo[task_id] = value
        return value

    return max((depth(t.task_id) for t in model.tasks), default=0)
