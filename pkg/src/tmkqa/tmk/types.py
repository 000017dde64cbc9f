"""Core data model for TMK (Task-Method-Knowledge) skill representations.

A skill model bundles three component families:

* tasks     -- what the skill achieves: goal, pre/post-conditions, I/O
* methods   -- how it is achieved, each organised as a deterministic FSM
* knowledge -- the concepts, relations and ground truths both rely on

All types are immutable after construction and safe to share across
threads.  Semantic checks (reference resolution, FSM structure, hierarchy
acyclicity) live in :mod:`tmkqa.tmk.validator`, not here; constructors
only normalise shapes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


@dataclass(frozen=True)
class Parameter:
    """A typed parameter name, as in ``ladder: Ladder``."""

    name: str
    type_name: str


@dataclass(frozen=True)
class Task:
    task_id: str
    goal: str
    inputs: tuple[Parameter, ...] = ()
    givens: tuple[str, ...] = ()
    makes: tuple[str, ...] = ()
    outputs: tuple[Parameter, ...] = ()
    method_refs: tuple[str, ...] = ()
    is_root: bool = False


@dataclass(frozen=True)
class State:
    state_id: str
    description: str
    sub_goal: str | None = None


@dataclass(frozen=True)
class Transition:
    from_state: str
    label: str
    to_state: str


@dataclass(frozen=True)
class Fsm:
    """Deterministic finite state machine organising a method.

    Structural invariants (single start state, determinism, reachability,
    a reachable accepting state) are checked by the validator.
    """

    states: tuple[State, ...]
    start_state: str
    accepting_states: frozenset[str]
    transitions: tuple[Transition, ...]

    def state_ids(self) -> tuple[str, ...]:
        return tuple(s.state_id for s in self.states)


@dataclass(frozen=True)
class Method:
    method_id: str
    organizer: Fsm


@dataclass(frozen=True)
class Concept:
    concept_id: str
    name: str
    properties: tuple[Parameter, ...] = ()


@dataclass(frozen=True)
class Relation:
    subject: str
    relation_name: str
    object: str


@dataclass(frozen=True)
class Knowledge:
    concepts: tuple[Concept, ...] = ()
    relations: tuple[Relation, ...] = ()
    ground_truths: tuple[str, ...] = ()

    def is_empty(self) -> bool:
        return not (self.concepts or self.relations or self.ground_truths)


@dataclass(frozen=True)
class TmkModel:
    skill_id: str
    skill_name: str
    tasks: tuple[Task, ...] = ()
    methods: tuple[Method, ...] = ()
    knowledge: Knowledge = field(default_factory=Knowledge)

    def task_by_id(self) -> dict[str, Task]:
        return {t.task_id: t for t in self.tasks}

    def method_by_id(self) -> dict[str, Method]:
        return {m.method_id: m for m in self.methods}

    def root_tasks(self) -> tuple[Task, ...]:
        return tuple(t for t in self.tasks if t.is_root)


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


class DefectCode(str, Enum):
    """Fixed vocabulary of validator findings.

    Errors block downstream use of a model; warnings do not.
    """

    MISSING_ROOT_TASK = "missing-root-task"
    DUPLICATE_TASK_ID = "duplicate-task-id"
    DUPLICATE_METHOD_ID = "duplicate-method-id"
    DUPLICATE_CONCEPT_ID = "duplicate-concept-id"
    DUPLICATE_STATE_ID = "duplicate-state-id"
    DUPLICATE_PROPERTY = "duplicate-property"
    DANGLING_METHOD_REF = "dangling-method-ref"
    DANGLING_SUBGOAL = "dangling-subgoal"
    DANGLING_RELATION_ENDPOINT = "dangling-relation-endpoint"
    UNKNOWN_START_STATE = "unknown-start-state"
    UNKNOWN_ACCEPTING_STATE = "unknown-accepting-state"
    UNKNOWN_TRANSITION_ENDPOINT = "unknown-transition-endpoint"
    NONDETERMINISTIC_TRANSITION = "nondeterministic-transition"
    UNREACHABLE_STATE = "unreachable-state"
    NO_REACHABLE_ACCEPTING_STATE = "no-reachable-accepting-state"
    UNKNOWN_CONCEPT_REFERENCE = "unknown-concept-reference"
    DECOMPOSITION_CYCLE = "decomposition-cycle"
    UNUSED_METHOD = "unused-method"
    ISOLATED_CONCEPT = "isolated-concept"


# Codes that never block downstream use.
WARNING_CODES = frozenset({DefectCode.UNUSED_METHOD, DefectCode.ISOLATED_CONCEPT})


@dataclass(frozen=True)
class Defect:
    severity: Severity
    code: DefectCode
    location: str
    message: str

    def to_dict(self) -> dict[str, str]:
        return {
            "severity": self.severity.value,
            "code": self.code.value,
            "location": self.location,
            "message": self.message,
        }


@dataclass(frozen=True)
class ValidationReport:
    defects: tuple[Defect, ...] = ()

    @property
    def errors(self) -> tuple[Defect, ...]:
        return tuple(d for d in self.defects if d.severity is Severity.ERROR)

    @property
    def warnings(self) -> tuple[Defect, ...]:
        return tuple(d for d in self.defects if d.severity is Severity.WARNING)

    @property
    def ok(self) -> bool:
        """True when the model is accepted by all downstream modules."""
        return not self.errors

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "error_count": len(self.errors),
            "warning_count": len(self.warnings),
            "defects": [d.to_dict() for d in self.defects],
        }
