"""Parser and serializer for the skill model file format.

The format is a line-oriented tree of keyed records.  Every significant
line is ``key: value`` with two-space indentation expressing nesting;
``#`` starts a full-line comment.  The grammar:

    skill: <identifier>
    name: <free text>

    task: <identifier>
      root: true|false              (optional, default false)
      goal: <free text>             (required, non-empty)
      input: <name>: <type>         (repeatable)
      given: <expression>           (repeatable)
      make: <expression>            (repeatable)
      output: <name>: <type>        (repeatable)
      method: <identifier>          (repeatable)

    method: <identifier>
      start: <state-id>             (required, exactly once)
      accepting: <state-id>         (repeatable)
      state: <identifier>           (repeatable)
        describes: <free text>      (required, non-empty)
        subgoal: <task-id>          (optional)
      transition: <from> -> <to> [<label>]   (repeatable)

    knowledge:
      concept: <identifier>         (repeatable)
        name: <free text>           (required, non-empty)
        property: <name>: <type>    (repeatable)
      relation: <subject> <name> <object>    (repeatable)
      truth: <expression>           (repeatable)

Identifiers match ``[A-Za-z][A-Za-z0-9_-]*``.  Free text and expressions
run to end of line and are stripped of surrounding whitespace.  Parsing
performs no semantic validation beyond mandatory fields; that is the
validator's job.

``serialize`` is the exact inverse: ``parse_tmk(serialize(m)) == m`` for
any structurally well-formed model.
"""

from __future__ import annotations

import re

from ..errors import ParseError
from .types import (
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

IDENTIFIER_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_-]*$")
_LINE_RE = re.compile(r"^( *)([a-z]+):(.*)$")
_TRANSITION_RE = re.compile(r"^(\S+)\s*->\s*(\S+)\s*\[([^\[\]]+)\]$")

INDENT = 2


class _Line:
    __slots__ = ("level", "key", "value", "number", "column")

    def __init__(self, level: int, key: str, value: str, number: int, column: int):
        self.level = level
        self.key = key
        self.value = value
        self.number = number
        self.column = column


def _tokenize(source_text: str) -> list[_Line]:
    lines: list[_Line] = []
    for number, raw in enumerate(source_text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        if "\t" in raw[: len(raw) - len(raw.lstrip())]:
            raise ParseError("tabs are not allowed in indentation", number, 1)
        m = _LINE_RE.match(raw)
        if m is None:
            raise ParseError("expected 'key: value'", number, 1)
        indent, key, value = m.group(1), m.group(2), m.group(3)
        if len(indent) % INDENT != 0:
            raise ParseError(
                f"indentation must be a multiple of {INDENT} spaces",
                number,
                len(indent) + 1,
            )
        lines.append(_Line(len(indent) // INDENT, key, value.strip(), number, len(indent) + 1))
    return lines


def _require_identifier(value: str, what: str, line: _Line) -> str:
    if not IDENTIFIER_RE.match(value):
        raise ParseError(f"{what} must be an identifier, got {value!r}", line.number, line.column)
    return value


def _split_param(value: str, what: str, line: _Line) -> Parameter:
    head, sep, tail = value.partition(":")
    if not sep:
        raise ParseError(f"{what} must look like 'name: type'", line.number, line.column)
    name = _require_identifier(head.strip(), f"{what} name", line)
    type_name = _require_identifier(tail.strip(), f"{what} type", line)
    return Parameter(name, type_name)


class _Cursor:
    """Walks the token list, handing out children of the current block."""

    def __init__(self, lines: list[_Line]):
        self.lines = lines
        self.pos = 0

    def peek(self) -> _Line | None:
        return self.lines[self.pos] if self.pos < len(self.lines) else None

    def next_at(self, level: int) -> _Line | None:
        """Consume and return the next line if it sits at `level`."""
        line = self.peek()
        if line is None:
            return None
        if line.level > level:
            raise ParseError(
                f"unexpected indentation under '{self.lines[self.pos - 1].key}'"
                if self.pos
                else "unexpected indentation",
                line.number,
                line.column,
            )
        if line.level < level:
            return None
        self.pos += 1
        return line


def parse_tmk(source_text: str) -> TmkModel:
    """Parse model source text into a structurally complete model.

    Raises :class:`ParseError` with line/column for syntax problems and
    for missing mandatory fields.  No semantic validation happens here.
    """
    cursor = _Cursor(_tokenize(source_text))

    skill_id: str | None = None
    skill_name: str | None = None
    skill_line = 1
    tasks: list[Task] = []
    methods: list[Method] = []
    knowledge = Knowledge()
    saw_knowledge = False

    while True:
        line = cursor.next_at(0)
        if line is None:
            extra = cursor.peek()
            if extra is not None:
                raise ParseError("unexpected indentation at top level", extra.number, extra.column)
            break
        if line.key == "skill":
            if skill_id is not None:
                raise ParseError("duplicate 'skill' declaration", line.number, line.column)
            skill_id = _require_identifier(line.value, "skill id", line)
            skill_line = line.number
        elif line.key == "name":
            if skill_name is not None:
                raise ParseError("duplicate 'name' declaration", line.number, line.column)
            if not line.value:
                raise ParseError("skill 'name' must not be empty", line.number, line.column)
            skill_name = line.value
        elif line.key == "task":
            tasks.append(_parse_task(line, cursor))
        elif line.key == "method":
            methods.append(_parse_method(line, cursor))
        elif line.key == "knowledge":
            if saw_knowledge:
                raise ParseError("duplicate 'knowledge' section", line.number, line.column)
            if line.value:
                raise ParseError("'knowledge:' takes no value", line.number, line.column)
            knowledge = _parse_knowledge(cursor)
            saw_knowledge = True
        else:
            raise ParseError(f"unknown top-level key '{line.key}'", line.number, line.column)

    if skill_id is None:
        raise ParseError("missing mandatory 'skill' declaration", skill_line, 1)
    if skill_name is None:
        raise ParseError("missing mandatory 'name' declaration", skill_line, 1)
    return TmkModel(
        skill_id=skill_id,
        skill_name=skill_name,
        tasks=tuple(tasks),
        methods=tuple(methods),
        knowledge=knowledge,
    )


def _parse_task(header: _Line, cursor: _Cursor) -> Task:
    task_id = _require_identifier(header.value, "task id", header)
    goal: str | None = None
    is_root = False
    saw_root = False
    inputs: list[Parameter] = []
    givens: list[str] = []
    makes: list[str] = []
    outputs: list[Parameter] = []
    method_refs: list[str] = []

    while True:
        line = cursor.next_at(1)
        if line is None:
            break
        if line.key == "goal":
            if goal is not None:
                raise ParseError(f"task '{task_id}': duplicate 'goal'", line.number, line.column)
            if not line.value:
                raise ParseError(f"task '{task_id}': 'goal' must not be empty", line.number, line.column)
            goal = line.value
        elif line.key == "root":
            if saw_root:
                raise ParseError(f"task '{task_id}': duplicate 'root'", line.number, line.column)
            if line.value not in ("true", "false"):
                raise ParseError(f"task '{task_id}': 'root' must be true or false", line.number, line.column)
            is_root = line.value == "true"
            saw_root = True
        elif line.key == "input":
            inputs.append(_split_param(line.value, "input", line))
        elif line.key == "given":
            if not line.value:
                raise ParseError(f"task '{task_id}': empty 'given' expression", line.number, line.column)
            givens.append(line.value)
        elif line.key == "make":
            if not line.value:
                raise ParseError(f"task '{task_id}': empty 'make' expression", line.number, line.column)
            makes.append(line.value)
        elif line.key == "output":
            outputs.append(_split_param(line.value, "output", line))
        elif line.key == "method":
            method_refs.append(_require_identifier(line.value, "method reference", line))
        else:
            raise ParseError(f"task '{task_id}': unknown key '{line.key}'", line.number, line.column)

    if goal is None:
        raise ParseError(f"task '{task_id}': missing mandatory field 'goal'", header.number, header.column)
    return Task(
        task_id=task_id,
        goal=goal,
        inputs=tuple(inputs),
        givens=tuple(givens),
        makes=tuple(makes),
        outputs=tuple(outputs),
        method_refs=tuple(method_refs),
        is_root=is_root,
    )


def _parse_method(header: _Line, cursor: _Cursor) -> Method:
    method_id = _require_identifier(header.value, "method id", header)
    start: str | None = None
    accepting: list[str] = []
    states: list[State] = []
    transitions: list[Transition] = []

    while True:
        line = cursor.next_at(1)
        if line is None:
            break
        if line.key == "start":
            if start is not None:
                raise ParseError(f"method '{method_id}': duplicate 'start'", line.number, line.column)
            start = _require_identifier(line.value, "start state", line)
        elif line.key == "accepting":
            accepting.append(_require_identifier(line.value, "accepting state", line))
        elif line.key == "state":
            states.append(_parse_state(method_id, line, cursor))
        elif line.key == "transition":
            m = _TRANSITION_RE.match(line.value)
            if m is None:
                raise ParseError(
                    f"method '{method_id}': transition must look like 'from -> to [label]'",
                    line.number,
                    line.column,
                )
            frm = _require_identifier(m.group(1), "transition source", line)
            to = _require_identifier(m.group(2), "transition target", line)
            label = _require_identifier(m.group(3).strip(), "transition label", line)
            transitions.append(Transition(frm, label, to))
        else:
            raise ParseError(f"method '{method_id}': unknown key '{line.key}'", line.number, line.column)

    if start is None:
        raise ParseError(
            f"method '{method_id}': missing mandatory field 'start'", header.number, header.column
        )
    fsm = Fsm(
        states=tuple(states),
        start_state=start,
        accepting_states=frozenset(accepting),
        transitions=tuple(transitions),
    )
    return Method(method_id=method_id, organizer=fsm)


def _parse_state(method_id: str, header: _Line, cursor: _Cursor) -> State:
    state_id = _require_identifier(header.value, "state id", header)
    description: str | None = None
    sub_goal: str | None = None

    while True:
        line = cursor.next_at(2)
        if line is None:
            break
        if line.key == "describes":
            if description is not None:
                raise ParseError(
                    f"state '{state_id}': duplicate 'describes'", line.number, line.column
                )
            if not line.value:
                raise ParseError(
                    f"state '{state_id}': 'describes' must not be empty", line.number, line.column
                )
            description = line.value
        elif line.key == "subgoal":
            if sub_goal is not None:
                raise ParseError(f"state '{state_id}': duplicate 'subgoal'", line.number, line.column)
            sub_goal = _require_identifier(line.value, "subgoal task", line)
        else:
            raise ParseError(f"state '{state_id}': unknown key '{line.key}'", line.number, line.column)

    if description is None:
        raise ParseError(
            f"method '{method_id}', state '{state_id}': missing mandatory field 'describes'",
            header.number,
            header.column,
        )
    return State(state_id=state_id, description=description, sub_goal=sub_goal)


def _parse_knowledge(cursor: _Cursor) -> Knowledge:
    concepts: list[Concept] = []
    relations: list[Relation] = []
    truths: list[str] = []

    while True:
        line = cursor.next_at(1)
        if line is None:
            break
        if line.key == "concept":
            concepts.append(_parse_concept(line, cursor))
        elif line.key == "relation":
            parts = line.value.split()
            if len(parts) != 3:
                raise ParseError(
                    "relation must look like '<subject> <relation-name> <object>'",
                    line.number,
                    line.column,
                )
            subject = _require_identifier(parts[0], "relation subject", line)
            rel_name = _require_identifier(parts[1], "relation name", line)
            obj = _require_identifier(parts[2], "relation object", line)
            relations.append(Relation(subject, rel_name, obj))
        elif line.key == "truth":
            if not line.value:
                raise ParseError("empty 'truth' expression", line.number, line.column)
            truths.append(line.value)
        else:
            raise ParseError(f"knowledge: unknown key '{line.key}'", line.number, line.column)

    return Knowledge(
        concepts=tuple(concepts), relations=tuple(relations), ground_truths=tuple(truths)
    )


def _parse_concept(header: _Line, cursor: _Cursor) -> Concept:
    concept_id = _require_identifier(header.value, "concept id", header)
    name: str | None = None
    properties: list[Parameter] = []

    while True:
        line = cursor.next_at(2)
        if line is None:
            break
        if line.key == "name":
            if name is not None:
                raise ParseError(f"concept '{concept_id}': duplicate 'name'", line.number, line.column)
            if not line.value:
                raise ParseError(
                    f"concept '{concept_id}': 'name' must not be empty", line.number, line.column
                )
            name = line.value
        elif line.key == "property":
            properties.append(_split_param(line.value, "property", line))
        else:
            raise ParseError(
                f"concept '{concept_id}': unknown key '{line.key}'", line.number, line.column
            )

    if name is None:
        raise ParseError(
            f"concept '{concept_id}': missing mandatory field 'name'", header.number, header.column
        )
    return Concept(concept_id=concept_id, name=name, properties=tuple(properties))


def serialize(model: TmkModel) -> str:
    """Render a model back to its file format, inverse of :func:`parse_tmk`."""
    out: list[str] = [f"skill: {model.skill_id}", f"name: {model.skill_name}"]

    for task in model.tasks:
        out.append("")
        out.append(f"task: {task.task_id}")
        if task.is_root:
            out.append("  root: true")
        out.append(f"  goal: {task.goal}")
        for p in task.inputs:
            out.append(f"  input: {p.name}: {p.type_name}")
        for expr in task.givens:
            out.append(f"  given: {expr}")
        for expr in task.makes:
            out.append(f"  make: {expr}")
        for p in task.outputs:
            out.append(f"  output: {p.name}: {p.type_name}")
        for ref in task.method_refs:
            out.append(f"  method: {ref}")

    for method in model.methods:
        fsm = method.organizer
        out.append("")
        out.append(f"method: {method.method_id}")
        out.append(f"  start: {fsm.start_state}")
        for sid in sorted(fsm.accepting_states):
            out.append(f"  accepting: {sid}")
        for state in fsm.states:
            out.append(f"  state: {state.state_id}")
            out.append(f"    describes: {state.description}")
            if state.sub_goal is not None:
                out.append(f"    subgoal: {state.sub_goal}")
        for t in fsm.transitions:
            out.append(f"  transition: {t.from_state} -> {t.to_state} [{t.label}]")

    if not model.knowledge.is_empty():
        out.append("")
        out.append("knowledge:")
        for concept in model.knowledge.concepts:
            out.append(f"  concept: {concept.concept_id}")
            out.append(f"    name: {concept.name}")
            for p in concept.properties:
                out.append(f"    property: {p.name}: {p.type_name}")
        for rel in model.knowledge.relations:
            out.append(f"  relation: {rel.subject} {rel.relation_name} {rel.object}")
        for expr in model.knowledge.ground_truths:
            out.append(f"  truth: {expr}")

    return "\n".join(out) + "\n"
