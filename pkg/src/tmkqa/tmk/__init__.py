"""Parsing, validation and data model for TMK skill representations."""

from .parser import parse_tmk, serialize
from .types import (
    Concept,
    Defect,
    DefectCode,
    Fsm,
    Knowledge,
    Method,
    Parameter,
    Relation,
    Severity,
    State,
    Task,
    TmkModel,
    Transition,
    ValidationReport,
)
from .validator import hierarchy_depth, validate

__all__ = [
    "Concept",
    "Defect",
    "DefectCode",
    "Fsm",
    "Knowledge",
    "Method",
    "Parameter",
    "Relation",
    "Severity",
    "State",
    "Task",
    "TmkModel",
    "Transition",
    "ValidationReport",
    "hierarchy_depth",
    "parse_tmk",
    "serialize",
    "validate",
]
