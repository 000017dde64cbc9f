"""Prompt template loading.

Every pipeline prompt lives in an external ``.txt`` file, editable without
touching code.  A template file has two sections::

    [system]
    ... instructions, may contain $placeholders ...
    [user]
    ... user message scaffold, may contain $placeholders ...

Placeholders use ``string.Template`` syntax ($name), substituted with
``substitute`` so a missing value fails loudly.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from string import Template

from .errors import TemplateError

STAGE_TEMPLATES = (
    "relevance",
    "kscore",
    "generate",
    "refine",
    "optimize",
    "judge_grounding",
    "judge_retention",
)


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    system_text: str
    user_text: str

    def render(self, **values: str) -> tuple[str, str]:
        try:
            system = Template(self.system_text).substitute(values)
            user = Template(self.user_text).substitute(values)
        except KeyError as exc:
            raise TemplateError(f"template '{self.name}' missing value for {exc}") from exc
        return system, user


def _parse_sections(name: str, text: str) -> PromptTemplate:
    system_lines: list[str] = []
    user_lines: list[str] = []
    current: list[str] | None = None
    for line in text.splitlines():
        marker = line.strip().lower()
        if marker == "[system]":
            current = system_lines
        elif marker == "[user]":
            current = user_lines
        elif current is None:
            if line.strip():
                raise TemplateError(f"template '{name}': content before [system] section")
        else:
            current.append(line)
    if not system_lines or not user_lines:
        raise TemplateError(f"template '{name}' must define [system] and [user] sections")
    return PromptTemplate(
        name=name,
        system_text="\n".join(system_lines).strip(),
        user_text="\n".join(user_lines).strip(),
    )


class PromptLibrary:
    """Loads and caches the per-stage templates from one directory."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self._cache: dict[str, PromptTemplate] = {}

    @classmethod
    def packaged(cls) -> "PromptLibrary":
        return cls(Path(str(resources.files("tmkqa").joinpath("templates"))))

    def get(self, name: str) -> PromptTemplate:
        if name not in self._cache:
            path = self.directory / f"{name}.txt"
            if not path.is_file():
                raise TemplateError(f"no template file for '{name}' at {path}")
            self._cache[name] = _parse_sections(name, path.read_text(encoding="utf-8"))
        return self._cache[name]
