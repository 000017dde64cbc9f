#!/usr/bin/env python3
"""Regenerate fixtures/defects: one model file per validator defect code.

Each file is a minimal variation of a clean seed model constructed so the
validator reports exactly one defect, the file's namesake.  The script
verifies that property before writing and fails loudly otherwise.
"""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from tmkqa.tmk.parser import parse_tmk
from tmkqa.tmk.validator import validate

ROOT = Path(__file__).resolve().parents[1]
OUT = ROOT / "fixtures" / "defects"

SEED = """\
skill: seed
name: Seed Skill

task: main-task
  root: true
  goal: Do the main thing.
  make: Done(Widget)
  method: main-method

method: main-method
  start: s-begin
  accepting: s-end
  state: s-begin
    describes: Starting state.
  state: s-end
    describes: Final state.
  transition: s-begin -> s-end [finished]

knowledge:
  concept: widget
    name: Widget
    property: size: count
  relation: widget contains widget
  truth: Done(Widget)
"""

SPARE_METHOD = """\

method: spare-method
  start: sp-a
  accepting: sp-a
  state: sp-a
    describes: Lone state of the spare method.
"""


FIXTURES: dict[str, str] = {
    "missing-root-task": SEED.replace("  root: true\n", ""),
    "duplicate-task-id": SEED.replace(
        "method: main-method\n\nmethod:",
        "method: main-method\n\ntask: main-task\n  root: true\n"
        "  goal: Do the main thing again.\n  method: main-method\n\nmethod:",
        1,
    ),
    "duplicate-method-id": SEED + "\nmethod: main-method\n  start: d-a\n  accepting: d-a\n"
    "  state: d-a\n    describes: Duplicate method state.\n",
    "duplicate-concept-id": SEED.replace(
        "  relation: widget contains widget",
        "  concept: widget\n    name: Widget\n  relation: widget contains widget",
    ),
    "duplicate-state-id": SEED.replace(
        "  state: s-end\n    describes: Final state.\n",
        "  state: s-end\n    describes: Final state.\n"
        "  state: s-end\n    describes: Final state declared twice.\n",
    ),
    "duplicate-property": SEED.replace(
        "    property: size: count\n",
        "    property: size: count\n    property: size: weight\n",
    ),
    "dangling-method-ref": SEED.replace(
        "  method: main-method\n",
        "  method: main-method\n  method: ghost-method\n",
        1,
    ),
    "dangling-subgoal": SEED.replace(
        "  state: s-begin\n    describes: Starting state.\n",
        "  state: s-begin\n    describes: Starting state.\n    subgoal: ghost-task\n",
    ),
    "dangling-relation-endpoint": SEED.replace(
        "  relation: widget contains widget\n",
        "  relation: widget contains widget\n  relation: widget touches ghost\n",
    ),
    "unknown-start-state": SEED.replace("  start: s-begin\n", "  start: nowhere\n"),
    "unknown-accepting-state": SEED.replace(
        "  accepting: s-end\n", "  accepting: s-end\n  accepting: ghost-state\n"
    ),
    "unknown-transition-endpoint": SEED.replace(
        "  transition: s-begin -> s-end [finished]\n",
        "  transition: s-begin -> s-end [finished]\n"
        "  transition: s-begin -> ghost [detour]\n",
    ),
    "nondeterministic-transition": SEED.replace(
        "  transition: s-begin -> s-end [finished]\n",
        "  transition: s-begin -> s-end [finished]\n"
        "  transition: s-begin -> s-begin [finished]\n",
    ),
    "unreachable-state": SEED.replace(
        "  state: s-end\n    describes: Final state.\n",
        "  state: s-end\n    describes: Final state.\n"
        "  state: s-orphan\n    describes: No transition reaches this state.\n",
    ),
    "no-reachable-accepting-state": SEED.replace("  accepting: s-end\n", ""),
    "unknown-concept-reference": SEED.replace(
        "  truth: Done(Widget)\n", "  truth: Done(Widget)\n  truth: Broken(Ghost)\n"
    ),
    "decomposition-cycle": SEED.replace(
        "  state: s-begin\n    describes: Starting state.\n",
        "  state: s-begin\n    describes: Starting state.\n    subgoal: main-task\n",
    ),
    "unused-method": SEED + SPARE_METHOD,
    "isolated-concept": SEED.replace(
        "  relation: widget contains widget",
        "  concept: gadget\n    name: Gadget\n  relation: widget contains widget",
    ),
}


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    seed_report = validate(parse_tmk(SEED))
    assert not seed_report.defects, f"seed model is not clean: {seed_report.defects}"
    for code, text in sorted(FIXTURES.items()):
        report = validate(parse_tmk(text))
        found = [d.code.value for d in report.defects]
        assert found == [code], f"{code}: expected exactly [{code}], got {found}"
        (OUT / f"{code}.tmk").write_text(text, encoding="utf-8")
        print(f"wrote {code}.tmk")
    print(f"{len(FIXTURES)} defect fixtures verified and written to {OUT}")


if __name__ == "__main__":
    main()
