#!/usr/bin/env python3
"""Regenerate fixtures/votes-developer-study.json.

Builds 140 blind-voting records over 30 verification questions (5
categories x 6 skills) whose marginals reproduce the published study
aggregates exactly: 115 vs 75 preferences (agreement 82.14 / 53.57), the
per-category vote split, and the per-skill split with its planning tie.
The script asserts every target before writing.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from tmkqa.evaluation import agreement_index, load_votes, tally_votes

ROOT = Path(__file__).resolve().parents[1]
OUT = ROOT / "fixtures" / "votes-developer-study.json"

IVY = "ivy"
RAG = "rag-benchmark"

CATEGORIES = ["task", "method", "knowledge", "student", "cannot-answer"]
SKILLS = [
    "classification",
    "incremental-concept-learning",
    "means-end-analysis",
    "partial-order-planning",
    "resolution-theorem-proving",
    "semantic-networks",
]

# Votes-by-category targets (rag, ivy).
CATEGORY_TARGETS = {
    "task": (12, 21),
    "method": (15, 22),
    "knowledge": (19, 19),
    "student": (16, 20),
    "cannot-answer": (13, 33),
}
# Votes-by-skill targets (rag, ivy); planning ties 14/14.
SKILL_TARGETS = {
    "classification": (13, 19),
    "incremental-concept-learning": (11, 21),
    "means-end-analysis": (10, 20),
    "partial-order-planning": (14, 14),
    "resolution-theorem-proving": (15, 23),
    "semantic-networks": (12, 18),
}
TOTAL_RECORDS = 140

# Per-cell vote counts (category x skill) consistent with both marginals.
# RAG votes nest inside IVY votes, so a "both" record covers each RAG vote.
RAG_CELLS = [
    [12, 0, 0, 0, 0, 0],
    [1, 11, 3, 0, 0, 0],
    [0, 0, 7, 12, 0, 0],
    [0, 0, 0, 2, 14, 0],
    [0, 0, 0, 0, 1, 12],
]
IVY_ONLY_CELLS = [
    [6, 3, 0, 0, 0, 0],
    [0, 7, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0],
    [0, 0, 4, 0, 0, 0],
    [0, 0, 6, 0, 8, 6],
]

QUESTIONS = {
    ("task", "classification"): "What condition must be true before classifying objects?",
    ("task", "incremental-concept-learning"): "What input is required to develop a concept definition?",
    ("task", "means-end-analysis"): "What is the goal of solving a block world problem with means-end analysis?",
    ("task", "partial-order-planning"): "What is the goal of the painting task in partial order planning?",
    ("task", "resolution-theorem-proving"): "What are the inputs needed to prove a logical statement using resolution theorem proving?",
    ("task", "semantic-networks"): "What condition must be satisfied on both banks for the task to be considered safe?",
    ("method", "classification"): "What is required to map percepts to equivalence classes?",
    ("method", "incremental-concept-learning"): "What are the key steps in incremental concept learning?",
    ("method", "means-end-analysis"): "What is the first step in solving a block world problem using means-end analysis?",
    ("method", "partial-order-planning"): "How does the method handle conflicts between subgoals when creating the plan?",
    ("method", "resolution-theorem-proving"): "What is the purpose of checking for a contradiction in resolution theorem proving?",
    ("method", "semantic-networks"): "What happens after the boat crosses the river in the Guards and Prisoners problem?",
    ("knowledge", "classification"): "What is a subclass in a concept hierarchy?",
    ("knowledge", "incremental-concept-learning"): "What is variabilization in the context of incremental concept learning?",
    ("knowledge", "means-end-analysis"): "What is the purpose of calculating the delta in means-end analysis?",
    ("knowledge", "partial-order-planning"): 'What does "no goal clobbering" mean in the context of partial order planning?',
    ("knowledge", "resolution-theorem-proving"): "What is a literal in the context of logical sentences?",
    ("knowledge", "semantic-networks"): 'What is a "configuration" in the context of the Guards and Prisoners problem?',
    ("student", "classification"): "What are the common features shared by eagles, bluebirds, and penguins?",
    ("student", "incremental-concept-learning"): 'How should I modify the concept diagram if a negative example of "foo" is introduced? What about positive?',
    ("student", "means-end-analysis"): "How should I interpret Move (C, Table) and what does it mean in terms of block position?",
    ("student", "partial-order-planning"): "How do I represent a goal state that involves multiple actions or conditions in propositional logic?",
    ("student", "resolution-theorem-proving"): "Can you help me remember the terms modus ponens and modus tollens?",
    ("student", "semantic-networks"): 'What makes a state "productive" in addition to being legal?',
    ("cannot-answer", "classification"): "In what galaxy is Earth located?",
    ("cannot-answer", "incremental-concept-learning"): "Who is your favorite superhero?",
    ("cannot-answer", "means-end-analysis"): "Why do colorless green ideas sleep furiously?",
    ("cannot-answer", "partial-order-planning"): "How do you make a quesadilla?",
    ("cannot-answer", "resolution-theorem-proving"): "Who is the president of the United States?",
    ("cannot-answer", "semantic-networks"): "Shall I compare thee to a summer's day?",
}

SAMPLE_RATINGS = {
    "correctness": 5,
    "completeness": 4,
    "confidence": 5,
    "comprehensibility": 4,
    "compactness": 4,
}


def main() -> None:
    records = []
    evaluator = 0

    def next_evaluator() -> str:
        nonlocal evaluator
        evaluator = evaluator % 7 + 1
        return f"e{evaluator}"

    for ci, category in enumerate(CATEGORIES):
        for si, skill in enumerate(SKILLS):
            question = QUESTIONS[(category, skill)]
            for _ in range(RAG_CELLS[ci][si]):
                records.append({
                    "question": question,
                    "evaluator": next_evaluator(),
                    "preferred": [IVY, RAG],
                    "category": category,
                    "skill": skill,
                })
            for _ in range(IVY_ONLY_CELLS[ci][si]):
                records.append({
                    "question": question,
                    "evaluator": next_evaluator(),
                    "preferred": [IVY],
                    "category": category,
                    "skill": skill,
                })

    # Pad with neither-preferred records to reach the published total.
    pad = TOTAL_RECORDS - len(records)
    assert pad >= 0, f"cell counts overflow the record total by {-pad}"
    for i in range(pad):
        category = CATEGORIES[i % len(CATEGORIES)]
        skill = SKILLS[i % len(SKILLS)]
        records.append({
            "question": QUESTIONS[(category, skill)],
            "evaluator": next_evaluator(),
            "preferred": [],
            "category": category,
            "skill": skill,
        })

    # One fully rated record per category, exercising the five metrics.
    for category in CATEGORIES:
        for record in records:
            if record["category"] == category:
                record["metric_ratings"] = dict(SAMPLE_RATINGS)
                break

    OUT.write_text(json.dumps({"records": records}, indent=2) + "\n", encoding="utf-8")

    votes = load_votes(OUT)
    assert len(votes) == TOTAL_RECORDS, len(votes)
    assert agreement_index(votes, IVY) == 82.14
    assert agreement_index(votes, RAG) == 53.57
    tallies = tally_votes(votes)
    for category, (rag_n, ivy_n) in CATEGORY_TARGETS.items():
        assert tallies[RAG]["category"].get(category, 0) == rag_n, category
        assert tallies[IVY]["category"].get(category, 0) == ivy_n, category
    for skill, (rag_n, ivy_n) in SKILL_TARGETS.items():
        assert tallies[RAG]["skill"].get(skill, 0) == rag_n, skill
        assert tallies[IVY]["skill"].get(skill, 0) == ivy_n, skill
    assert tallies[IVY]["total"]["votes"] == 115
    assert tallies[RAG]["total"]["votes"] == 75
    print(f"wrote {OUT} with {len(votes)} records; all published tallies reproduced")


if __name__ == "__main__":
    main()
