from pathlib import Path

import pytest

from pqa_reject.corpus import load_corpus

TOY = Path(__file__).parent / "data" / "toy"


@pytest.fixture
def toy_paths():
    return {k: str(TOY / f"{k}.jsonl") for k in ("questions", "reviews", "judgments")}


@pytest.fixture
def toy_corpus(toy_paths):
    return load_corpus(toy_paths["questions"], toy_paths["reviews"], toy_paths["judgments"])


@pytest.fixture
def write_jsonl(tmp_path):
    import json

    def write(name, records):
        path = tmp_path / name
        path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
        return str(path)

    return write


@pytest.fixture
def ten_irrelevant_paths(write_jsonl):
    """Two answerable and two unanswerable questions; each unanswerable one
    gets twelve irrelevant candidates, so ten are returned at depth 10."""
    questions, reviews, judgments, scores = [], [], [], [{"score_kind": "probability", "name": "fixed"}]
    for i in range(4):
        qid, pid = f"q{i}", f"p{i}"
        questions.append({"question_id": qid, "product_id": pid, "text": f"question {i}?"})
        for j in range(12):
            rid = f"r{i}-{j:02d}"
            rel = 3.0 if i < 2 and j == 0 else 0.0
            reviews.append({"review_id": rid, "product_id": pid, "text": f"review {j} of {pid}"})
            judgments.append({"question_id": qid, "review_id": rid, "mean_relevance": rel})
            scores.append({"question_id": qid, "review_id": rid, "score": round(0.9 - 0.05 * j, 2)})
    return {
        "questions": write_jsonl("questions.jsonl", questions),
        "reviews": write_jsonl("reviews.jsonl", reviews),
        "judgments": write_jsonl("judgments.jsonl", judgments),
        "scores": write_jsonl("scores.jsonl", scores),
    }


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is not None and module.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in module.RESULTS:
            terminalreporter.write_line(line)
