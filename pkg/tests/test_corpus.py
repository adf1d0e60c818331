#!/usr/bin/env python3
"""Validate corpus metadata conventions and summary aggregation."""
from __future__ import annotations

import json
import os
import re
import sys
from pathlib import Path

from simdiag.classify import PropertyLabel
from simdiag.corpus import aggregate_reports, discover_entries, write_summary
from simdiag.errors import DomainError
from simdiag.reporting import Verdict

SNAKE_CASE_RE = re.compile(r"^[a-z0-9]+(?:_[a-z0-9]+)*$")


def corpus_root() -> Path:
    default = Path(__file__).resolve().parents[1] / "corpus"
    return Path(os.getenv("SIMDIAG_CORPUS_DIR", str(default))).resolve()


def metadata_problems(root: Path) -> list[str]:
    problems: list[str] = []
    for meta_path in discover_entries(root):
        try:
            data = json.loads(meta_path.read_text())
        except json.JSONDecodeError as exc:
            problems.append(f"{meta_path}: invalid JSON ({exc.msg})")
            continue
        name = data.get("name", "")
        if name != meta_path.parent.name:
            problems.append(f"{meta_path}: name '{name}' differs from directory '{meta_path.parent.name}'")
        if not SNAKE_CASE_RE.match(name):
            problems.append(f"{meta_path}: name '{name}' is not snake_case")
        if not meta_path.with_name(data.get("set", "set.json")).exists():
            problems.append(f"{meta_path}: matrix file missing")
        if not data.get("description"):
            problems.append(f"{meta_path}: description missing")
        expected = data.get("expected") or {}
        if not expected and "qcqp" not in data:
            problems.append(f"{meta_path}: nothing to check")
        for label, verdict in expected.items():
            try:
                PropertyLabel.parse(label)
            except DomainError:
                problems.append(f"{meta_path}: unknown property '{label}'")
            if verdict not in [v.value for v in Verdict]:
                problems.append(f"{meta_path}: invalid verdict '{verdict}' for {label}")
    return problems


def test_corpus_metadata_conventions() -> None:
    root = corpus_root()
    assert root.exists(), f"Corpus dir not found: {root}"
    assert discover_entries(root), f"No entries under {root}"
    problems = metadata_problems(root)
    if problems:
        raise AssertionError("Corpus metadata problems:\n" + "\n".join(f"- {p}" for p in problems))


def test_summary_aggregation(tmp_path) -> None:
    passing = {
        "name": "a",
        "passed": True,
        "checks": [{"property": "SD", "expected": "yes", "actual": "yes", "match": True}],
        "qcqp": {"match": True, "status": "attained", "value": 0.0},
    }
    failing = {
        "name": "b",
        "passed": False,
        "checks": [{"property": "SD", "expected": "no", "actual": "unknown", "match": False}],
        "qcqp": None,
    }
    (tmp_path / "a.json").write_text(json.dumps(passing))
    (tmp_path / "b.json").write_text(json.dumps(failing))
    (tmp_path / "broken.json").write_text("{")

    summary = aggregate_reports(tmp_path)
    assert summary.entries == 2 and summary.passed == 1 and summary.failed == 1
    assert summary.checks == 3 and summary.matches == 2
    assert summary.by_property["SD"].mismatched == 1
    assert summary.by_property["QCQP"].matched == 1
    assert summary.by_verdict == {"yes": 1, "unknown": 1}
    assert summary.mismatches == ["b: SD expected no, got unknown"]
    assert not summary.all_matched

    path = write_summary(tmp_path, summary)
    assert json.loads(path.read_text())["by_property"]["SD"]["match_rate"] == 0.5
    assert aggregate_reports(tmp_path).entries == 2, "summary.json must not count as an entry"


def main() -> int:
    root = corpus_root()
    if not root.exists():
        print(f"Corpus dir not found: {root}")
        return 1

    problems = metadata_problems(root)
    if problems:
        print("Corpus metadata problems:")
        for problem in problems:
            print(f"- {problem}")
        return 1

    print(f"All {len(discover_entries(root))} corpus entries look good.")
    return 0


if __name__ == "__main__":
    sys.exit(main())
