"""Example corpus: entry loading, the suite runner and summary aggregation."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from rich.console import Console

from .classify import PropertyLabel, classify
from .config import Config, resolve
from .errors import DomainError, MatrixFileError, SimdiagError
from .matcore import SymMatrixSet
from .matrix_io import parse_matrix_file
from .qcqp import QcqpStatus, SingleConstraintProblem, solve_single_constraint
from .reporting import SCHEMA_VERSION, Verdict, timed, write_report

console = Console(stderr=True)
logger = logging.getLogger("simdiag.corpus")

QCQP_VALUE_TOL = 1e-6


@dataclass
class QcqpExpectation:
    """Single-constraint data: set.json holds [B, A]; the entry gives b and the expected outcome."""

    b: float
    status: QcqpStatus
    value: Optional[float] = None


@dataclass
class CorpusEntry:
    name: str
    description: str
    matrices: SymMatrixSet
    expected: Dict[PropertyLabel, Verdict]
    n: Optional[int] = None
    qcqp: Optional[QcqpExpectation] = None
    tags: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    path: Optional[Path] = None


def _read_description(meta_path: Path) -> str:
    desc_path = meta_path.with_name("description.md")
    if desc_path.exists():
        return desc_path.read_text()
    return ""


def _parse_verdict(raw: Any, where: str) -> Verdict:
    try:
        return Verdict(str(raw).strip().lower())
    except ValueError as exc:
        raise DomainError(f"Invalid verdict '{raw}' in {where}. Expected one of {[v.value for v in Verdict]}") from exc


def _parse_qcqp(raw: Dict[str, Any], where: str) -> QcqpExpectation:
    if "b" not in raw:
        raise DomainError(f"qcqp block in {where} needs 'b'")
    raw_status = raw.get("expected_status", QcqpStatus.ATTAINED.value)
    try:
        status = QcqpStatus(str(raw_status).strip().lower())
    except ValueError as exc:
        raise DomainError(
            f"Invalid qcqp status '{raw_status}' in {where}. Expected one of {[s.value for s in QcqpStatus]}"
        ) from exc
    value = raw.get("expected_value")
    return QcqpExpectation(b=float(raw["b"]), status=status, value=None if value is None else float(value))


def load_entry(meta_path: Path, cfg: Optional[Config] = None) -> CorpusEntry:
    meta_path = Path(meta_path)
    try:
        data = json.loads(meta_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise MatrixFileError(f"cannot load {meta_path}: {exc}") from exc
    set_path = meta_path.with_name(data.get("set", "set.json"))
    doc = parse_matrix_file(set_path, cfg=cfg)
    expected = {}
    for raw_label, raw_verdict in (data.get("expected") or {}).items():
        expected[PropertyLabel.parse(raw_label)] = _parse_verdict(raw_verdict, str(meta_path))
    qcqp = data.get("qcqp")
    if qcqp is not None and doc.matrices.size != 2:
        raise DomainError(f"qcqp entries need exactly two matrices [B, A], got {doc.matrices.size} in {set_path}")
    return CorpusEntry(
        name=data.get("name") or meta_path.parent.name,
        description=data.get("description") or _read_description(meta_path),
        matrices=doc.matrices,
        expected=expected,
        n=data.get("n"),
        qcqp=None if qcqp is None else _parse_qcqp(qcqp, str(meta_path)),
        tags=list(data.get("tags", [])),
        notes=list(data.get("notes", [])),
        path=meta_path,
    )


def discover_entries(root: Path) -> List[Path]:
    root = Path(root)
    if not root.exists():
        return []
    return sorted(root.rglob("meta.json"))


def _qcqp_outcome(entry: CorpusEntry, cfg: Config) -> Dict[str, Any]:
    assert entry.qcqp is not None
    B, A = entry.matrices[0], entry.matrices[1]
    problem = SingleConstraintProblem.build(B, A, entry.qcqp.b, cfg)
    solution = solve_single_constraint(problem, cfg)
    match = solution.status is entry.qcqp.status
    if match and entry.qcqp.value is not None:
        match = solution.value is not None and abs(solution.value - entry.qcqp.value) <= QCQP_VALUE_TOL * max(
            1.0, abs(entry.qcqp.value)
        )
    return {
        **solution.to_dict(),
        "expected_status": entry.qcqp.status.value,
        "expected_value": entry.qcqp.value,
        "match": match,
    }


def evaluate_entry(entry: CorpusEntry, cfg: Optional[Config] = None) -> Dict[str, Any]:
    """Run every expected check of one entry and return its report document."""
    cfg = resolve(cfg)
    checks = []
    with timed() as holder:
        for label, expected in entry.expected.items():
            try:
                report = classify(entry.matrices, label, entry.n, cfg)
                actual, rule = report.verdict, report.rule
            except SimdiagError as exc:
                logger.warning("%s: %s failed: %s", entry.name, label.value, exc)
                actual, rule = Verdict.UNKNOWN, f"error: {exc}"
            checks.append(
                {
                    "property": label.value,
                    "expected": expected.value,
                    "actual": actual.value,
                    "rule": rule,
                    "match": actual is expected,
                }
            )
        qcqp = _qcqp_outcome(entry, cfg) if entry.qcqp is not None else None
    passed = all(c["match"] for c in checks) and (qcqp is None or qcqp["match"])
    return {
        "schema": SCHEMA_VERSION,
        "name": entry.name,
        "description": entry.description,
        "tags": entry.tags,
        "dim": entry.matrices.dim,
        "size": entry.matrices.size,
        "checks": checks,
        "qcqp": qcqp,
        "passed": passed,
        "timing": holder["timing"].model_dump(),
    }


# --- summary --------------------------------------------------------------------------


@dataclass
class PropertySummary:
    count: int = 0
    matched: int = 0
    mismatched: int = 0

    def to_dict(self) -> Dict[str, Any]:
        rate = self.matched / self.count if self.count else 0.0
        return {"count": self.count, "matched": self.matched, "mismatched": self.mismatched, "match_rate": round(rate, 4)}


@dataclass
class SuiteSummary:
    entries: int = 0
    passed: int = 0
    failed: int = 0
    checks: int = 0
    matches: int = 0
    mismatches: List[str] = field(default_factory=list)
    by_property: Dict[str, PropertySummary] = field(default_factory=dict)
    by_verdict: Dict[str, int] = field(default_factory=dict)

    @property
    def all_matched(self) -> bool:
        return self.entries > 0 and self.failed == 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema": SCHEMA_VERSION,
            "entries": self.entries,
            "passed": self.passed,
            "failed": self.failed,
            "checks": self.checks,
            "matches": self.matches,
            "mismatches": list(self.mismatches),
            "by_property": {label: s.to_dict() for label, s in sorted(self.by_property.items())},
            "by_verdict": dict(sorted(self.by_verdict.items())),
        }


def aggregate_reports(report_root: Path) -> SuiteSummary:
    """Aggregate every entry report under report_root (summary.json excluded)."""
    summary = SuiteSummary()
    if not report_root.exists():
        return summary
    for path in sorted(report_root.rglob("*.json")):
        if path.name == "summary.json":
            continue
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError):
            logger.warning("Skipping unreadable report %s", path)
            continue
        summary.entries += 1
        if data.get("passed"):
            summary.passed += 1
        else:
            summary.failed += 1
        for check in data.get("checks", []):
            summary.checks += 1
            entry = summary.by_property.setdefault(check["property"], PropertySummary())
            entry.count += 1
            actual = check.get("actual", Verdict.UNKNOWN.value)
            summary.by_verdict[actual] = summary.by_verdict.get(actual, 0) + 1
            if check.get("match"):
                summary.matches += 1
                entry.matched += 1
            else:
                entry.mismatched += 1
                summary.mismatches.append(f"{data.get('name')}: {check['property']} expected {check['expected']}, got {actual}")
        qcqp = data.get("qcqp")
        if qcqp:
            summary.checks += 1
            entry = summary.by_property.setdefault("QCQP", PropertySummary())
            entry.count += 1
            if qcqp.get("match"):
                summary.matches += 1
                entry.matched += 1
            else:
                entry.mismatched += 1
                summary.mismatches.append(
                    f"{data.get('name')}: qcqp expected {qcqp.get('expected_status')} {qcqp.get('expected_value')},"
                    f" got {qcqp.get('status')} {qcqp.get('value')}"
                )
    return summary


def write_summary(report_root: Path, summary: SuiteSummary) -> Path:
    report_root.mkdir(parents=True, exist_ok=True)
    target = report_root / "summary.json"
    target.write_text(json.dumps(summary.to_dict(), indent=2))
    return target


def run_suite(
    root: Path, report_dir: Path, cfg: Optional[Config] = None, session_label: Optional[str] = None
) -> Tuple[Path, SuiteSummary]:
    """Evaluate every corpus entry, write per-entry reports and summary.json into a session directory."""
    cfg = resolve(cfg)
    entries = discover_entries(root)
    if not entries:
        raise MatrixFileError(f"No corpus entries (meta.json) found under {Path(root).resolve()}")
    label = session_label or datetime.now(timezone.utc).strftime("%Y-%m-%dT%H-%M-%SZ")
    run_dir = Path(report_dir) / label
    run_dir.mkdir(parents=True, exist_ok=True)
    for meta_path in entries:
        entry = load_entry(meta_path, cfg)
        console.print(f"[blue]Classifying[/blue] {entry.name}")
        doc = evaluate_entry(entry, cfg)
        write_report(run_dir / f"{entry.name}.json", doc)
        status = "[green]match[/green]" if doc["passed"] else "[red]mismatch[/red]"
        console.print(f"  {status} ({len(doc['checks'])} checks)")
    summary = aggregate_reports(run_dir)
    path = write_summary(run_dir, summary)
    console.print(f"[cyan]Summary written to[/cyan] {path}")
    return run_dir, summary
