"""Report documents: verdicts, certificates, verification tables and solver outputs."""
from __future__ import annotations

import json
import time
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterator, List, Literal, Optional, Union

from pydantic import BaseModel, Field, model_validator

SCHEMA_VERSION = 1


class Verdict(str, Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


class TimingInfo(BaseModel):
    """Timing metadata for a decision or solver step."""

    started_at: float = Field(description="Wall-clock start time (epoch seconds)")
    ended_at: float = Field(description="Wall-clock end time (epoch seconds)")
    duration_seconds: float = Field(description="Elapsed seconds (end-start)")


@contextmanager
def timed() -> Iterator[Dict[str, TimingInfo]]:
    """Yield a holder whose ``timing`` entry is filled when the block exits."""
    holder: Dict[str, TimingInfo] = {}
    started_at = time.time()
    try:
        yield holder
    finally:
        ended_at = time.time()
        holder["timing"] = TimingInfo(
            started_at=started_at,
            ended_at=ended_at,
            duration_seconds=round(ended_at - started_at, 6),
        )


class ConditionTrace(BaseModel):
    """Which rule fired, with the quantities it measured."""

    kind: Literal["trace"] = "trace"
    rule: str = Field(default="", description="Tag of the criterion that justifies the verdict")
    measured: Dict[str, float] = Field(default_factory=dict)
    notes: List[str] = Field(default_factory=list)
    numerical: bool = Field(default=False, description="True when the evidence is sampled rather than exact")


class CommutatorCertificate(BaseModel):
    kind: Literal["commutator"] = "commutator"
    norms: Dict[str, float] = Field(description="Pairwise commutator norms keyed 'i,j'")
    threshold: float


class JordanCertificate(BaseModel):
    kind: Literal["jordan"] = "jordan"
    label: str = Field(description="Which matrix was put in Jordan form, e.g. 'S^-1 A_2'")
    blocks: List[Dict[str, Any]]
    residual: float


class PencilCertificate(BaseModel):
    kind: Literal["pencil"] = "pencil"
    coeffs: List[float]
    pencil_kind: str
    measure: float
    probabilistic: bool = False


class VerificationRow(BaseModel):
    k: float
    offdiag: float = Field(description="Sum over the set of ‖offdiag(PₖᵀAᵢPₖ)‖")
    max_diag: float = Field(description="Max over the set of ‖diag(PₖᵀAᵢPₖ)‖")
    det_drift: float = Field(description="|det(Pₖ) − det_value| / |det_value|")


class VerificationReport(BaseModel):
    recipe: str
    det_value: float
    rows: List[VerificationRow]
    monotone_decay: bool
    bounded_diag: bool
    det_constant: bool
    decay_slope: Optional[float] = Field(default=None, description="Log-log slope of offdiag against k")

    @property
    def passed(self) -> bool:
        return self.monotone_decay and self.det_constant


class SequenceCertificate(BaseModel):
    kind: Literal["sequence"] = "sequence"
    recipe: str
    det_value: float
    verification: Optional[VerificationReport] = None


Certificate = Union[CommutatorCertificate, JordanCertificate, PencilCertificate, SequenceCertificate, ConditionTrace]


class ClassificationReport(BaseModel):
    """Verdict for one property, with the rule that produced it and its evidence."""

    property: str
    verdict: Verdict
    trace: ConditionTrace = Field(default_factory=ConditionTrace)
    certificates: List[Certificate] = Field(default_factory=list)
    diagonalizer: Optional[List[List[float]]] = None
    timing: Optional[TimingInfo] = None

    @model_validator(mode="after")
    def decided_verdicts_name_a_rule(self) -> "ClassificationReport":
        if self.verdict is not Verdict.UNKNOWN and not self.trace.rule:
            raise ValueError(f"Verdict '{self.verdict.value}' for {self.property} must name the rule that fired")
        return self

    @property
    def rule(self) -> str:
        return self.trace.rule

    def certificate(self, kind: str) -> Optional[Certificate]:
        return next((c for c in self.certificates if c.kind == kind), None)

    def to_document(self) -> Dict[str, Any]:
        return {"schema": SCHEMA_VERSION, **self.model_dump(mode="json")}


class LatticeRow(BaseModel):
    """Every property decided for one set, plus the violated implications."""

    reports: Dict[str, ClassificationReport]
    context: Dict[str, bool] = Field(default_factory=dict, description="Set facts that gate extra equivalences")
    violations: List[str] = Field(default_factory=list)

    def verdict(self, label: str) -> Verdict:
        return self.reports[label].verdict

    def to_document(self) -> Dict[str, Any]:
        return {"schema": SCHEMA_VERSION, **self.model_dump(mode="json")}


def document(model: BaseModel) -> Dict[str, Any]:
    return {"schema": SCHEMA_VERSION, **model.model_dump(mode="json")}


def error_document(exc: BaseException) -> Dict[str, Any]:
    return {"schema": SCHEMA_VERSION, "error": {"type": type(exc).__name__, "message": str(exc)}}


def write_report(path: Path, doc: Dict[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2))
    return path
