"""Matrix-set files: a JSON document or a whitespace table.

JSON:        {"dim": m, "mats": [[[row-major reals] × m] × L], ...extra keys}
whitespace:  first line "m L", then L blocks of m lines with m reals each
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from .config import Config, resolve
from .errors import MatrixFileError, ParseError
from .matcore import MAX_DIM, SymMatrixSet, frob

logger = logging.getLogger("simdiag.matrix_io")

FORMATS = ("json", "text")


@dataclass(frozen=True)
class MatrixSetDocument:
    """A parsed file: the set plus any extra JSON keys (QCQP data, metadata)."""

    matrices: SymMatrixSet
    extras: Dict[str, Any] = field(default_factory=dict)
    source: Optional[str] = None


def detect_format(text: str) -> str:
    return "json" if text.lstrip().startswith("{") else "text"


def _check_symmetry(mats: List[np.ndarray], cfg: Config, symmetrize: bool, lines: Optional[List[int]] = None) -> None:
    if symmetrize:
        return
    for idx, A in enumerate(mats):
        diff = np.abs(A - A.T)
        worst = float(np.max(diff)) if A.size else 0.0
        if worst > cfg.tol_sym * max(frob(A), 1.0):
            i, j = np.unravel_index(int(np.argmax(diff)), diff.shape)
            line = None if lines is None else lines[idx] + int(min(i, j))
            raise ParseError(
                f"matrix {idx} is not symmetric: entry ({i},{j}) = {A[i, j]!r} but ({j},{i}) = {A[j, i]!r}"
                " (pass --symmetrize to average)",
                line=line,
                entry=(idx, int(i), int(j)),
            )


def _finish(mats: List[np.ndarray], m: int, cfg: Config, symmetrize: bool, lines: Optional[List[int]] = None) -> SymMatrixSet:
    if m < 1 or m > MAX_DIM:
        raise ParseError(f"dimension must lie in [1, {MAX_DIM}], got {m}", line=1 if lines is not None else None)
    if not mats:
        raise ParseError("the file contains no matrices")
    _check_symmetry(mats, cfg, symmetrize, lines)
    return SymMatrixSet.from_arrays(mats, cfg, symmetrize=True)


def _parse_json(text: str, cfg: Config, symmetrize: bool) -> MatrixSetDocument:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(raw, dict) or "mats" not in raw:
        raise ParseError("JSON matrix file must be an object with a 'mats' list")
    mats_raw = raw["mats"]
    if not isinstance(mats_raw, list):
        raise ParseError(f"'mats' must be a list, got {type(mats_raw).__name__}")
    for idx, rows in enumerate(mats_raw):
        if not isinstance(rows, list):
            raise ParseError(f"matrix {idx} must be a list of rows, got {type(rows).__name__}", entry=(idx,))
    m = raw.get("dim")
    if m is None:
        m = len(mats_raw[0]) if mats_raw else 0
    if not isinstance(m, int) or isinstance(m, bool):
        raise ParseError(f"'dim' must be an integer, got {m!r}")
    mats = []
    for idx, rows in enumerate(mats_raw):
        if len(rows) != m:
            raise ParseError(f"matrix {idx} must have {m} rows", entry=(idx,))
        for r, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != m:
                raise ParseError(f"matrix {idx} row {r} must have {m} entries", entry=(idx, r))
            for c, value in enumerate(row):
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ParseError(f"matrix {idx} entry ({r},{c}) must be a number, got {value!r}", entry=(idx, r, c))
        try:
            A = np.array(rows, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"matrix {idx} has non-numeric entries", entry=(idx,)) from exc
        if not np.all(np.isfinite(A)):
            raise ParseError(f"matrix {idx} has non-finite entries", entry=(idx,))
        mats.append(A)
    extras = {key: value for key, value in raw.items() if key not in ("dim", "mats")}
    return MatrixSetDocument(matrices=_finish(mats, m, cfg, symmetrize), extras=extras)


def _parse_text(text: str, cfg: Config, symmetrize: bool) -> MatrixSetDocument:
    rows = [(no, line.split()) for no, line in enumerate(text.splitlines(), start=1)]
    rows = [(no, tokens) for no, tokens in rows if tokens and not tokens[0].startswith("#")]
    if not rows:
        raise ParseError("empty matrix file", line=1)
    header_no, header = rows[0]
    if len(header) != 2:
        raise ParseError(f"header must be 'm L', got {' '.join(header)!r}", line=header_no)
    try:
        m, count = int(header[0]), int(header[1])
    except ValueError as exc:
        raise ParseError(f"header must hold two integers, got {' '.join(header)!r}", line=header_no) from exc
    if count < 1:
        raise ParseError(f"matrix count must be >= 1, got {count}", line=header_no)
    body = rows[1:]
    if len(body) != m * count:
        last = body[-1][0] if body else header_no
        raise ParseError(f"expected {m * count} matrix rows for m={m}, L={count}, got {len(body)}", line=last)
    mats, starts = [], []
    for idx in range(count):
        block = body[idx * m : (idx + 1) * m]
        starts.append(block[0][0] if block else header_no)
        values = []
        for no, tokens in block:
            if len(tokens) != m:
                raise ParseError(f"row has {len(tokens)} entries, expected {m}", line=no)
            try:
                values.append([float(t) for t in tokens])
            except ValueError as exc:
                raise ParseError(f"non-numeric entry in {' '.join(tokens)!r}", line=no) from exc
        A = np.array(values, dtype=float)
        if not np.all(np.isfinite(A)):
            raise ParseError(f"matrix {idx} has non-finite entries", line=starts[-1])
        mats.append(A)
    return MatrixSetDocument(matrices=_finish(mats, m, cfg, symmetrize, starts))


def parse_matrix_text(
    text: str, fmt: Optional[str] = None, cfg: Optional[Config] = None, symmetrize: bool = False
) -> MatrixSetDocument:
    cfg = resolve(cfg)
    fmt = fmt or detect_format(text)
    if fmt not in FORMATS:
        raise MatrixFileError(f"Invalid format '{fmt}'. Expected one of {list(FORMATS)}")
    if fmt == "json":
        return _parse_json(text, cfg, symmetrize)
    return _parse_text(text, cfg, symmetrize)


def parse_matrix_file(
    path: Union[str, Path], fmt: Optional[str] = None, cfg: Optional[Config] = None, symmetrize: bool = False
) -> MatrixSetDocument:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise MatrixFileError(f"cannot read {path}: {exc.strerror}") from exc
    doc = parse_matrix_text(text, fmt, cfg, symmetrize)
    logger.debug("Parsed %s: L=%d m=%d", path, doc.matrices.size, doc.matrices.dim)
    return MatrixSetDocument(matrices=doc.matrices, extras=doc.extras, source=str(path))


def matrix_set_document(mats: Sequence[Any], extras: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    arrays = [np.asarray(A, dtype=float) for A in mats]
    dim = arrays[0].shape[0] if arrays else 0
    return {"dim": dim, "mats": [A.tolist() for A in arrays], **(extras or {})}


def dumps_matrix_set(mats: Sequence[Any], fmt: str = "json", extras: Optional[Dict[str, Any]] = None) -> str:
    """Serialize matrices; floats use their shortest round-trip repr, so parsing is bit-faithful."""
    if fmt not in FORMATS:
        raise MatrixFileError(f"Invalid format '{fmt}'. Expected one of {list(FORMATS)}")
    if fmt == "json":
        return json.dumps(matrix_set_document(mats, extras), indent=2)
    arrays = [np.asarray(A, dtype=float) for A in mats]
    dim = arrays[0].shape[0] if arrays else 0
    lines = [f"{dim} {len(arrays)}"]
    for A in arrays:
        lines.extend(" ".join(repr(float(v)) for v in row) for row in A)
    return "\n".join(lines) + "\n"


def write_matrix_file(
    path: Union[str, Path], mats: Sequence[Any], fmt: str = "json", extras: Optional[Dict[str, Any]] = None
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_matrix_set(mats, fmt, extras), encoding="utf-8")
    return path
