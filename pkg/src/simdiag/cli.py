"""The ``simdiag`` command line: classify, sequence, qcqp, dsdo, synth and suite.

Exit codes: 0 yes / success, 1 no, 2 unknown, 3 file error, 4 other library error, 64 usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from dotenv import load_dotenv
from rich.console import Console
from rich.table import Table

from . import __version__
from .canon import LancasterBlockDescriptor, lancaster_layout, synthesize_lancaster_pair
from .classify import PropertyLabel, classify, classify_all, twsd_witness
from .config import TOL_FLAG_PREFIX, Config, parse_tol_flags
from .dsdo import dsdo_construct
from .errors import DomainError, MatrixFileError, SimdiagError, UsageError
from .logging_config import configure_logging
from .matcore import SymMatrixSet
from .matrix_io import MatrixSetDocument, dumps_matrix_set, matrix_set_document, parse_matrix_file
from .qcqp import (
    QcqpInstance,
    QcqpStatus,
    SingleConstraintProblem,
    homogenize,
    solve_lp_relaxation,
    solve_single_constraint,
)
from .reporting import SCHEMA_VERSION, Verdict, error_document
from .sequences import DEFAULT_K_GRID, CongruenceSequence, evaluate, seq_constant, seq_singular_pair, verify_sequence

console = Console()
logger = logging.getLogger("simdiag.cli")

EXIT_YES, EXIT_NO, EXIT_UNKNOWN = 0, 1, 2
EXIT_FILE_ERROR, EXIT_ERROR, EXIT_USAGE = 3, 4, 64
_VERDICT_EXIT = {Verdict.YES: EXIT_YES, Verdict.NO: EXIT_NO, Verdict.UNKNOWN: EXIT_UNKNOWN}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _common() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    mode = parent.add_mutually_exclusive_group()
    mode.add_argument("--json", dest="output", action="store_const", const="json", help="Machine-readable output")
    mode.add_argument("--text", dest="output", action="store_const", const="text", help="Console output (default)")
    parent.add_argument("--config", type=Path, help="YAML file with Config fields")
    parent.add_argument("--symmetrize", action="store_true", help="Average (A+Aᵀ)/2 instead of rejecting asymmetry")
    return parent


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="simdiag", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"simdiag {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("classify", parents=[common], help="Decide one property or the whole lattice")
    p.add_argument("path", type=Path)
    p.add_argument("--property", default="all", help=f"One of {[l.value for l in PropertyLabel]} or 'all'")
    p.add_argument("--n", type=int, help="Target dimension for the projective variants (default m+1)")

    p = sub.add_parser("sequence", parents=[common], help="Emit a TWSD witness sequence and its verification")
    p.add_argument("path", type=Path)
    p.add_argument("--k", default="10,100", help="Comma-separated k values at which to emit P_k")

    p = sub.add_parser("qcqp", parents=[common], help="Solve a QCQP file")
    p.add_argument("path", type=Path)
    kind = p.add_mutually_exclusive_group()
    kind.add_argument("--single", dest="qmode", action="store_const", const="single", help="mats = [B, A]; min xᵀBx s.t. xᵀAx <= b")
    kind.add_argument("--relax", dest="qmode", action="store_const", const="relax", help="mats = [A0, A1, ...]; LP relaxation")
    p.add_argument("--b", type=float, help="Right-hand side for --single (else the file's 'b')")
    p.add_argument("--k", type=float, default=1e3, help="Sequence parameter for --relax")
    p.add_argument("--half", action="store_true", help="Data uses the ½xᵀAx + aᵀx + c convention")

    p = sub.add_parser("dsdo", parents=[common], help="Stacked projective factorization")
    p.add_argument("path", type=Path)
    p.add_argument("--out", type=Path, help="Write the factorization document here")

    p = sub.add_parser("synth", parents=[common], help="Synthesize a pair from block descriptors")
    p.add_argument("path", type=Path, help="JSON list of descriptors, or an object with 'blocks'")
    p.add_argument("--seed", type=int, help="Scramble the pair with a random nonsingular congruence")
    p.add_argument("--out", type=Path, help="Write the pair file here instead of stdout")

    p = sub.add_parser("suite", parents=[common], help="Classify every corpus entry and write summary.json")
    p.add_argument("--corpus", type=Path, default=Path(os.getenv("SIMDIAG_CORPUS_DIR", "corpus")))
    p.add_argument("--report-dir", type=Path, default=Path(os.getenv("SIMDIAG_REPORT_DIR", "reports")))
    return parser


def _split_tol_tokens(argv: Sequence[str]) -> Tuple[List[str], List[str]]:
    tol = [t for t in argv if t.startswith(TOL_FLAG_PREFIX)]
    rest = [t for t in argv if not t.startswith(TOL_FLAG_PREFIX)]
    return tol, rest


def _emit(args: argparse.Namespace, doc: Dict[str, Any]) -> None:
    if args.output == "json":
        print(json.dumps(doc, indent=2))


def _load(args: argparse.Namespace, cfg: Config) -> MatrixSetDocument:
    return parse_matrix_file(args.path, cfg=cfg, symmetrize=args.symmetrize)


# --- classify ---------------------------------------------------------------------------


def cmd_classify(args: argparse.Namespace, cfg: Config) -> int:
    C = _load(args, cfg).matrices
    if args.property.strip().lower() == "all":
        row = classify_all(C, args.n, cfg)
        _emit(args, row.to_document())
        if args.output != "json":
            table = Table(title=f"{args.path} (m={C.dim}, L={C.size})")
            table.add_column("property")
            table.add_column("verdict")
            table.add_column("rule")
            for label, report in row.reports.items():
                table.add_row(label, report.verdict.value, report.rule or "-")
            console.print(table)
            for violation in row.violations:
                console.print(f"[red]violation:[/red] {violation}")
        return EXIT_YES if not row.violations else EXIT_NO
    label = PropertyLabel.parse(args.property)
    report = classify(C, label, args.n, cfg)
    _emit(args, report.to_document())
    if args.output != "json":
        color = {Verdict.YES: "green", Verdict.NO: "red", Verdict.UNKNOWN: "yellow"}[report.verdict]
        console.print(f"{report.property}: [{color}]{report.verdict.value}[/{color}] ({report.rule or 'no rule fired'})")
        for note in report.trace.notes:
            console.print(f"  note: {note}")
    return _VERDICT_EXIT[report.verdict]


# --- sequence ---------------------------------------------------------------------------


def _parse_k_values(raw: str) -> List[float]:
    try:
        values = [float(t) for t in raw.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"--k needs comma-separated numbers, got '{raw}'") from exc
    if not values:
        raise UsageError("--k needs at least one value")
    return values


def _witness_for(doc: MatrixSetDocument, cfg: Config) -> Tuple[Optional[CongruenceSequence], str]:
    blocks = doc.extras.get("blocks")
    if blocks is not None and doc.matrices.size == 2:
        descriptors = [LancasterBlockDescriptor.from_dict(b) for b in blocks]
        scramble = doc.extras.get("scramble")
        seq = seq_singular_pair(descriptors, None if scramble is None else np.asarray(scramble, dtype=float))
        return seq, "block descriptors"
    report, seq = twsd_witness(doc.matrices, cfg)
    return seq, report.rule


def cmd_sequence(args: argparse.Namespace, cfg: Config) -> int:
    doc = _load(args, cfg)
    ks = _parse_k_values(args.k)
    seq, source = _witness_for(doc, cfg)
    if seq is None:
        out = {"schema": SCHEMA_VERSION, "sequence": None, "notes": ["no constructive sequence is available"]}
        _emit(args, out)
        if args.output != "json":
            console.print("[yellow]No constructive sequence is available for this set[/yellow]")
        return EXIT_UNKNOWN
    grid = sorted(set(ks) | set(DEFAULT_K_GRID))
    verification = verify_sequence(doc.matrices, seq, grid, cfg)
    out = {
        "schema": SCHEMA_VERSION,
        "recipe": seq.recipe_name,
        "source": source,
        "det_value": seq.det_value,
        "decay_order": seq.decay_order if np.isfinite(seq.decay_order) else None,
        "matrices": [{"k": k, "P": evaluate(seq, k).tolist()} for k in ks],
        "verification": verification.model_dump(mode="json"),
    }
    _emit(args, out)
    if args.output != "json":
        table = Table(title=f"{seq.recipe_name} (det {seq.det_value:.6g})")
        for column in ("k", "offdiag", "max diag", "det drift"):
            table.add_column(column, justify="right")
        for row in verification.rows:
            table.add_row(f"{row.k:g}", f"{row.offdiag:.3e}", f"{row.max_diag:.3e}", f"{row.det_drift:.1e}")
        console.print(table)
        console.print(
            f"monotone decay: {verification.monotone_decay}  bounded: {verification.bounded_diag}"
            f"  constant det: {verification.det_constant}"
        )
    return EXIT_YES if verification.passed else EXIT_NO


# --- qcqp -------------------------------------------------------------------------------


def _single_problem(doc: MatrixSetDocument, args: argparse.Namespace, cfg: Config) -> SingleConstraintProblem:
    C = doc.matrices
    if C.size != 2:
        raise DomainError(f"--single needs mats = [B, A], got {C.size} matrices")
    b = args.b if args.b is not None else doc.extras.get("b")
    if b is None:
        raise UsageError("--single needs --b or a 'b' entry in the file")
    return SingleConstraintProblem.build(C[0], C[1], float(b), cfg)


def _relax_instance(doc: MatrixSetDocument, args: argparse.Namespace, cfg: Config) -> QcqpInstance:
    C = doc.matrices
    count = C.size - 1
    c = doc.extras.get("c", [0.0] * count)
    a = doc.extras.get("a", [None] * count)
    if len(c) != count or len(a) != count:
        raise DomainError(f"Expected {count} constraint offsets and linear terms, got {len(c)} and {len(a)}")
    constraints = [(C[i + 1], a[i], float(c[i])) for i in range(count)]
    half = args.half or bool(doc.extras.get("half", False))
    factory = QcqpInstance.from_half_form if half else QcqpInstance.build
    return factory(C[0], doc.extras.get("a0"), constraints, cfg=cfg)


def cmd_qcqp(args: argparse.Namespace, cfg: Config) -> int:
    doc = _load(args, cfg)
    if (args.qmode or "single") == "single":
        solution = solve_single_constraint(_single_problem(doc, args, cfg), cfg)
        out = {"schema": SCHEMA_VERSION, **solution.to_dict()}
        finite = solution.status in (QcqpStatus.ATTAINED, QcqpStatus.INFIMUM_ONLY)
        status, value = solution.status.value, solution.value
    else:
        q = _relax_instance(doc, args, cfg)
        if not q.is_homogeneous:
            q = homogenize(q)
        report, seq = twsd_witness(SymMatrixSet.from_arrays([q.A0, *(g.A for g in q.constraints)], cfg), cfg)
        notes = [f"sequence from {report.rule}"] if seq is not None else ["no TWSD witness; relaxing in the standard basis"]
        if seq is None:
            seq = seq_constant(np.eye(q.dim))
        relaxed = solve_lp_relaxation(q, seq, args.k, cfg)
        out = {"schema": SCHEMA_VERSION, **relaxed.to_dict(), "notes": notes}
        finite = relaxed.value is not None
        status, value = relaxed.lp_result.status.value, relaxed.value
    _emit(args, out)
    if args.output != "json":
        console.print(f"status: [bold]{status}[/bold]  value: {value if value is not None else '-'}")
    return EXIT_YES if finite else EXIT_NO


# --- dsdo / synth -----------------------------------------------------------------------


def cmd_dsdo(args: argparse.Namespace, cfg: Config) -> int:
    C = _load(args, cfg).matrices
    fact = dsdo_construct(C, cfg)
    doc = matrix_set_document(fact.D, {"P": fact.P.tolist(), "mode": fact.mode.value, "residual": fact.residual})
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(json.dumps(doc, indent=2))
    _emit(args, {"schema": SCHEMA_VERSION, **doc})
    if args.output != "json":
        console.print(f"n={fact.n} m={fact.m} residual={fact.residual:.3e}")
    return EXIT_YES


def _random_scramble(m: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal((m, m)) + m * np.eye(m)


def cmd_synth(args: argparse.Namespace, cfg: Config) -> int:
    try:
        raw = json.loads(args.path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise MatrixFileError(f"cannot read descriptors from {args.path}: {exc}") from exc
    items = raw.get("blocks", []) if isinstance(raw, dict) else raw
    blocks = lancaster_layout([LancasterBlockDescriptor.from_dict(item) for item in items])
    m = sum(b.dim for b in blocks)
    scramble = None if args.seed is None else _random_scramble(m, args.seed)
    A, B = synthesize_lancaster_pair(blocks, scramble)
    extras: Dict[str, Any] = {"blocks": [b.to_dict() for b in blocks]}
    if scramble is not None:
        extras["scramble"] = scramble.tolist()
    text = dumps_matrix_set([A, B], "json", extras)
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text)
        if args.output != "json":
            console.print(f"[green]Wrote[/green] {args.out} (m={m})")
    else:
        print(text)
    return EXIT_YES


def cmd_suite(args: argparse.Namespace, cfg: Config) -> int:
    from .corpus import run_suite

    run_dir, summary = run_suite(args.corpus, args.report_dir, cfg)
    _emit(args, {**summary.to_dict(), "report_dir": str(run_dir)})
    if args.output != "json":
        color = "green" if summary.all_matched else "red"
        console.print(f"[{color}]{summary.matches}/{summary.checks} checks matched[/{color}]")
        for line in summary.mismatches:
            console.print(f"  [red]{line}[/red]")
    return EXIT_YES if summary.all_matched else EXIT_NO


COMMANDS = {
    "classify": cmd_classify,
    "sequence": cmd_sequence,
    "qcqp": cmd_qcqp,
    "dsdo": cmd_dsdo,
    "synth": cmd_synth,
    "suite": cmd_suite,
}


def _load_env() -> None:
    env_path = Path(os.getenv("SIMDIAG_ENV_FILE", ".env"))
    if env_path.exists():
        load_dotenv(env_path, override=False)


def _exit_code(exc: SimdiagError) -> int:
    if isinstance(exc, UsageError):
        return EXIT_USAGE
    if isinstance(exc, MatrixFileError):
        return EXIT_FILE_ERROR
    return EXIT_ERROR


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    _load_env()
    configure_logging()
    json_mode = "--json" in argv
    try:
        tol_tokens, rest = _split_tol_tokens(argv)
        args = build_parser().parse_args(rest)
        if args.output is None:
            args.output = "text"
        cfg = Config.from_sources(yaml_path=args.config, overrides=parse_tol_flags(tol_tokens))
        logger.debug("Running %s with %s", args.command, cfg)
        return COMMANDS[args.command](args, cfg)
    except SimdiagError as exc:
        failure: SimdiagError = exc
    except ValueError as exc:
        # pydantic validation of tolerance values
        failure = UsageError(str(exc))
    if json_mode:
        print(json.dumps(error_document(failure), indent=2))
    else:
        console.print(f"[red]{type(failure).__name__}:[/red] {failure}")
    return _exit_code(failure)


if __name__ == "__main__":
    sys.exit(main())
