"""Decision procedures for the simultaneous-diagonalizability hierarchy.

Every check returns a ClassificationReport with a three-valued verdict; decided
verdicts carry the tag of the criterion that produced them.
"""
from __future__ import annotations

import functools
import logging
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as la
from scipy.sparse.csgraph import connected_components

from .config import Config, resolve
from .dsdo import BASIS_MAX_DIM, dsdo_basis_construct, dsdo_construct
from .errors import DomainError, JordanUnreliableError, SimdiagError
from .jordan import RealJordanForm, has_only_real_eigenvalues, is_nilpotent, real_jordan_form
from .matcore import (
    PencilKind,
    PencilSearch,
    SymMatrixSet,
    congruence,
    diag_norm,
    find_definite_pencil,
    find_nonsingular_pencil,
    frob,
    is_singular,
    offdiag_norm,
    s_commutator,
)
from .reporting import (
    ClassificationReport,
    CommutatorCertificate,
    ConditionTrace,
    JordanCertificate,
    LatticeRow,
    PencilCertificate,
    SequenceCertificate,
    Verdict,
    timed,
)
from .sequences import (
    DEFAULT_K_GRID,
    CongruenceSequence,
    evaluate,
    seq_block_split,
    seq_commuting_family,
    seq_constant,
    seq_nonsingular_pair,
    seq_psd_pencil,
    verify_sequence,
)

logger = logging.getLogger("simdiag.classify")


class PropertyLabel(str, Enum):
    SDO = "SDO"
    SD = "SD"
    TWSD = "TWSD"
    TWSD_B = "TWSD-B"
    DWSD = "DWSD"
    T_SDO = "T-SDO"
    T_SD = "T-SD"
    D_SDO = "D-SDO"
    D_SD = "D-SD"

    @property
    def takes_n(self) -> bool:
        return self in (PropertyLabel.T_SDO, PropertyLabel.T_SD, PropertyLabel.D_SDO, PropertyLabel.D_SD)

    def text(self, n: Optional[int] = None) -> str:
        return f"{self.value}({n})" if self.takes_n and n is not None else self.value

    @classmethod
    def parse(cls, raw: str) -> "PropertyLabel":
        try:
            return cls(raw.strip().upper())
        except ValueError as exc:
            valid = [label.value for label in cls]
            raise DomainError(f"Invalid property '{raw}'. Expected one of {valid}") from exc


Decision = Tuple[ClassificationReport, Optional[CongruenceSequence]]


def _report(
    label: str,
    verdict: Verdict,
    rule: str = "",
    measured: Optional[Dict[str, float]] = None,
    notes: Optional[List[str]] = None,
    numerical: bool = False,
    certificates: Optional[list] = None,
    diagonalizer: Optional[np.ndarray] = None,
) -> ClassificationReport:
    return ClassificationReport(
        property=label,
        verdict=verdict,
        trace=ConditionTrace(rule=rule, measured=measured or {}, notes=notes or [], numerical=numerical),
        certificates=certificates or [],
        diagonalizer=None if diagonalizer is None else diagonalizer.tolist(),
    )


def _relabel(report: ClassificationReport, label: str, prefix: str) -> ClassificationReport:
    rule = f"{prefix}; {report.rule}" if report.rule else ""
    trace = report.trace.model_copy(update={"rule": rule})
    return report.model_copy(update={"property": label, "trace": trace})


def _timed(fn: Callable[..., ClassificationReport]) -> Callable[..., ClassificationReport]:
    @functools.wraps(fn)
    def wrapper(*args, **kwargs) -> ClassificationReport:
        with timed() as holder:
            report = fn(*args, **kwargs)
        report.timing = holder["timing"]
        return report

    return wrapper


# --- shared measurements --------------------------------------------------------------


def _commutators(C: SymMatrixSet, S: Optional[np.ndarray], cfg: Config) -> Tuple[Dict[str, float], float]:
    """Pairwise (S-)commutator norms and the relative vanishing threshold."""
    base = max(max(frob(A) for A in C) ** 2, 1e-300)
    if S is not None:
        s_min = la.svdvals(S)[-1]
        base = base / max(s_min, 1e-300) ** 2
    norms = {}
    for i in range(C.size):
        for j in range(i + 1, C.size):
            norms[f"{i},{j}"] = frob(s_commutator(C[i], C[j], S, cfg))
    return norms, cfg.tol_comm * base


def _commutator_certificate(norms: Dict[str, float], threshold: float) -> CommutatorCertificate:
    return CommutatorCertificate(norms=norms, threshold=threshold)


def _pencil_certificate(search: PencilSearch) -> PencilCertificate:
    w = search.witness
    assert w is not None
    return PencilCertificate(
        coeffs=list(w.coeffs), pencil_kind=PencilKind(w.kind).value, measure=w.measure, probabilistic=search.probabilistic
    )


def _jordan_certificate(jf: RealJordanForm, label: str) -> JordanCertificate:
    return JordanCertificate(label=label, blocks=[b.to_dict() for b in jf.blocks], residual=jf.residual)


def _sequence_certificate(C: SymMatrixSet, seq: CongruenceSequence, cfg: Config) -> SequenceCertificate:
    try:
        verification = verify_sequence(C, seq, DEFAULT_K_GRID, cfg)
    except SimdiagError as exc:
        logger.info("Sequence %s could not be verified: %s", seq.recipe_name, exc)
        verification = None
    return SequenceCertificate(recipe=seq.recipe_name, det_value=seq.det_value, verification=verification)


def _pd_pencil(C: SymMatrixSet, cfg: Config) -> Optional[PencilSearch]:
    search = find_definite_pencil(C, cfg)
    if search.found and PencilKind(search.witness.kind) is PencilKind.POSITIVE_DEFINITE:
        return search
    return None


def _other_member(C: SymMatrixSet, coeffs: Sequence[float]) -> np.ndarray:
    """The pair member that, with the pencil, spans the pair."""
    return C[1] if abs(coeffs[0]) > 0.0 else C[0]


def _jordan_tol(M: np.ndarray, cfg: Config) -> float:
    return cfg.tol_cluster * max(float(np.linalg.norm(M, 2)), 1.0)


# --- SDO / SD -------------------------------------------------------------------------


def _joint_eigenbasis(C: SymMatrixSet, cfg: Config) -> np.ndarray:
    """Refine eigenspaces matrix by matrix; commuting sets end with joint eigenvectors."""
    scale = max(max(float(np.linalg.norm(A, 2)) for A in C), 1e-300)
    spaces = [np.eye(C.dim)]
    for A in C:
        refined = []
        for U in spaces:
            if U.shape[1] == 1:
                refined.append(U)
                continue
            w, V = la.eigh(congruence(A, U))
            start = 0
            for j in range(1, len(w) + 1):
                if j == len(w) or w[j] - w[j - 1] > cfg.tol_eig * scale:
                    refined.append(U @ V[:, start:j])
                    start = j
        spaces = refined
    Q = np.hstack(spaces)
    if np.linalg.det(Q) < 0:
        Q[:, -1] = -Q[:, -1]
    return Q


def _check_sdo(C: SymMatrixSet, cfg: Config) -> ClassificationReport:
    label = PropertyLabel.SDO.value
    norms, threshold = _commutators(C, None, cfg)
    cert = _commutator_certificate(norms, threshold)
    worst = max(norms.values(), default=0.0)
    if worst > threshold:
        return _report(label, Verdict.NO, "pairwise-commutators", {"max_commutator": worst}, certificates=[cert])
    Q = _joint_eigenbasis(C, cfg)
    off = max(offdiag_norm(congruence(A, Q)) for A in C)
    limit = cfg.tol_diag * max(C.scale(), 1.0)
    if off > limit:
        return _report(
            label,
            Verdict.UNKNOWN,
            notes=[f"commutators vanish but the joint eigenbasis leaves offdiag {off:.3e} > {limit:.3e}"],
            numerical=True,
            certificates=[cert],
        )
    return _report(
        label,
        Verdict.YES,
        "pairwise-commutators",
        {"max_commutator": worst, "offdiag": off},
        certificates=[cert],
        diagonalizer=Q,
    )


@_timed
def check_sdo(C: SymMatrixSet, cfg: Optional[Config] = None) -> ClassificationReport:
    return _check_sdo(C, resolve(cfg))


def _check_sd(C: SymMatrixSet, cfg: Config) -> ClassificationReport:
    label = PropertyLabel.SD.value
    sdo = _check_sdo(C, cfg)
    if sdo.verdict is Verdict.YES:
        return _relabel(sdo, label, "orthogonal-diagonalizer")

    pd = _pd_pencil(C, cfg)
    if pd is not None:
        factor = la.cholesky(pd.witness.pencil, lower=True)
        P = la.solve_triangular(factor, np.eye(C.dim), lower=True).T
        reduced = _check_sdo(C.congruence(P), cfg)
        report = _relabel(reduced, label, "positive-definite-pencil")
        report.certificates.append(_pencil_certificate(pd))
        if reduced.diagonalizer is not None:
            report.diagonalizer = (P @ np.asarray(reduced.diagonalizer)).tolist()
        return report

    ns = find_nonsingular_pencil(C, cfg)
    if not ns.found:
        note = "no nonsingular pencil was found; the pencil criterion does not apply"
        return _report(label, Verdict.UNKNOWN, notes=[note, *ns.notes], numerical=ns.probabilistic)
    S = ns.witness.pencil
    certs: list = [_pencil_certificate(ns)]
    for i, A in enumerate(C):
        M = la.solve(S, A)
        try:
            jf = real_jordan_form(M, cfg)
        except JordanUnreliableError as exc:
            return _report(label, Verdict.UNKNOWN, notes=[f"S^-1 A_{i}: {exc}"], certificates=certs)
        if not jf.is_diagonal:
            certs.append(_jordan_certificate(jf, f"S^-1 A_{i}"))
            return _report(label, Verdict.NO, "jordan-form-not-diagonal", {"member": float(i)}, certificates=certs)
    norms, threshold = _commutators(C, S, cfg)
    certs.append(_commutator_certificate(norms, threshold))
    worst = max(norms.values(), default=0.0)
    if worst > threshold:
        return _report(label, Verdict.NO, "pencil-commutators", {"max_commutator": worst}, certificates=certs)
    return _report(label, Verdict.YES, "diagonal-jordan-and-commuting", {"max_commutator": worst}, certificates=certs)


@_timed
def check_sd(C: SymMatrixSet, cfg: Optional[Config] = None) -> ClassificationReport:
    return _check_sd(C, resolve(cfg))


def _require_n(C: SymMatrixSet, n: int) -> None:
    if n < C.dim:
        raise DomainError(f"n must be >= m={C.dim}, got {n}")


@_timed
def check_t_sdo(C: SymMatrixSet, n: int, cfg: Optional[Config] = None) -> ClassificationReport:
    _require_n(C, n)
    return _relabel(_check_sdo(C, resolve(cfg)), PropertyLabel.T_SDO.text(n), "projective-collapse")


@_timed
def check_t_sd(C: SymMatrixSet, n: int, cfg: Optional[Config] = None) -> ClassificationReport:
    _require_n(C, n)
    return _relabel(_check_sd(C, resolve(cfg)), PropertyLabel.T_SD.text(n), "projective-collapse")


# --- TWSD-B ---------------------------------------------------------------------------


def _constant_from(report: ClassificationReport) -> Optional[CongruenceSequence]:
    if report.diagonalizer is None:
        return None
    return seq_constant(np.asarray(report.diagonalizer))


def _twsdb_pair(C: SymMatrixSet, cfg: Config) -> Decision:
    label = PropertyLabel.TWSD_B.value
    ns = find_nonsingular_pencil(C, cfg)
    if not ns.found:
        return _report(label, Verdict.YES, "singular-pair"), None
    coeffs = ns.witness.coeffs
    S = ns.witness.pencil
    M = la.solve(S, _other_member(C, coeffs))
    verdict = has_only_real_eigenvalues(M, cfg)
    certs: list = [_pencil_certificate(ns)]
    max_imag = float(np.max(np.abs(la.eigvals(M).imag)))
    measured = {"max_imag": max_imag}
    if verdict is Verdict.UNKNOWN:
        note = "eigenvalue realness is within tolerance of the boundary"
        return _report(label, verdict, measured=measured, notes=[note], certificates=certs), None
    if verdict is Verdict.NO:
        return _report(label, verdict, "pair-real-spectrum", measured, certificates=certs), None
    seq = None
    try:
        seq = seq_nonsingular_pair(S, _other_member(C, coeffs), cfg)
        certs.append(_sequence_certificate(C, seq, cfg))
    except SimdiagError as exc:
        logger.info("No sequence certificate for the pair: %s", exc)
    return _report(label, Verdict.YES, "pair-real-spectrum", measured, certificates=certs), seq


@_timed
def check_twsdb_pair(A: np.ndarray, B: np.ndarray, cfg: Optional[Config] = None) -> ClassificationReport:
    cfg = resolve(cfg)
    return _twsdb_pair(SymMatrixSet.from_arrays([A, B], cfg), cfg)[0]


def _twsdb_set(C: SymMatrixSet, cfg: Config) -> Decision:
    label = PropertyLabel.TWSD_B.value
    if C.size == 1:
        sdo = _check_sdo(C, cfg)
        return _relabel(sdo, label, "single-matrix"), _constant_from(sdo)
    if C.size == 2:
        return _twsdb_pair(C, cfg)

    if _pd_pencil(C, cfg) is not None:
        sd = _check_sd(C, cfg)
        return _relabel(sd, label, "positive-definite-pencil-equivalence"), _constant_from(sd)

    sd = _check_sd(C, cfg)
    if sd.verdict is Verdict.YES:
        return _relabel(sd, label, "sd-implies-twsdb"), _constant_from(sd)

    ns = find_nonsingular_pencil(C, cfg)
    if not ns.found:
        return _report(label, Verdict.UNKNOWN, notes=["singular set of three or more matrices", *ns.notes]), None
    S = ns.witness.pencil
    certs: list = [_pencil_certificate(ns)]

    realness = []
    for i, A in enumerate(C):
        v = has_only_real_eigenvalues(la.solve(S, A), cfg)
        if v is Verdict.NO:
            return _report(label, Verdict.NO, "necessary-real-spectra", {"member": float(i)}, certificates=certs), None
        realness.append(v)

    norms, threshold = _commutators(C, S, cfg)
    certs.append(_commutator_certificate(norms, threshold))
    for key, value in norms.items():
        if value <= threshold:
            continue
        i, j = (int(t) for t in key.split(","))
        if is_nilpotent(s_commutator(C[i], C[j], S, cfg), cfg) is Verdict.NO:
            return _report(label, Verdict.NO, "necessary-nilpotent-commutators", {"commutator": value}, certificates=certs), None

    if any(v is not Verdict.YES for v in realness):
        return _report(label, Verdict.UNKNOWN, notes=["eigenvalue realness undecided for some member"], certificates=certs), None
    commuting = all(v <= threshold for v in norms.values())

    if commuting:
        for i, A in enumerate(C):
            M = la.solve(S, A)
            try:
                jf = real_jordan_form(M, cfg)
            except JordanUnreliableError:
                continue
            tol = _jordan_tol(M, cfg)
            if jf.has_repeated_block(tol):
                continue
            certs.append(_jordan_certificate(jf, f"S^-1 A_{i}"))
            seq = None
            if jf.single_block_per_eigenvalue(tol):
                try:
                    seq = seq_commuting_family(C, ns.witness.coeffs, i, cfg)
                    certs.append(_sequence_certificate(C, seq, cfg))
                except SimdiagError as exc:
                    logger.info("Commuting-family sequence unavailable: %s", exc)
            return _report(label, Verdict.YES, "commuting-distinct-jordan-blocks", {"member": float(i)}, certificates=certs), seq

    if C.size == 3:
        for s in range(3):
            if is_singular(C[s], cfg):
                continue
            j, k = (t for t in range(3) if t != s)
            sub = SymMatrixSet(dim=C.dim, mats=(C[j], C[k]))
            sub_norms, sub_thr = _commutators(sub, C[s], cfg)
            if max(sub_norms.values()) > sub_thr:
                continue
            real = [has_only_real_eigenvalues(la.solve(C[s], C[t]), cfg) for t in (j, k)]
            if all(v is Verdict.YES for v in real):
                return _report(label, Verdict.YES, "nonsingular-member-triple", {"member": float(s)}, certificates=certs), None

    return _report(label, Verdict.UNKNOWN, notes=["no sufficient condition applies"], certificates=certs), None


@_timed
def check_twsdb_set(C: SymMatrixSet, cfg: Optional[Config] = None) -> ClassificationReport:
    return _twsdb_set(C, resolve(cfg))[0]


# --- TWSD -----------------------------------------------------------------------------


def _components(C: SymMatrixSet, cfg: Config) -> List[List[int]]:
    """Connected components of the union sparsity graph of the set."""
    threshold = cfg.tol_comm * max(C.scale(), 1.0)
    pattern = np.zeros((C.dim, C.dim), dtype=bool)
    for A in C:
        pattern |= np.abs(A) > threshold
    count, labels = connected_components(pattern.astype(int), directed=False)
    return [sorted(np.flatnonzero(labels == c).tolist()) for c in range(count)]


def _twsd(C: SymMatrixSet, cfg: Config) -> Decision:
    label = PropertyLabel.TWSD.value
    if C.dim == 2 and C.size == 2:
        report, seq = _twsdb_pair(C, cfg)
        return _relabel(report, label, "two-by-two-equivalence"), seq

    twsdb, seq = _twsdb_set(C, cfg)
    if twsdb.verdict is Verdict.YES:
        return _relabel(twsdb, label, "twsdb-implies-twsd"), seq

    if C.size == 2:
        definite = find_definite_pencil(C, cfg)
        if definite.found:
            certs: list = [_pencil_certificate(definite)]
            psd_seq = None
            try:
                psd_seq = seq_psd_pencil(C[0], C[1], definite.witness)
                certs.append(_sequence_certificate(C, psd_seq, cfg))
            except SimdiagError as exc:
                logger.info("Semidefinite-pencil sequence unavailable: %s", exc)
            return _report(label, Verdict.YES, "semidefinite-pencil", {"lambda_min": definite.witness.measure}, certificates=certs), psd_seq
        ns = find_nonsingular_pencil(C, cfg)
        if ns.found:
            M = la.solve(ns.witness.pencil, _other_member(C, ns.witness.coeffs))
            eigs = la.eigvals(M)
            tau = cfg.tol_eig * max(float(np.max(np.abs(eigs))), float(np.linalg.norm(M, 2)), 1e-300)
            min_imag = float(np.min(np.abs(eigs.imag)))
            if min_imag <= tau:
                return _report(label, Verdict.YES, "pair-real-eigenvalue", {"min_imag": min_imag}, certificates=[_pencil_certificate(ns)]), None

    components = _components(C, cfg)
    if len(components) > 1:
        for block in components:
            sub = C.subset(block)
            sub_report, inner = _twsdb_set(sub, cfg)
            if sub_report.verdict is not Verdict.YES:
                continue
            certs = []
            split = None
            if inner is not None:
                try:
                    split = seq_block_split(C.dim, block, inner)
                    certs.append(_sequence_certificate(C, split, cfg))
                except SimdiagError as exc:
                    logger.info("Block-split sequence unavailable: %s", exc)
            measured = {"components": float(len(components)), "block_size": float(len(block))}
            notes = [f"TWSD-B block {block}: {sub_report.rule}"]
            return _report(label, Verdict.YES, "block-split", measured, notes=notes, certificates=certs), split

    return _report(label, Verdict.UNKNOWN, notes=["no sufficient condition applies"]), None


@_timed
def check_twsd(C: SymMatrixSet, cfg: Optional[Config] = None) -> ClassificationReport:
    return _twsd(C, resolve(cfg))[0]


# --- DWSD -----------------------------------------------------------------------------


def _check_dwsd(C: SymMatrixSet, cfg: Config) -> ClassificationReport:
    label = PropertyLabel.DWSD.value
    if C.size == 1:
        return _report(label, Verdict.YES, "single-matrix")

    if C.size == 2:
        ns = find_nonsingular_pencil(C, cfg)
        if not ns.found:
            return _report(label, Verdict.YES, "singular-pair")
        M = la.solve(ns.witness.pencil, _other_member(C, ns.witness.coeffs))
        verdict = has_only_real_eigenvalues(M, cfg)
        certs = [_pencil_certificate(ns)]
        if verdict is Verdict.UNKNOWN:
            return _report(label, verdict, notes=["eigenvalue realness is within tolerance of the boundary"], certificates=certs)
        return _report(label, verdict, "pair-real-spectrum", certificates=certs)

    pd = _pd_pencil(C, cfg)
    if pd is not None:
        return _relabel(_check_sd(C, cfg), label, "positive-definite-pencil-equivalence")

    sd = _check_sd(C, cfg)
    if sd.verdict is Verdict.YES:
        return _relabel(sd, label, "sd-implies-dwsd")

    if C.size == 3:
        for s in range(3):
            if is_singular(C[s], cfg):
                continue
            j, k = (t for t in range(3) if t != s)
            sub = SymMatrixSet(dim=C.dim, mats=(C[j], C[k]))
            norms, threshold = _commutators(sub, C[s], cfg)
            cert = _commutator_certificate(norms, threshold)
            if max(norms.values()) > threshold:
                return _report(label, Verdict.NO, "nonsingular-member-triple", {"member": float(s)}, certificates=[cert])
            real = [has_only_real_eigenvalues(la.solve(C[s], C[t]), cfg) for t in (j, k)]
            if any(v is Verdict.NO for v in real):
                return _report(label, Verdict.NO, "nonsingular-member-triple", {"member": float(s)}, certificates=[cert])
            if all(v is Verdict.YES for v in real):
                return _report(label, Verdict.YES, "nonsingular-member-triple", {"member": float(s)}, certificates=[cert])
            return _report(label, Verdict.UNKNOWN, notes=["eigenvalue realness undecided"], certificates=[cert])

    ns = find_nonsingular_pencil(C, cfg)
    if not ns.found:
        return _report(label, Verdict.UNKNOWN, notes=["singular set of three or more matrices", *ns.notes])
    S = ns.witness.pencil
    for i, A in enumerate(C):
        if has_only_real_eigenvalues(la.solve(S, A), cfg) is Verdict.NO:
            return _report(label, Verdict.NO, "necessary-real-spectra-commuting", {"member": float(i)})
    norms, threshold = _commutators(C, S, cfg)
    cert = _commutator_certificate(norms, threshold)
    if max(norms.values()) > threshold:
        return _report(label, Verdict.NO, "necessary-real-spectra-commuting", {"max_commutator": max(norms.values())}, certificates=[cert])
    return _report(label, Verdict.UNKNOWN, notes=["necessary conditions hold; no sufficient condition applies"], certificates=[cert])


@_timed
def check_dwsd(C: SymMatrixSet, cfg: Optional[Config] = None) -> ClassificationReport:
    return _check_dwsd(C, resolve(cfg))


# --- bounded promotion ----------------------------------------------------------------


@_timed
def check_twsd_bounded_promotion(
    C: SymMatrixSet,
    seq: CongruenceSequence,
    k_grid: Sequence[float] = DEFAULT_K_GRID,
    cfg: Optional[Config] = None,
) -> ClassificationReport:
    """Upgrade a TWSD witness to TWSD-B when it keeps the first member exactly diagonal and bounded."""
    cfg = resolve(cfg)
    label = PropertyLabel.TWSD_B.value
    A1 = C[0]
    if is_singular(A1, cfg):
        raise DomainError("bounded promotion needs a nonsingular first member")
    verification = verify_sequence(C, seq, k_grid, cfg)
    cert = SequenceCertificate(recipe=seq.recipe_name, det_value=seq.det_value, verification=verification)
    limit = cfg.tol_diag * max(frob(A1), 1.0)
    offs, diags = [], []
    for k in k_grid:
        X = congruence(A1, evaluate(seq, k))
        offs.append(offdiag_norm(X))
        diags.append(diag_norm(X))
    diagonal = max(offs) <= limit
    bounded = max(diags) <= 2.0 * min(diags) if min(diags) > 0 else False
    measured = {"max_offdiag_first": max(offs), "max_diag_first": max(diags), "min_diag_first": min(diags)}
    if diagonal and bounded and verification.monotone_decay:
        return _report(label, Verdict.YES, "bounded-diagonal-promotion", measured, numerical=True, certificates=[cert])
    notes = []
    if not diagonal:
        notes.append("first member is not kept diagonal along the sequence")
    if not bounded:
        notes.append("first member's diagonal is not bounded along the sequence")
    if not verification.monotone_decay:
        notes.append("off-diagonal mass does not decay")
    return _report(label, Verdict.UNKNOWN, measured=measured, notes=notes, numerical=True, certificates=[cert])


# --- decomposition-based projective variants ---------------------------------------------


def _check_d_sdo(C: SymMatrixSet, n: int, cfg: Config) -> ClassificationReport:
    label = PropertyLabel.D_SDO.text(n)
    m = C.dim
    if n == m:
        return _relabel(_check_sdo(C, cfg), label, "square-decomposition")
    if n >= C.size * m:
        fact = dsdo_construct(C, cfg)
        return _report(label, Verdict.YES, "stacked-decomposition", {"residual": fact.residual, "n_used": float(fact.n)})
    if m <= BASIS_MAX_DIM and n >= m * m * (m + 1) // 2:
        fact = dsdo_basis_construct(m, cfg).factorize(C)
        return _report(label, Verdict.YES, "basis-decomposition", {"residual": fact.residual, "n_used": float(fact.n)})
    sdo = _check_sdo(C, cfg)
    if sdo.verdict is Verdict.YES:
        return _relabel(sdo, label, "zero-padding-inclusion")
    return _report(label, Verdict.UNKNOWN, notes=[f"n={n} is below both constructive bounds"])


@_timed
def check_d_sdo(C: SymMatrixSet, n: int, cfg: Optional[Config] = None) -> ClassificationReport:
    _require_n(C, n)
    return _check_d_sdo(C, n, resolve(cfg))


def _check_d_sd(C: SymMatrixSet, n: int, cfg: Config) -> ClassificationReport:
    label = PropertyLabel.D_SD.text(n)
    if n == C.dim:
        return _relabel(_check_sd(C, cfg), label, "square-decomposition")
    sdo = _check_d_sdo(C, n, cfg)
    if sdo.verdict is Verdict.YES:
        return _relabel(sdo, label, "orthonormal-factor-inclusion")
    sd = _check_sd(C, cfg)
    if sd.verdict is Verdict.YES:
        return _relabel(sd, label, "zero-padding-inclusion")
    return _report(label, Verdict.UNKNOWN, notes=[f"n={n} is below both constructive bounds"])


@_timed
def check_d_sd(C: SymMatrixSet, n: int, cfg: Optional[Config] = None) -> ClassificationReport:
    _require_n(C, n)
    return _check_d_sd(C, n, resolve(cfg))


# --- whole lattice ----------------------------------------------------------------------

_IMPLICATIONS = (
    (PropertyLabel.SDO, PropertyLabel.SD),
    (PropertyLabel.SD, PropertyLabel.TWSD_B),
    (PropertyLabel.TWSD_B, PropertyLabel.TWSD),
    (PropertyLabel.SD, PropertyLabel.DWSD),
    (PropertyLabel.SDO, PropertyLabel.T_SDO),
    (PropertyLabel.T_SDO, PropertyLabel.SDO),
    (PropertyLabel.SD, PropertyLabel.T_SD),
    (PropertyLabel.T_SD, PropertyLabel.SD),
    (PropertyLabel.T_SDO, PropertyLabel.T_SD),
    (PropertyLabel.SDO, PropertyLabel.D_SDO),
    (PropertyLabel.SD, PropertyLabel.D_SD),
    (PropertyLabel.D_SDO, PropertyLabel.D_SD),
)


def classify(C: SymMatrixSet, label: PropertyLabel, n: Optional[int] = None, cfg: Optional[Config] = None) -> ClassificationReport:
    """Dispatch one property check by label; n defaults to m + 1 for the projective variants."""
    label = PropertyLabel(label)
    n = C.dim + 1 if n is None else n
    if label is PropertyLabel.SDO:
        return check_sdo(C, cfg)
    if label is PropertyLabel.SD:
        return check_sd(C, cfg)
    if label is PropertyLabel.TWSD:
        return check_twsd(C, cfg)
    if label is PropertyLabel.TWSD_B:
        return check_twsdb_set(C, cfg)
    if label is PropertyLabel.DWSD:
        return check_dwsd(C, cfg)
    if label is PropertyLabel.T_SDO:
        return check_t_sdo(C, n, cfg)
    if label is PropertyLabel.T_SD:
        return check_t_sd(C, n, cfg)
    if label is PropertyLabel.D_SDO:
        return check_d_sdo(C, n, cfg)
    return check_d_sd(C, n, cfg)


def _context(C: SymMatrixSet, cfg: Config) -> Dict[str, bool]:
    pair = C.size == 2
    nonsingular = find_nonsingular_pencil(C, cfg).found
    return {
        "pair": pair,
        "nonsingular_pair": pair and nonsingular,
        "singular_pair": pair and not nonsingular,
        "two_by_two_pair": pair and C.dim == 2,
        "positive_definite_pencil": _pd_pencil(C, cfg) is not None,
    }


def classify_all(C: SymMatrixSet, n: Optional[int] = None, cfg: Optional[Config] = None) -> LatticeRow:
    cfg = resolve(cfg)
    reports = {label.value: classify(C, label, n, cfg) for label in PropertyLabel}
    row = LatticeRow(reports=reports, context=_context(C, cfg))
    row.violations = check_lattice_consistency(row)
    if row.violations:
        logger.warning("Lattice violations: %s", row.violations)
    return row


def check_lattice_consistency(row: LatticeRow) -> List[str]:
    """Implications between verdicts that the row breaks; empty when consistent."""
    violations: List[str] = []

    def verdict(label: PropertyLabel) -> Optional[Verdict]:
        report = row.reports.get(label.value)
        return None if report is None else report.verdict

    for src, dst in _IMPLICATIONS:
        if verdict(src) is Verdict.YES and verdict(dst) is Verdict.NO:
            violations.append(f"{src.value} yes but {dst.value} no")

    def equivalent(a: PropertyLabel, b: PropertyLabel, reason: str) -> None:
        pair = {verdict(a), verdict(b)}
        if Verdict.YES in pair and Verdict.NO in pair:
            violations.append(f"{a.value} and {b.value} disagree on a {reason}")

    ctx = row.context
    if ctx.get("nonsingular_pair"):
        equivalent(PropertyLabel.TWSD_B, PropertyLabel.DWSD, "nonsingular pair")
    if ctx.get("singular_pair"):
        for label in (PropertyLabel.TWSD_B, PropertyLabel.DWSD):
            if verdict(label) is Verdict.NO:
                violations.append(f"{label.value} no on a singular pair")
    if ctx.get("positive_definite_pencil"):
        equivalent(PropertyLabel.TWSD_B, PropertyLabel.SD, "positive-definite pencil")
        equivalent(PropertyLabel.SD, PropertyLabel.DWSD, "positive-definite pencil")
    if ctx.get("two_by_two_pair"):
        equivalent(PropertyLabel.TWSD, PropertyLabel.TWSD_B, "2x2 pair")
    return violations


def two_by_two_case(A: np.ndarray, B: np.ndarray, cfg: Optional[Config] = None) -> str:
    """Which case a 2x2 pair falls in: distinct-real, double-real, complex-pair or singular."""
    cfg = resolve(cfg)
    C = SymMatrixSet.from_arrays([A, B], cfg)
    if C.dim != 2:
        raise DomainError(f"two_by_two_case needs 2x2 matrices, got {C.dim}x{C.dim}")
    ns = find_nonsingular_pencil(C, cfg)
    if not ns.found:
        return "singular"
    M = la.solve(ns.witness.pencil, _other_member(C, ns.witness.coeffs))
    tr, det = float(np.trace(M)), float(np.linalg.det(M))
    disc = tr * tr - 4.0 * det
    if abs(disc) <= cfg.tol_eig * max(tr * tr + 4.0 * abs(det), 1e-300):
        return "double-real"
    return "distinct-real" if disc > 0 else "complex-pair"


def twsd_witness(C: SymMatrixSet, cfg: Optional[Config] = None) -> Decision:
    """TWSD decision together with the congruence sequence that witnesses it, when one was built."""
    cfg = resolve(cfg)
    with timed() as holder:
        report, seq = _twsd(C, cfg)
    report.timing = holder["timing"]
    return report, seq
