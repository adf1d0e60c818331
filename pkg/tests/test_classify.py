"""Property checks on hand-built sets and on every corpus entry."""
from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from simdiag.canon import LancasterBlockDescriptor, synthesize_lancaster_pair
from simdiag.classify import (
    PropertyLabel,
    check_d_sdo,
    check_dwsd,
    check_lattice_consistency,
    check_sd,
    check_sdo,
    check_t_sd,
    check_t_sdo,
    check_twsd,
    check_twsd_bounded_promotion,
    check_twsdb_pair,
    check_twsdb_set,
    classify,
    classify_all,
    two_by_two_case,
)
from simdiag.corpus import discover_entries, evaluate_entry, load_entry
from simdiag.errors import DomainError
from simdiag.matcore import E, F, SymMatrixSet, congruence, offdiag_norm
from simdiag.reporting import ClassificationReport, ConditionTrace, LatticeRow, Verdict
from simdiag.sequences import seq_constant, seq_ef_block

CORPUS = Path(__file__).resolve().parents[1] / "corpus"


def _set(cfg, *mats) -> SymMatrixSet:
    return SymMatrixSet.from_arrays(list(mats), cfg)


def test_label_parsing() -> None:
    assert PropertyLabel.parse(" twsd-b ") is PropertyLabel.TWSD_B
    with pytest.raises(DomainError, match="Expected one of"):
        PropertyLabel.parse("SDX")


def test_commuting_pair_is_sdo_with_diagonalizer(cfg) -> None:
    A = np.array([[2.0, 1.0], [1.0, 2.0]])
    C = _set(cfg, A, A @ A)
    report = check_sdo(C, cfg)
    assert report.verdict is Verdict.YES
    assert report.rule == "pairwise-commutators"
    Q = np.asarray(report.diagonalizer)
    assert np.allclose(Q.T @ Q, np.eye(2))
    for M in C:
        assert offdiag_norm(congruence(M, Q)) < 1e-10


def test_non_commuting_pair_is_not_sdo(cfg) -> None:
    report = check_sdo(_set(cfg, E(2), np.diag([1.0, -1.0])), cfg)
    assert report.verdict is Verdict.NO
    assert report.certificate("commutator") is not None


def test_pd_pencil_pair_is_sd(cfg) -> None:
    C = _set(cfg, np.eye(2), np.array([[1.0, 2.0], [2.0, -3.0]]), )
    report = check_sd(C, cfg)
    assert report.verdict is Verdict.YES


def test_stacked_decomposition_always_exists(cfg) -> None:
    C = _set(cfg, E(2), np.diag([1.0, -1.0]))
    report = check_d_sdo(C, 4, cfg)
    assert report.verdict is Verdict.YES
    assert report.rule == "stacked-decomposition"
    with pytest.raises(DomainError):
        check_d_sdo(C, 1, cfg)


def test_projective_labels_carry_n(cfg) -> None:
    C = _set(cfg, np.diag([1.0, 2.0]), np.diag([3.0, 4.0]))
    assert classify(C, PropertyLabel.T_SDO, 3, cfg).property == "T-SDO(3)"
    assert classify(C, PropertyLabel.D_SD, None, cfg).property == "D-SD(3)", "n defaults to m + 1"


def test_two_by_two_cases(cfg) -> None:
    assert two_by_two_case(np.eye(2), np.diag([1.0, 2.0]), cfg) == "distinct-real"
    assert two_by_two_case(E(2), np.diag([1.0, -1.0]), cfg) == "complex-pair"
    assert two_by_two_case(np.diag([1.0, 0.0]), np.diag([2.0, 0.0]), cfg) == "singular"
    with pytest.raises(DomainError):
        two_by_two_case(np.eye(3), np.eye(3), cfg)


def test_lattice_violation_is_reported() -> None:
    yes = ClassificationReport(property="SDO", verdict=Verdict.YES, trace=ConditionTrace(rule="pairwise-commutators"))
    no = ClassificationReport(property="SD", verdict=Verdict.NO, trace=ConditionTrace(rule="pencil-commutators"))
    row = LatticeRow(reports={"SDO": yes, "SD": no})
    assert check_lattice_consistency(row) == ["SDO yes but SD no"]


def test_decided_verdict_needs_a_rule() -> None:
    with pytest.raises(ValueError, match="must name the rule"):
        ClassificationReport(property="SD", verdict=Verdict.YES)


def test_full_lattice_is_consistent_for_diagonal_pair(cfg) -> None:
    row = classify_all(_set(cfg, np.diag([1.0, -2.0]), np.diag([0.5, 3.0])), cfg=cfg)
    assert row.violations == []
    assert all(report.verdict is Verdict.YES for report in row.reports.values()), {
        label: report.verdict for label, report in row.reports.items()
    }


@pytest.mark.parametrize("meta_path", discover_entries(CORPUS), ids=lambda p: p.parent.name)
def test_corpus_entry_verdicts(meta_path, cfg) -> None:
    doc = evaluate_entry(load_entry(meta_path, cfg), cfg)
    mismatches = [c for c in doc["checks"] if not c["match"]]
    assert not mismatches, f"{doc['name']}: {mismatches}"
    if doc["qcqp"] is not None:
        assert doc["qcqp"]["match"], f"{doc['name']}: {doc['qcqp']}"


def _sym(rng: np.random.Generator, m: int) -> np.ndarray:
    X = rng.standard_normal((m, m))
    return X + X.T


def _scramble(rng: np.random.Generator, m: int) -> np.ndarray:
    Q, _ = np.linalg.qr(rng.standard_normal((m, m)))
    return Q @ np.diag(rng.uniform(1.0, 2.0, m))


def _family(kind: str, rng: np.random.Generator) -> list:
    """Random matrix sets of one structural family."""
    if kind == "random-pair":
        m = int(rng.integers(2, 4))
        return [_sym(rng, m), _sym(rng, m)]
    if kind == "random-triple":
        return [_sym(rng, 3) for _ in range(3)]
    if kind == "commuting":
        m, L = int(rng.integers(2, 5)), int(rng.integers(2, 4))
        Q, _ = np.linalg.qr(rng.standard_normal((m, m)))
        return [Q @ np.diag(rng.standard_normal(m)) @ Q.T for _ in range(L)]
    if kind == "congruent-diagonal":
        m, L = int(rng.integers(2, 5)), int(rng.integers(2, 4))
        P = _scramble(rng, m)
        return [P.T @ np.diag(rng.uniform(0.5, 2.0, m)) @ P] + [P.T @ np.diag(rng.standard_normal(m)) @ P for _ in range(L - 1)]
    if kind == "pd-pencil":
        m, L = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        P = _scramble(rng, m)
        return [P.T @ P] + [_sym(rng, m) for _ in range(L - 1)]
    if kind == "singular-pair":
        m = int(rng.integers(2, 4))
        P = _scramble(rng, m)
        mats = []
        for _ in range(2):
            X = _sym(rng, m)
            X[-1, :] = X[:, -1] = 0.0
            mats.append(P.T @ X @ P)
        return mats
    raise ValueError(kind)


FAMILIES = ["random-pair", "random-triple", "commuting", "congruent-diagonal", "pd-pencil", "singular-pair"]


@pytest.mark.parametrize("seed", range(80))
@pytest.mark.parametrize("kind", FAMILIES)
def test_lattice_holds_on_random_families(kind, seed, cfg) -> None:
    rng = np.random.default_rng(seed)
    C = SymMatrixSet.from_arrays(_family(kind, rng), cfg, symmetrize=True)
    row = classify_all(C, cfg=cfg)
    assert row.violations == [], f"{kind} seed {seed}: {row.violations}"
    if kind == "commuting":
        assert row.verdict(PropertyLabel.SDO.value) is Verdict.YES
    if kind in ("commuting", "congruent-diagonal"):
        assert row.verdict(PropertyLabel.SD.value) is Verdict.YES
    if kind == "pd-pencil":
        assert row.context["positive_definite_pencil"]


_CONGRUENCE_INVARIANT = (PropertyLabel.SD, PropertyLabel.TWSD_B, PropertyLabel.TWSD, PropertyLabel.DWSD, PropertyLabel.T_SD)


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("kind", ["random-pair", "commuting", "congruent-diagonal", "pd-pencil"])
def test_verdicts_survive_congruence_and_scaling(kind, seed, cfg) -> None:
    rng = np.random.default_rng(1000 + seed)
    C = SymMatrixSet.from_arrays(_family(kind, rng), cfg, symmetrize=True)
    base = classify_all(C, cfg=cfg)
    factor = float(rng.uniform(0.5, 4.0))

    Q, _ = np.linalg.qr(rng.standard_normal((C.dim, C.dim)))
    rotated = classify_all(C.congruence(Q).scaled(factor), cfg=cfg)
    for label in PropertyLabel:
        assert rotated.verdict(label.value) is base.verdict(label.value), f"{kind} seed {seed}: {label.value}"

    moved = classify_all(C.congruence(_scramble(rng, C.dim)).scaled(factor), cfg=cfg)
    for label in _CONGRUENCE_INVARIANT:
        assert moved.verdict(label.value) is base.verdict(label.value), f"{kind} seed {seed}: {label.value}"


def _two_by_two(case: str, rng: np.random.Generator):
    P = _scramble(rng, 2)
    if case == "distinct-real":
        a = rng.choice([-1.0, 1.0], 2) * rng.uniform(0.5, 2.0, 2)
        ratios = np.array([rng.uniform(-2.0, -0.5), rng.uniform(0.5, 2.0)])
        X, Y = np.diag(a), np.diag(a * ratios)
    elif case == "double-real":
        X, Y = synthesize_lancaster_pair(
            [LancasterBlockDescriptor(type=1, size=2, sign=int(rng.choice([-1, 1])), eigenvalue=float(rng.uniform(-2.0, 2.0)))]
        )
    elif case == "complex-pair":
        alpha = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0))
        X = alpha * E(2)
        Y = float(rng.uniform(0.5, 2.0)) * np.diag([1.0, -1.0]) + float(rng.uniform(-1.0, 1.0)) * E(2)
    else:
        X, Y = np.diag([rng.uniform(0.5, 2.0), 0.0]), np.diag([rng.uniform(-2.0, 2.0), 0.0])
    return congruence(X, P), congruence(Y, P)


_TWO_BY_TWO = {"distinct-real": Verdict.YES, "double-real": Verdict.YES, "complex-pair": Verdict.NO, "singular": Verdict.YES}


@pytest.mark.parametrize("seed", range(15))
@pytest.mark.parametrize("case", sorted(_TWO_BY_TWO))
def test_two_by_two_twsd_matches_pair_decider(case, seed, cfg) -> None:
    A, B = _two_by_two(case, np.random.default_rng(seed))
    assert two_by_two_case(A, B, cfg) == case
    C = _set(cfg, A, B)
    expected = _TWO_BY_TWO[case]
    assert check_twsd(C, cfg).verdict is check_twsdb_pair(A, B, cfg).verdict is expected
    # on nonsingular pairs DWSD coincides with TWSD-B; singular pairs are always DWSD
    assert check_dwsd(C, cfg).verdict is expected


def test_dwsd_is_stricter_than_twsd_on_positive_definite_triple(cfg) -> None:
    entry = load_entry(CORPUS / "pd_triple_not_sd" / "meta.json", cfg)
    assert check_twsd(entry.matrices, cfg).verdict is Verdict.YES
    assert check_sd(entry.matrices, cfg).verdict is Verdict.NO
    assert check_dwsd(entry.matrices, cfg).verdict is Verdict.NO


@pytest.mark.parametrize("seed", range(4))
def test_lattice_holds_on_scrambled_jordan_pairs(seed, cfg) -> None:
    rng = np.random.default_rng(100 + seed)
    blocks = [
        LancasterBlockDescriptor(type=1, size=2, eigenvalue=1.0),
        LancasterBlockDescriptor(type=1, size=1, sign=int(rng.choice([-1, 1])), eigenvalue=-2.0),
    ]
    Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    A, B = synthesize_lancaster_pair(blocks, scramble=Q)
    row = classify_all(_set(cfg, A, B), cfg=cfg)
    assert row.violations == [], f"seed {seed}: {row.violations}"
    assert row.verdict(PropertyLabel.SD.value) is not Verdict.YES


def test_pair_deciders_on_hyperbolic_pairs(cfg) -> None:
    assert check_twsdb_pair(E(2), np.diag([1.0, 0.0]), cfg).verdict is Verdict.YES
    crossed = _set(cfg, E(2), np.diag([1.0, -1.0]))
    assert check_twsd(crossed, cfg).verdict is Verdict.NO
    assert check_dwsd(crossed, cfg).verdict is Verdict.NO


def test_block_pair_is_twsd_but_not_twsdb(cfg) -> None:
    A = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
    C = _set(cfg, A, np.diag([1.0, 1.0, -1.0]))
    assert check_twsd(C, cfg).verdict is Verdict.YES
    assert check_twsdb_set(C, cfg).verdict is Verdict.NO


def test_projective_variants_collapse_to_square_ones(cfg) -> None:
    C = _set(cfg, E(2), np.diag([1.0, 0.0]))
    t_sdo = check_t_sdo(C, 3, cfg)
    t_sd = check_t_sd(C, 3, cfg)
    assert (t_sdo.property, t_sdo.verdict) == ("T-SDO(3)", Verdict.NO)
    assert (t_sd.property, t_sd.verdict) == ("T-SD(3)", Verdict.NO)
    assert "projective-collapse" in t_sdo.rule


def test_bounded_promotion(cfg) -> None:
    C = _set(cfg, E(2), F(2))
    promoted = check_twsd_bounded_promotion(C, seq_ef_block(2), cfg=cfg)
    assert promoted.verdict is Verdict.YES
    assert promoted.rule == "bounded-diagonal-promotion"
    stuck = check_twsd_bounded_promotion(C, seq_constant(np.eye(2)), cfg=cfg)
    assert stuck.verdict is Verdict.UNKNOWN
    with pytest.raises(DomainError, match="nonsingular first member"):
        check_twsd_bounded_promotion(_set(cfg, np.diag([1.0, 0.0]), E(2)), seq_ef_block(2), cfg=cfg)
