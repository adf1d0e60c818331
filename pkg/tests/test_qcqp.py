"""Homogenization, LP relaxation, the single-constraint solver and the brute-force oracle."""
from __future__ import annotations

import numpy as np
import pytest

from simdiag.canon import LancasterBlockDescriptor, synthesize_lancaster_pair, uhlig_canonical
from simdiag.errors import DomainError, SingularityError
from simdiag.matcore import E, frob
from simdiag.qcqp import (
    CanonicalProblem,
    QcqpInstance,
    QcqpStatus,
    SingleConstraintProblem,
    brute_force_qcqp_oracle,
    dehomogenize_point,
    homogenize,
    lift_point,
    lp_relaxation,
    solve_lp_relaxation,
    solve_single_constraint,
)
from simdiag.sequences import seq_constant
from simdiag.simplex import LpStatus

SADDLE = (np.diag([1.0, -1.0]), np.eye(2))
INFIMUM = (np.array([[0.0, -1.0], [-1.0, 1.0]]), E(2))


# --- homogenization ---------------------------------------------------------------


def test_homogenize_one_dimensional_objective(cfg) -> None:
    q = QcqpInstance.build([[1.0]], [1.0], cfg=cfg)
    h = homogenize(q)
    assert h.is_homogeneous
    assert np.array_equal(h.A0, [[1.0, 1.0], [1.0, 0.0]])
    marker = h.constraints[-1]
    assert marker.equality and marker.c == -1.0
    x = np.array([-0.5])
    assert np.isclose(h.objective(lift_point(x)), q.objective(x))
    assert h.is_feasible(lift_point(x))


def test_dehomogenize_uses_the_sign_of_the_last_coordinate() -> None:
    assert np.allclose(dehomogenize_point([2.0, -1.0]), [-2.0])
    with pytest.raises(DomainError):
        dehomogenize_point([1.0, 0.0])


def test_constraint_offsets_lift_into_the_corner(cfg) -> None:
    q = QcqpInstance.build(np.eye(2), None, [(np.eye(2), [1.0, 0.0], -3.0)], cfg=cfg)
    lifted = homogenize(q).constraints[0].A
    assert lifted[2, 2] == -3.0
    assert np.array_equal(lifted[:2, 2], [1.0, 0.0])


# --- LP relaxation ----------------------------------------------------------------


def test_relaxation_of_diagonal_problem_is_exact(cfg) -> None:
    A0, A1 = SADDLE
    q = QcqpInstance.build(A0, None, [(A1, None, -1.0)], cfg=cfg)
    sol = solve_lp_relaxation(q, seq_constant(np.eye(2)), 10.0, cfg)
    assert sol.lp_result.status is LpStatus.OPTIMAL
    assert sol.dropped_mass == 0.0
    assert np.isclose(sol.value, -1.0)
    assert np.isclose(sol.objective_at_point, -1.0)
    assert sol.feasible
    assert sol.to_dict()["heuristic"] is True


def test_half_form_values_are_reported_in_the_callers_convention(cfg) -> None:
    A0, A1 = SADDLE
    q = QcqpInstance.from_half_form(A0, None, [(A1, None, -0.5)], cfg=cfg)
    assert q.value_scale == 0.5
    assert q.constraints[0].c == -1.0
    sol = solve_lp_relaxation(q, seq_constant(np.eye(2)), 10.0, cfg)
    assert np.isclose(sol.value, -0.5)


def test_relaxation_reports_dropped_mass(cfg) -> None:
    h = homogenize(QcqpInstance.build([[1.0]], [1.0], cfg=cfg))
    relax = lp_relaxation(h, seq_constant(np.eye(2)), 10.0)
    assert relax.dropped_mass > 0.0, "the linear term lives off the diagonal of the lifted objective"
    assert relax.lp.A_eq.shape == (1, 2)


def test_relaxation_requires_homogeneous_instance(cfg) -> None:
    q = QcqpInstance.build([[1.0]], [1.0], cfg=cfg)
    with pytest.raises(DomainError, match="homogenize"):
        lp_relaxation(q, seq_constant(np.eye(1)), 10.0)
    h = homogenize(q)
    with pytest.raises(DomainError, match="dimension"):
        lp_relaxation(h, seq_constant(np.eye(3)), 10.0)


# --- single constraint ------------------------------------------------------------


def test_saddle_over_unit_disc(cfg) -> None:
    B, A = SADDLE
    p = SingleConstraintProblem.build(B, A, 1.0, cfg)
    sol = solve_single_constraint(p, cfg)
    assert sol.status is QcqpStatus.ATTAINED
    assert np.isclose(sol.value, -1.0)
    assert np.allclose(np.abs(sol.point), [0.0, 1.0], atol=1e-9)
    assert np.isclose(p.objective(sol.point), sol.value)
    assert p.constraint(sol.point) <= 1.0 + 1e-9


def test_positive_definite_constraint_fast_path(cfg) -> None:
    B, A = SADDLE
    zero = solve_single_constraint(SingleConstraintProblem.build(B, A, 0.0, cfg), cfg)
    assert zero.status is QcqpStatus.ATTAINED and zero.value == 0.0
    assert np.array_equal(zero.point, [0.0, 0.0])
    negative = solve_single_constraint(SingleConstraintProblem.build(B, A, -1.0, cfg), cfg)
    assert negative.status is QcqpStatus.INFEASIBLE


def test_infimum_is_not_attained(cfg) -> None:
    B, A = INFIMUM
    sol = solve_single_constraint(SingleConstraintProblem.build(B, A, 1.0, cfg), cfg)
    assert sol.status is QcqpStatus.INFIMUM_ONLY
    assert np.isclose(sol.value, -1.0)
    assert sol.point is None


def test_complex_spectrum_is_structurally_unbounded(cfg) -> None:
    sol = solve_single_constraint(SingleConstraintProblem.build(np.diag([1.0, -1.0]), E(2), 1.0, cfg), cfg)
    assert sol.status is QcqpStatus.UNBOUNDED_BELOW
    assert sol.structural
    assert sol.to_dict()["value"] == "-inf"


def test_unbounded_limit_lp(cfg) -> None:
    sol = solve_single_constraint(SingleConstraintProblem.build(-np.eye(2), np.diag([1.0, -1.0]), 1.0, cfg), cfg)
    assert sol.status is QcqpStatus.UNBOUNDED_BELOW
    assert not sol.structural


def test_singular_constraint_matrix_is_rejected(cfg) -> None:
    with pytest.raises(SingularityError):
        SingleConstraintProblem.build(np.eye(2), np.diag([1.0, 0.0]), 1.0, cfg)


def test_canonical_objective_approaches_its_limit(cfg) -> None:
    B, A = INFIMUM
    canon = CanonicalProblem(form=uhlig_canonical(A, B, cfg), b=1.0)
    gaps = [frob(canon.objective_at(k) - canon.limit_objective()) for k in (10.0, 100.0, 1000.0)]
    assert gaps[0] > gaps[1] > gaps[2], f"gaps should shrink, got {gaps}"


# --- oracle -----------------------------------------------------------------------


def test_oracle_agrees_with_solver_on_saddle(cfg) -> None:
    B, A = SADDLE
    result = brute_force_qcqp_oracle(SingleConstraintProblem.build(B, A, 1.0, cfg), cfg=cfg)
    assert result.value == pytest.approx(-1.0, abs=1e-6)
    assert not result.suspected_unbounded


def test_oracle_flags_unbounded_problem(cfg) -> None:
    p = SingleConstraintProblem.build(np.diag([1.0, -1.0]), E(2), 1.0, cfg)
    result = brute_force_qcqp_oracle(p, cfg=cfg)
    assert result.suspected_unbounded


def test_oracle_dimension_limit(cfg) -> None:
    p = SingleConstraintProblem.build(np.eye(5), np.eye(5), 1.0, cfg)
    with pytest.raises(DomainError, match="oracle supports"):
        brute_force_qcqp_oracle(p, cfg=cfg)


def test_general_oracle_on_disc(cfg) -> None:
    A0, A1 = SADDLE
    q = QcqpInstance.build(A0, None, [(A1, None, -1.0)], cfg=cfg)
    result = brute_force_qcqp_oracle(q, cfg=cfg)
    assert result.value == pytest.approx(-1.0, abs=1e-5)
    assert not result.suspected_unbounded


@pytest.mark.parametrize("seed", range(6))
def test_solver_and_oracle_agree_on_rotated_diagonal_problems(seed, cfg) -> None:
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 5))
    Q, _ = np.linalg.qr(rng.standard_normal((m, m)))
    a = rng.uniform(0.5, 2.0, m)
    ratios = rng.permutation(np.linspace(-1.0, 1.0, m)) + rng.uniform(-0.1, 0.1)
    b = a * ratios
    A = Q @ np.diag(a) @ Q.T
    B = Q @ np.diag(b) @ Q.T
    expected = min(0.0, float(np.min(ratios)))
    p = SingleConstraintProblem.build((B + B.T) / 2.0, (A + A.T) / 2.0, 1.0, cfg)
    sol = solve_single_constraint(p, cfg)
    assert sol.status is QcqpStatus.ATTAINED, f"seed {seed}: {sol.notes}"
    assert sol.value == pytest.approx(expected, abs=1e-6)
    oracle = brute_force_qcqp_oracle(p, cfg=cfg)
    assert oracle.value == pytest.approx(expected, abs=1e-3)


# --- Jordan-block instances ---------------------------------------------------------


def _block(size: int, sign: int, eigenvalue: float) -> LancasterBlockDescriptor:
    return LancasterBlockDescriptor(type=1, size=size, sign=sign, eigenvalue=eigenvalue)


def _jordan_problem(blocks, seed: int, cfg, b: float = 1.0) -> SingleConstraintProblem:
    rng = np.random.default_rng(seed)
    m = sum(blk.dim for blk in blocks)
    Q, _ = np.linalg.qr(rng.standard_normal((m, m)))
    X, Y = synthesize_lancaster_pair(blocks, scramble=Q @ np.diag(rng.uniform(1.0, 2.0, m)))
    return SingleConstraintProblem.build(Y, X, b, cfg)


# (blocks, status, value) with the value of min yᵀYy s.t. yᵀXy <= 1 worked out by hand
JORDAN_CASES = {
    "escaping-2-block": ([_block(2, 1, -0.5)], QcqpStatus.INFIMUM_ONLY, -0.5),
    "1-block-wins": ([_block(2, 1, -0.5), _block(1, 1, -2.0)], QcqpStatus.ATTAINED, -2.0),
    "2-block-wins": ([_block(2, 1, -1.5), _block(1, 1, -1.0)], QcqpStatus.INFIMUM_ONLY, -1.5),
    "negative-2-block": ([_block(2, -1, -1.05)], QcqpStatus.UNBOUNDED_BELOW, None),
    "negative-2-block-padded": (
        [_block(2, -1, -1.05), _block(1, 1, 0.5), _block(1, -1, 2.0)],
        QcqpStatus.UNBOUNDED_BELOW,
        None,
    ),
    "positive-2-block": ([_block(2, 1, 0.8)], QcqpStatus.UNBOUNDED_BELOW, None),
    "free-negative-direction": ([_block(2, 1, -1.0), _block(1, -1, 0.5)], QcqpStatus.UNBOUNDED_BELOW, None),
}


@pytest.mark.parametrize("seed", range(3))
def test_oracle_flags_constraint_capped_unbounded_problem(seed, cfg) -> None:
    # the best sampled ray is capped by the constraint; y = (0, t) is feasible with objective −t²
    p = _jordan_problem([_block(2, -1, -1.05)], seed, cfg)
    sol = solve_single_constraint(p, cfg)
    assert sol.status is QcqpStatus.UNBOUNDED_BELOW and sol.structural
    assert brute_force_qcqp_oracle(p, cfg=cfg).suspected_unbounded


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("name", sorted(JORDAN_CASES))
def test_solver_and_oracle_agree_on_jordan_block_problems(name, seed, cfg) -> None:
    blocks, status, value = JORDAN_CASES[name]
    p = _jordan_problem(blocks, seed, cfg)
    sol = solve_single_constraint(p, cfg)
    assert sol.status is status, f"{name}: {sol.notes}"
    oracle = brute_force_qcqp_oracle(p, cfg=cfg)
    if status is QcqpStatus.UNBOUNDED_BELOW:
        assert oracle.suspected_unbounded, f"{name}: oracle value {oracle.value}"
        return
    assert sol.value == pytest.approx(value, abs=1e-6)
    # the oracle only evaluates feasible points, so it can never beat the infimum
    assert oracle.value >= value - 1e-6
    assert oracle.value == pytest.approx(value, abs=1e-3)
    if status is QcqpStatus.ATTAINED:
        assert not oracle.suspected_unbounded
        assert p.constraint(sol.point) <= p.b + 1e-8
        assert p.objective(sol.point) == pytest.approx(value, abs=1e-6)


BOUNDED_CASES = [name for name, (_, status, _) in JORDAN_CASES.items() if status is not QcqpStatus.UNBOUNDED_BELOW]


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("name", sorted(BOUNDED_CASES))
def test_scaled_canonical_problem_keeps_the_value(name, seed, cfg) -> None:
    blocks, status, value = JORDAN_CASES[name]
    p = _jordan_problem(blocks, seed, cfg)
    canon = CanonicalProblem(form=uhlig_canonical(p.A, p.B, cfg), b=p.b)
    for k in (1.0, 10.0, 100.0):
        scaled = SingleConstraintProblem.build(canon.objective_at(k), canon.form.target_a(), p.b, cfg)
        sol = solve_single_constraint(scaled, cfg)
        assert sol.status is status, f"{name}, k={k}: {sol.notes}"
        assert sol.value == pytest.approx(value, abs=1e-4)


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("name", sorted(BOUNDED_CASES))
def test_scaled_objective_decreases_with_k(name, seed, cfg) -> None:
    blocks, _, _ = JORDAN_CASES[name]
    p = _jordan_problem(blocks, seed, cfg)
    canon = CanonicalProblem(form=uhlig_canonical(p.A, p.B, cfg), b=p.b)
    X = canon.form.target_a()
    rng = np.random.default_rng(seed)
    ks = (1.0, 10.0, 100.0, 1000.0)
    forms = [canon.objective_at(k) for k in ks]
    limit = canon.limit_objective()
    checked = 0
    while checked < 100:
        y = rng.standard_normal(X.shape[0]) * rng.uniform(0.1, 3.0)
        if y @ X @ y > p.b:
            continue
        values = [float(y @ Bk @ y) for Bk in forms]
        tol = 1e-9 * max(1.0, float(y @ y))
        assert all(later <= earlier + tol for earlier, later in zip(values, values[1:])), values
        assert values[-1] >= float(y @ limit @ y) - tol
        checked += 1


@pytest.mark.parametrize("seed", range(4))
def test_homogenization_keeps_the_optimal_value(seed, cfg) -> None:
    # min ‖x‖² + 2a₀ᵀx over the unit ball: −‖a₀‖² inside, 1 − 2‖a₀‖ on the sphere otherwise
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 4))
    direction = rng.standard_normal(m)
    norm = (0.5, 1.5, 0.8, 2.0)[seed]
    a0 = norm * direction / np.linalg.norm(direction)
    expected = -norm**2 if norm <= 1.0 else 1.0 - 2.0 * norm
    q = QcqpInstance.build(np.eye(m), a0, [(np.eye(m), None, -1.0)], cfg=cfg)
    direct = brute_force_qcqp_oracle(q, cfg=cfg)
    lifted = brute_force_qcqp_oracle(homogenize(q), cfg=cfg)
    assert direct.value == pytest.approx(expected, abs=1e-4)
    assert lifted.value == pytest.approx(expected, abs=1e-4)
    x = dehomogenize_point(lifted.point)
    assert q.objective(x) == pytest.approx(expected, abs=1e-4)
