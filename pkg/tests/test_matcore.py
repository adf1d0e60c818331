"""Matrix-set validation, special matrices and pencil searches."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simdiag.errors import DomainError, SingularityError
from simdiag.matcore import (
    E,
    F,
    G,
    H,
    PencilKind,
    R,
    SpecialMatrixKind,
    SpecialTag,
    SymMatrixSet,
    block_diag,
    congruence,
    find_definite_pencil,
    find_nonsingular_pencil,
    is_singular,
    jordan_block,
    offdiag_norm,
    phi_D,
    phi_T,
    s_commutator,
    special_matrix,
)


def test_from_arrays_rejects_asymmetric_input(cfg) -> None:
    with pytest.raises(DomainError, match="not symmetric"):
        SymMatrixSet.from_arrays([[[1.0, 2.0], [0.0, 1.0]]], cfg)


def test_from_arrays_symmetrize_averages(cfg) -> None:
    C = SymMatrixSet.from_arrays([[[1.0, 2.0], [0.0, 1.0]]], cfg, symmetrize=True)
    assert np.allclose(C[0], [[1.0, 1.0], [1.0, 1.0]])


def test_from_arrays_rejects_shape_mismatch(cfg) -> None:
    with pytest.raises(DomainError, match="shape"):
        SymMatrixSet.from_arrays([np.eye(2), np.eye(3)], cfg)


def test_stored_matrices_are_read_only(cfg) -> None:
    C = SymMatrixSet.from_arrays([np.eye(2)], cfg)
    with pytest.raises(ValueError):
        C[0][0, 0] = 5.0


def test_special_matrices() -> None:
    assert np.array_equal(E(3), [[0, 0, 1], [0, 1, 0], [1, 0, 0]])
    assert np.array_equal(F(3), [[0, 0, 0], [0, 0, 1], [0, 1, 0]])
    assert np.array_equal(H(3), [[0, 1, 0], [1, 0, -1], [0, -1, 0]])
    assert np.array_equal(G(3), np.diag([1.0, 1.0, -1.0]))
    assert np.array_equal(G(2), np.diag([1.0, -1.0]))


def test_rk_has_unit_determinant() -> None:
    for m in (1, 2, 3, 4):
        assert np.isclose(np.linalg.det(R(10.0, m)), 1.0), f"det R_k(m={m}) should be 1"
    with pytest.raises(DomainError):
        R(0.5, 2)


def test_rk_scales_jordan_superdiagonal_down() -> None:
    J = jordan_block(2.0, 3)
    for k in (10.0, 100.0):
        Rk = R(k, 3)
        scaled = np.linalg.solve(Rk, J @ Rk)
        assert np.allclose(np.diag(scaled), 2.0)
        assert np.isclose(scaled[0, 1], 1.0 / k)


def test_congruence_is_symmetric() -> None:
    A = np.array([[1.0, 2.0], [2.0, -1.0]])
    P = np.array([[1.0, 3.0], [0.5, -2.0]])
    X = congruence(A, P)
    assert np.array_equal(X, X.T)
    assert np.allclose(X, P.T @ A @ P)


def test_block_diag_skips_empty_blocks() -> None:
    out = block_diag(np.eye(1), np.zeros((0, 0)), 2 * np.eye(2))
    assert out.shape == (3, 3)
    assert np.allclose(np.diag(out), [1.0, 2.0, 2.0])


def test_is_singular(cfg) -> None:
    assert is_singular(np.diag([1.0, 0.0]), cfg)
    assert not is_singular(np.eye(3), cfg)


def test_nonsingular_pencil_for_pair(cfg) -> None:
    C = SymMatrixSet.from_arrays([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])], cfg)
    search = find_nonsingular_pencil(C, cfg)
    assert search.found, "a·diag(1,0) + b·diag(0,1) is nonsingular for ab != 0"
    assert not is_singular(search.witness.pencil, cfg)


def test_singular_pair_has_no_nonsingular_pencil(cfg) -> None:
    A = np.zeros((2, 2))
    A[0, 0] = 1.0
    C = SymMatrixSet.from_arrays([A, 2.0 * A], cfg)
    assert not find_nonsingular_pencil(C, cfg).found


def test_definite_pencil_found_for_pd_member(cfg) -> None:
    C = SymMatrixSet.from_arrays([np.diag([1.0, -1.0]), np.eye(2)], cfg)
    search = find_definite_pencil(C, cfg)
    assert search.found
    assert search.witness.kind is PencilKind.POSITIVE_DEFINITE
    assert np.linalg.eigvalsh(search.witness.pencil)[0] > 0


def test_no_definite_pencil_for_e_and_indefinite_diag(cfg) -> None:
    C = SymMatrixSet.from_arrays([E(2), np.diag([1.0, -1.0])], cfg)
    search = find_definite_pencil(C, cfg)
    assert not search.found, "every combination of E(2) and diag(1,-1) has trace 0"


def test_phi_d_vanishes_on_exact_factorization(cfg) -> None:
    C = SymMatrixSet.from_arrays([np.diag([1.0, 2.0]), np.diag([3.0, -1.0])], cfg)
    assert phi_D(C, np.eye(2), [np.diag([1.0, 2.0]), np.diag([3.0, -1.0])]) == 0.0


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(min_value=-5, max_value=5, allow_nan=False), min_size=3, max_size=3))
def test_offdiag_norm_ignores_the_diagonal(values) -> None:
    a, b, c = values
    M = np.array([[a, b], [b, c]])
    assert np.isclose(offdiag_norm(M), abs(b) * np.sqrt(2.0))


def test_s_commutator(cfg) -> None:
    A, B = np.diag([1.0, 2.0]), E(2)
    assert np.allclose(s_commutator(A, B), A @ B - B @ A)
    assert np.allclose(s_commutator(A, B, np.eye(2), cfg), A @ B - B @ A)
    S = np.diag([2.0, 1.0])
    assert np.allclose(s_commutator(S, 3.0 * S, S, cfg), 0.0)
    with pytest.raises(SingularityError):
        s_commutator(A, B, np.diag([1.0, 0.0]), cfg)


def test_phi_t_measures_distance_to_diagonal_images(cfg) -> None:
    C = SymMatrixSet.from_arrays([np.diag([1.0, 2.0]), E(2)], cfg)
    assert phi_T(C, np.eye(2), [np.diag([1.0, 2.0]), np.zeros((2, 2))]) == pytest.approx(2.0)
    wide = np.hstack([np.eye(2), np.zeros((2, 1))])
    assert phi_T(C, wide, [[1.0, 2.0, 0.0], [0.0, 0.0, 0.0]]) == pytest.approx(2.0)
    with pytest.raises(DomainError, match="m×n"):
        phi_T(C, np.eye(3), [np.eye(3), np.eye(3)])


def test_special_matrix_dispatch() -> None:
    assert np.array_equal(special_matrix(SpecialMatrixKind(SpecialTag.E, 3)), E(3))
    assert np.array_equal(special_matrix(SpecialMatrixKind(SpecialTag.H, 3)), H(3))
    assert np.allclose(special_matrix(SpecialMatrixKind(SpecialTag.RK, 2, k=4.0)), np.diag([2.0, 0.5]))
    with pytest.raises(DomainError, match="even size"):
        special_matrix(SpecialMatrixKind(SpecialTag.JORDAN, 3, eigenvalue=1.0 + 1.0j))
    with pytest.raises(DomainError):
        special_matrix(SpecialMatrixKind(SpecialTag.G, 0))


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=8), st.floats(min_value=-10.0, max_value=10.0, allow_nan=False))
def test_exchange_times_jordan_block(m, eigenvalue) -> None:
    assert np.allclose(E(m) @ jordan_block(eigenvalue, m), eigenvalue * E(m) + F(m))


def _sampled_pencil_measure(C: SymMatrixSet, rng: np.random.Generator, samples: int = 300) -> float:
    coeffs = np.vstack([np.eye(C.size), rng.standard_normal((samples, C.size))])
    best = 0.0
    for c in coeffs:
        s = np.linalg.svd(C.pencil(c), compute_uv=False)
        if s[0] > 0.0:
            best = max(best, float(s[-1] / s[0]))
    return best


def _pencil_case(kind: str, rng: np.random.Generator) -> list:
    if kind == "singular-pencil":
        # the 3x3 block [[0, 0, a], [0, 0, b], [a, b, 0]] has rank 2 for every a, b
        X = np.zeros((3, 3))
        X[0, 2] = X[2, 0] = 1.0
        Y = F(3)
        P = np.linalg.qr(rng.standard_normal((3, 3)))[0] @ np.diag(rng.uniform(1.0, 2.0, 3))
        mats = [P.T @ X @ P, P.T @ Y @ P]
        if rng.random() < 0.5:
            mats.append(rng.uniform(-1, 1) * mats[0] + rng.uniform(-1, 1) * mats[1])
        return mats
    m, L = int(rng.integers(2, 5)), int(rng.integers(2, 4))
    P = np.linalg.qr(rng.standard_normal((m, m)))[0] @ np.diag(rng.uniform(1.0, 2.0, m))
    mats = []
    for _ in range(L):
        X = rng.standard_normal((m, m))
        X = X + X.T
        if kind == "common-kernel":
            X[-1, :] = X[:, -1] = 0.0
        mats.append(P.T @ X @ P)
    return mats


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("kind", ["generic", "common-kernel", "singular-pencil"])
def test_pencil_search_agrees_with_determinant_sampling(kind, seed, cfg) -> None:
    rng = np.random.default_rng(seed)
    C = SymMatrixSet.from_arrays(_pencil_case(kind, rng), cfg, symmetrize=True)
    search = find_nonsingular_pencil(C, cfg)
    sampled = _sampled_pencil_measure(C, rng)
    assert search.found == (sampled > cfg.tol_det), f"{kind}: sampled measure {sampled:.3e}"
    assert search.found == (kind == "generic")
    if search.found:
        assert np.allclose(search.witness.pencil, C.pencil(search.witness.coeffs))
        assert not is_singular(search.witness.pencil, cfg)
