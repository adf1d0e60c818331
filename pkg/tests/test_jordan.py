from __future__ import annotations

import numpy as np
import pytest

from simdiag.errors import DomainError
from simdiag.jordan import (
    JordanBlockSpec,
    has_only_real_eigenvalues,
    is_nilpotent,
    jordan_matrix,
    real_jordan_form,
    weak_jordan_similarity,
)
from simdiag.matcore import jordan_block
from simdiag.reporting import Verdict


def test_diagonalizable_matrix_gives_unit_blocks(cfg) -> None:
    jf = real_jordan_form(np.diag([3.0, 1.0, 2.0]), cfg)
    assert jf.is_diagonal
    assert sorted(b.re for b in jf.blocks) == [1.0, 2.0, 3.0]
    assert jf.residual <= cfg.tol_jordan


def test_defective_matrix_gives_one_block(cfg) -> None:
    jf = real_jordan_form(jordan_block(2.0, 2), cfg)
    assert len(jf.blocks) == 1, f"expected a single 2x2 block, got {jf.blocks}"
    block = jf.blocks[0]
    assert block.is_real and block.size == 2 and np.isclose(block.re, 2.0)
    assert not jf.is_diagonal


def test_rotation_gives_complex_pair(cfg) -> None:
    jf = real_jordan_form(np.array([[0.0, -1.0], [1.0, 0.0]]), cfg)
    assert not jf.all_real
    assert len(jf.blocks) == 1
    assert np.isclose(abs(jf.blocks[0].im), 1.0)


def test_transform_reproduces_matrix(cfg) -> None:
    M = np.array([[2.0, 1.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, -1.0]])
    jf = real_jordan_form(M, cfg)
    T = jf.transform
    assert np.allclose(np.linalg.solve(T, M @ T), jf.matrix(), atol=1e-8)


def test_rejects_non_square(cfg) -> None:
    with pytest.raises(DomainError):
        real_jordan_form(np.zeros((2, 3)), cfg)


def test_real_spectrum_checks(cfg) -> None:
    assert has_only_real_eigenvalues(np.diag([1.0, -2.0]), cfg) is Verdict.YES
    assert has_only_real_eigenvalues(np.array([[0.0, -1.0], [1.0, 0.0]]), cfg) is Verdict.NO


def test_nilpotency(cfg) -> None:
    assert is_nilpotent(np.array([[0.0, 1.0], [0.0, 0.0]]), cfg) is Verdict.YES
    assert is_nilpotent(np.eye(2), cfg) is Verdict.NO


def test_weak_similarity_converges_to_diagonal(cfg) -> None:
    M = jordan_block(1.5, 3)
    Pk = weak_jordan_similarity(M, cfg)
    offs = []
    for k in (10.0, 100.0, 1000.0):
        X = np.linalg.solve(Pk(k), M @ Pk(k))
        offs.append(float(np.linalg.norm(X - np.diag(np.diag(X)))))
    assert offs[0] > offs[1] > offs[2], f"off-diagonal part should shrink with k, got {offs}"


_EIGENVALUES = (-2.0, -0.5, 1.0, 3.0)


def _random_jordan_data(rng: np.random.Generator):
    count = int(rng.integers(1, 4))
    values = rng.permutation(_EIGENVALUES)[:count]
    blocks = [JordanBlockSpec("real", float(v), 0.0, int(rng.integers(1, 3))) for v in values]
    if rng.random() < 0.5:
        blocks.append(JordanBlockSpec("complex-pair", 0.5, 1.0, 1))
    J = jordan_matrix(blocks)
    m = J.shape[0]
    Q, _ = np.linalg.qr(rng.standard_normal((m, m)))
    T = Q @ np.diag(rng.uniform(1.0, 2.0, m))
    return blocks, T @ J @ np.linalg.inv(T)


@pytest.mark.parametrize("seed", range(200))
def test_recovers_known_jordan_structure(seed, cfg) -> None:
    blocks, M = _random_jordan_data(np.random.default_rng(seed))
    form = real_jordan_form(M, cfg)

    def shape(specs):
        return sorted((b.kind, b.size) for b in specs)

    assert shape(form.blocks) == shape(blocks), f"seed {seed}: {form.blocks} vs {blocks}"
    want = sorted((b.kind, b.re, b.im, b.size) for b in blocks)
    got = sorted((b.kind, b.re, b.im, b.size) for b in form.blocks)
    for (_, re_w, im_w, _), (_, re_g, im_g, _) in zip(want, got):
        assert abs(re_w - re_g) <= 1e-6 and abs(im_w - im_g) <= 1e-6


def _spectrum_matrix(rng: np.random.Generator) -> np.ndarray:
    reals = list(rng.permutation(_EIGENVALUES)[: int(rng.integers(1, 4))])
    blocks = [JordanBlockSpec("real", float(v), 0.0, 1) for v in reals]
    if rng.random() < 0.5:
        blocks.append(JordanBlockSpec("complex-pair", float(rng.uniform(-1.0, 1.0)), float(rng.uniform(0.3, 1.5)), 1))
    J = jordan_matrix(blocks)
    m = J.shape[0]
    Q, _ = np.linalg.qr(rng.standard_normal((m, m)))
    T = Q @ np.diag(rng.uniform(1.0, 2.0, m))
    return T @ J @ np.linalg.inv(T)


@pytest.mark.parametrize("seed", range(40))
def test_real_spectrum_matches_characteristic_polynomial(seed, cfg) -> None:
    rng = np.random.default_rng(seed)
    M = _spectrum_matrix(rng)
    roots = np.roots(np.poly(M))
    expected = Verdict.YES if float(np.max(np.abs(roots.imag))) < 1e-6 else Verdict.NO
    assert has_only_real_eigenvalues(M, cfg) is expected

    m = M.shape[0]
    Q, _ = np.linalg.qr(rng.standard_normal((m, m)))
    S = Q @ np.diag(rng.uniform(1.0, 2.0, m))
    similar = np.linalg.solve(S, M @ S)
    assert has_only_real_eigenvalues(similar, cfg) is expected, "realness is a similarity invariant"
