"""Decomposition-based projective factorizations Aᵢ = PᵀD⁽ⁱ⁾P."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as la

from .config import Config, resolve
from .errors import DomainError
from .matcore import SymMatrixSet, frob, phi_D
from .reporting import Verdict

logger = logging.getLogger("simdiag.dsdo")

BASIS_MAX_DIM = 12


class FactorMode(str, Enum):
    SDO = "SDO"
    SD = "SD"


@dataclass(frozen=True)
class DsdoFactorization:
    """P is n×m; ``diags[i]`` holds the diagonal of D⁽ⁱ⁾."""

    P: np.ndarray
    diags: Tuple[np.ndarray, ...]
    mode: FactorMode
    residual: float

    @property
    def n(self) -> int:
        return self.P.shape[0]

    @property
    def m(self) -> int:
        return self.P.shape[1]

    @property
    def D(self) -> List[np.ndarray]:
        return [np.diag(d) for d in self.diags]

    def reconstruct(self) -> List[np.ndarray]:
        return [(self.P.T * d) @ self.P for d in self.diags]

    def gram_error(self) -> float:
        G = self.P.T @ self.P
        if self.mode is FactorMode.SDO:
            return frob(G - np.eye(self.m))
        return abs(float(np.linalg.det(G)) - 1.0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "m": self.m,
            "mode": self.mode.value,
            "residual": self.residual,
            "P": self.P.tolist(),
            "D": [d.tolist() for d in self.diags],
        }


def _sorted_eigh(A: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenpairs with eigenvalues descending and each vector's largest-magnitude entry positive."""
    w, V = la.eigh(A)
    order = np.argsort(w)[::-1]
    w, V = w[order], V[:, order]
    for j in range(V.shape[1]):
        if V[np.argmax(np.abs(V[:, j])), j] < 0:
            V[:, j] = -V[:, j]
    return w, V


def _check_residual(C: SymMatrixSet, fact: DsdoFactorization, cfg: Config) -> None:
    ref = sum(frob(A) ** 2 for A in C)
    if fact.residual > cfg.tol_fact * max(ref, 1.0):
        logger.warning("Factorization residual %.3e exceeds tolerance %.1e", fact.residual, cfg.tol_fact)


def dsdo_construct(C: SymMatrixSet, cfg: Optional[Config] = None) -> DsdoFactorization:
    """Stacked spectral factors P = [Q₁; …; Q_L]/√L with n = L·m."""
    cfg = resolve(cfg)
    L, m = C.size, C.dim
    blocks, diags = [], []
    for i, A in enumerate(C):
        w, V = _sorted_eigh(A)
        blocks.append(V.T)
        d = np.zeros(L * m)
        d[i * m : (i + 1) * m] = L * w
        diags.append(d)
    P = np.vstack(blocks) / np.sqrt(L)
    partial = DsdoFactorization(P=P, diags=tuple(diags), mode=FactorMode.SDO, residual=0.0)
    fact = DsdoFactorization(P=P, diags=tuple(diags), mode=FactorMode.SDO, residual=phi_D(C, P, partial.D))
    _check_residual(C, fact, cfg)
    logger.debug("Stacked factorization: n=%d residual=%.3e", fact.n, fact.residual)
    return fact


def symmetric_basis(m: int) -> List[np.ndarray]:
    """T^(i,i) for every i, then T^(i,j) = e_i e_jᵀ + e_j e_iᵀ for i < j."""
    basis = []
    for i in range(m):
        T = np.zeros((m, m))
        T[i, i] = 1.0
        basis.append(T)
    for i in range(m):
        for j in range(i + 1, m):
            T = np.zeros((m, m))
            T[i, j] = T[j, i] = 1.0
            basis.append(T)
    return basis


def basis_coefficients(A: np.ndarray) -> np.ndarray:
    m = A.shape[0]
    diag = [A[i, i] for i in range(m)]
    upper = [A[i, j] for i in range(m) for j in range(i + 1, m)]
    return np.asarray(diag + upper, dtype=float)


@dataclass(frozen=True)
class BasisFactorization:
    """One fixed P that factorizes every symmetric m×m set through the basis diagonals."""

    base: DsdoFactorization

    @property
    def P(self) -> np.ndarray:
        return self.base.P

    @property
    def n(self) -> int:
        return self.base.n

    def diagonal_for(self, A: np.ndarray) -> np.ndarray:
        coeffs = basis_coefficients(np.asarray(A, dtype=float))
        return np.asarray(self.base.diags).T @ coeffs

    def factorize(self, C: SymMatrixSet) -> DsdoFactorization:
        if C.dim != self.base.m:
            raise DomainError(f"Basis factorization is for m={self.base.m}, got m={C.dim}")
        diags = tuple(self.diagonal_for(A) for A in C)
        D = [np.diag(d) for d in diags]
        return DsdoFactorization(P=self.P, diags=diags, mode=FactorMode.SDO, residual=phi_D(C, self.P, D))


def dsdo_basis_construct(m: int, cfg: Optional[Config] = None) -> BasisFactorization:
    if m < 1 or m > BASIS_MAX_DIM:
        raise DomainError(f"Basis construction supports 1 <= m <= {BASIS_MAX_DIM}, got {m}")
    basis = SymMatrixSet.from_arrays(symmetric_basis(m), cfg)
    return BasisFactorization(base=dsdo_construct(basis, cfg))


def complete_to_orthogonal(P: np.ndarray) -> np.ndarray:
    """Square orthogonal Q whose first m columns are the orthonormal columns of P."""
    P = np.asarray(P, dtype=float)
    n, m = P.shape
    if m > n:
        raise DomainError(f"P must be tall, got shape {P.shape}")
    if frob(P.T @ P - np.eye(m)) > 1e-8:
        raise DomainError("P must have orthonormal columns")
    if m == n:
        return P.copy()
    return np.hstack([P, la.null_space(P.T)])


def embed_factorization(fact: DsdoFactorization, n_new: int) -> DsdoFactorization:
    """Zero-pad a factorization to n_new rows."""
    if n_new < fact.n:
        raise DomainError(f"Cannot embed n={fact.n} into n={n_new}")
    pad = n_new - fact.n
    P = np.vstack([fact.P, np.zeros((pad, fact.m))])
    diags = tuple(np.concatenate([d, np.zeros(pad)]) for d in fact.diags)
    return DsdoFactorization(P=P, diags=diags, mode=fact.mode, residual=fact.residual)


def lifted_set(fact: DsdoFactorization) -> List[np.ndarray]:
    """S⁽ⁱ⁾ = QᵀD⁽ⁱ⁾Q for the orthogonal completion Q of P; top-left blocks recover the set."""
    Q = complete_to_orthogonal(fact.P)
    return [(Q.T * d) @ Q for d in fact.diags]


def rho_projection_check(
    S: Sequence[np.ndarray], C: SymMatrixSet, mode: FactorMode = FactorMode.SDO, cfg: Optional[Config] = None
) -> Verdict:
    """Yes when every top-left m×m block of S⁽ⁱ⁾ is Aᵢ and S is SDO (or SD)."""
    from .classify import check_sd, check_sdo

    cfg = resolve(cfg)
    if len(S) != C.size:
        raise DomainError(f"Expected {C.size} lifted matrices, got {len(S)}")
    lifted = SymMatrixSet.from_arrays(S, cfg)
    if lifted.dim < C.dim:
        raise DomainError(f"Lifted dimension {lifted.dim} is smaller than m={C.dim}")
    m = C.dim
    for Si, A in zip(lifted, C):
        if float(np.max(np.abs(Si[:m, :m] - A))) > cfg.tol_sym * max(frob(A), 1.0):
            return Verdict.NO
    check = check_sdo if FactorMode(mode) is FactorMode.SDO else check_sd
    return check(lifted, cfg).verdict


def joint_slice_factorization(slices: SymMatrixSet, order: int, cfg: Optional[Config] = None) -> DsdoFactorization:
    """Common factorization of the L = m^(d−2) slices of an order-d symmetric tensor."""
    if order < 3:
        raise DomainError(f"Tensor order must be >= 3, got {order}")
    m = slices.dim
    expected = m ** (order - 2)
    if slices.size != expected:
        raise DomainError(f"An order-{order} tensor of dimension {m} has {expected} slices, got {slices.size}")
    if slices.size * m < m ** (order - 1):
        raise DomainError(f"n = {slices.size * m} is below m^(d-1) = {m ** (order - 1)}")
    return dsdo_construct(slices, cfg)


@dataclass(frozen=True)
class SyntheticBss:
    mixing: np.ndarray
    sources: Tuple[np.ndarray, ...]
    slices: SymMatrixSet


def synthetic_bss(m: int, order: int, rng: np.random.Generator, n_sources: Optional[int] = None) -> SyntheticBss:
    """Random mixing P₀ with orthonormal columns, diagonal source slices Dᵢ and slices P₀ᵀDᵢP₀."""
    if m < 1 or order < 3:
        raise DomainError(f"Need m >= 1 and order >= 3, got m={m}, order={order}")
    n0 = m + 1 if n_sources is None else n_sources
    if n0 < m:
        raise DomainError(f"n_sources must be >= m={m}, got {n0}")
    mixing, _ = la.qr(rng.standard_normal((n0, m)), mode="economic")
    count = m ** (order - 2)
    sources = tuple(rng.standard_normal(n0) for _ in range(count))
    mats = [(mixing.T * d) @ mixing for d in sources]
    return SyntheticBss(mixing=mixing, sources=sources, slices=SymMatrixSet.from_arrays(mats, symmetrize=True))
