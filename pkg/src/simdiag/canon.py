"""Congruence canonical forms of symmetric matrix pairs."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as la
from scipy.special import binom

from .config import Config, resolve
from .errors import CanonicalUnreliableError, DomainError, SingularityError
from .jordan import JordanBlockSpec, real_jordan_form
from .matcore import (
    E,
    F,
    H,
    SymMatrixSet,
    block_diag,
    find_nonsingular_pencil,
    frob,
    is_singular,
    jordan_block,
)

logger = logging.getLogger("simdiag.canon")

NONSINGULAR_PAIR = "nonsingular-pair"
SINGULAR_PAIR = "singular-pair"


def eg_rotation(m: int) -> np.ndarray:
    """Q ∈ SO_m with QᵀE(m)Q = G(m)."""
    cols_plus, cols_minus = [], []
    for i in range(m // 2):
        plus = np.zeros(m)
        plus[i] = plus[m - 1 - i] = 1.0 / np.sqrt(2.0)
        minus = np.zeros(m)
        minus[i], minus[m - 1 - i] = 1.0 / np.sqrt(2.0), -1.0 / np.sqrt(2.0)
        cols_plus.append(plus)
        cols_minus.append(minus)
    if m % 2:
        mid = np.zeros(m)
        mid[m // 2] = 1.0
        cols_plus.append(mid)
    Q = np.column_stack(cols_plus + cols_minus)
    if np.linalg.det(Q) < 0:
        Q[:, -1] = -Q[:, -1]
    return Q


# --- Uhlig form -----------------------------------------------------------------


@dataclass(frozen=True)
class UhligBlockSpec:
    """σE(size) / σE(size)J(λ,size); complex pairs carry sign None and an even size."""

    sign: Optional[int]
    size: int
    re: float
    im: float = 0.0

    @property
    def is_real(self) -> bool:
        return self.im == 0.0

    @property
    def eigenvalue(self) -> Any:
        return self.re if self.is_real else complex(self.re, self.im)

    def x_block(self) -> np.ndarray:
        return (self.sign or 1) * E(self.size)

    def y_block(self) -> np.ndarray:
        return (self.sign or 1) * E(self.size) @ jordan_block(self.eigenvalue, self.size)

    def to_dict(self) -> Dict[str, Any]:
        return {"sign": self.sign, "size": self.size, "re": self.re, "im": self.im}


@dataclass(frozen=True)
class UhligCanonicalPair:
    transform: np.ndarray
    blocks: Tuple[UhligBlockSpec, ...]
    residual_a: float
    residual_b: float

    def target_a(self) -> np.ndarray:
        return block_diag(*(b.x_block() for b in self.blocks))

    def target_b(self) -> np.ndarray:
        return block_diag(*(b.y_block() for b in self.blocks))

    def block_slices(self) -> List[slice]:
        out, start = [], 0
        for b in self.blocks:
            out.append(slice(start, start + b.size))
            start += b.size
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            "transform": self.transform.tolist(),
            "blocks": [b.to_dict() for b in self.blocks],
            "residual_a": self.residual_a,
            "residual_b": self.residual_b,
        }


def _shift(s: int, dtype: Any = float) -> np.ndarray:
    return np.eye(s, k=1, dtype=dtype)


def _toeplitz_poly(coeffs: Sequence[Any], s: int, dtype: Any) -> np.ndarray:
    Z = _shift(s, dtype)
    out = np.zeros((s, s), dtype=dtype)
    power = np.eye(s, dtype=dtype)
    for c in coeffs:
        out = out + c * power
        power = power @ Z
    return out


def _normalize_chain(V: np.ndarray, A: np.ndarray, complex_pair: bool) -> Tuple[np.ndarray, int]:
    """Rescale a chain by an upper-triangular Toeplitz factor so its A-Gram is σE (or 2iE)."""
    s = V.shape[1]
    dtype = complex if complex_pair else float
    Gram = V.T @ A @ V
    g = Gram[s - 1, :]
    g0 = g[0]
    Hn = _toeplitz_poly([0.0] + [g[t] / g0 for t in range(1, s)], s, dtype)
    inv_sqrt = np.zeros((s, s), dtype=dtype)
    power = np.eye(s, dtype=dtype)
    for n in range(s):
        inv_sqrt = inv_sqrt + binom(-0.5, n) * power
        power = power @ Hn
    if complex_pair:
        sign = 0
        lead = np.sqrt(2j / g0)
    else:
        sign = 1 if g0.real > 0 else -1
        lead = 1.0 / np.sqrt(abs(g0.real))
    return V @ (lead * inv_sqrt), sign


def _pairing(V: np.ndarray, A: np.ndarray, W: np.ndarray) -> complex:
    """Top of V against the bottom of W, relative to their norms."""
    top, bottom = V[:, -1], W[:, 0]
    denom = max(float(np.linalg.norm(top) * np.linalg.norm(bottom)), 1e-300)
    return complex(top @ A @ bottom) / denom


def _deflate_group(
    chains: List[np.ndarray], A: np.ndarray, complex_pair: bool, cfg: Config, eigenvalue: Any
) -> List[Tuple[int, np.ndarray]]:
    """Split one eigenvalue's chains into A-orthogonal, normalized chains."""
    norm_a = max(float(np.linalg.norm(A, 2)), 1e-300)
    out: List[Tuple[int, np.ndarray]] = []
    chains = [c.astype(complex) if complex_pair else c.real.copy() for c in chains]
    while chains:
        s = max(c.shape[1] for c in chains)
        idx = [i for i, c in enumerate(chains) if c.shape[1] == s]
        diag = {i: abs(_pairing(chains[i], A, chains[i])) / norm_a for i in idx}
        best = max(idx, key=lambda i: diag[i])
        off = [
            (abs(_pairing(chains[i], A, chains[j])) / norm_a, i, j) for i in idx for j in idx if i < j
        ]
        best_off = max(off) if off else (0.0, best, best)
        if diag[best] < 0.1 * best_off[0]:
            _, i, j = best_off
            plus = chains[i] + chains[j]
            minus = chains[i] - chains[j]
            chains[i] = plus if abs(_pairing(plus, A, plus)) >= abs(_pairing(minus, A, minus)) else minus
            best = i
        measured = abs(_pairing(chains[best], A, chains[best])) / norm_a
        if measured < cfg.tol_canon:
            raise CanonicalUnreliableError(
                f"chains at eigenvalue {eigenvalue} pair to {measured:.3e} under A", eigenvalue, measured
            )
        W, sign = _normalize_chain(chains.pop(best), A, complex_pair)
        size = W.shape[1]
        Ew = E(size)
        if complex_pair:
            proj_left = W @ Ew / 2j
        else:
            proj_left = sign * (W @ Ew)
        right = W.T @ A
        chains = [c - proj_left @ (right @ c) for c in chains]
        out.append((sign, W))
    return out


def _realify(W: np.ndarray) -> np.ndarray:
    cols = []
    for j in range(W.shape[1]):
        cols.append(W[:, j].imag)
        cols.append(W[:, j].real)
    return np.column_stack(cols)


def _group_key(block: JordanBlockSpec) -> Tuple[str, float, float]:
    return (block.kind, block.re, block.im)


def uhlig_canonical(A: np.ndarray, B: np.ndarray, cfg: Optional[Config] = None) -> UhligCanonicalPair:
    cfg = resolve(cfg)
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"Pair matrices must be square and equal-shaped, got {A.shape} and {B.shape}")
    if is_singular(A, cfg):
        raise SingularityError("Uhlig canonical form needs a nonsingular A")
    M = la.solve(A, B)
    jf = real_jordan_form(M, cfg)

    groups: Dict[Tuple[str, float, float], List[np.ndarray]] = {}
    order: List[Tuple[str, float, float]] = []
    for block, cols in zip(jf.blocks, jf.column_slices()):
        key = _group_key(block)
        T = jf.transform[:, cols]
        if block.is_real:
            chain = T
        else:
            chain = T[:, 1::2] + 1j * T[:, 0::2]
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(chain)

    pieces: List[Tuple[UhligBlockSpec, np.ndarray]] = []
    for key in order:
        kind, re, im = key
        complex_pair = kind != "real"
        for sign, W in _deflate_group(groups[key], A, complex_pair, cfg, complex(re, im) if complex_pair else re):
            if complex_pair:
                spec = UhligBlockSpec(sign=None, size=2 * W.shape[1], re=re, im=im)
                pieces.append((spec, _realify(W)))
            else:
                spec = UhligBlockSpec(sign=sign, size=W.shape[1], re=re)
                pieces.append((spec, W.real))

    def sort_key(item: Tuple[UhligBlockSpec, np.ndarray]) -> Tuple[int, float, float, int, int]:
        spec = item[0]
        return (0 if spec.is_real else 1, spec.re, spec.im, -spec.size, -(spec.sign or 1))

    pieces.sort(key=sort_key)
    P = np.hstack([cols for _, cols in pieces])
    blocks = tuple(spec for spec, _ in pieces)
    result = UhligCanonicalPair(transform=P, blocks=blocks, residual_a=0.0, residual_b=0.0)
    X, Y = result.target_a(), result.target_b()
    res_a = frob(P.T @ A @ P - X) / max(frob(X), 1.0)
    res_b = frob(P.T @ B @ P - Y) / max(frob(Y), 1.0)
    logger.debug("Uhlig form: %d blocks, residuals %.3e / %.3e", len(blocks), res_a, res_b)
    if res_a > cfg.tol_canon or res_b > cfg.tol_canon:
        raise CanonicalUnreliableError(f"canonical residuals {res_a:.3e} / {res_b:.3e} exceed {cfg.tol_canon:.1e}")
    return UhligCanonicalPair(transform=P, blocks=blocks, residual_a=res_a, residual_b=res_b)


# --- Lancaster-Rodman taxonomy --------------------------------------------------------


@dataclass(frozen=True)
class LancasterBlockDescriptor:
    """One block of the five-type taxonomy of general symmetric pairs."""

    type: int
    size: int
    sign: int = 1
    eigenvalue: float = 0.0
    mu: float = 0.0
    nu: float = 0.0

    def __post_init__(self) -> None:
        if self.type not in (1, 2, 3, 4, 5):
            raise DomainError(f"Invalid block type {self.type}. Expected one of [1, 2, 3, 4, 5]")
        if self.size < 1:
            raise DomainError(f"Block size must be >= 1, got {self.size}")
        if self.sign not in (1, -1):
            raise DomainError(f"Block sign must be +1 or -1, got {self.sign}")
        if self.type == 3 and self.nu == 0.0:
            raise DomainError("Type-3 blocks need nu != 0")

    @property
    def dim(self) -> int:
        if self.type == 3:
            return 2 * self.size
        if self.type == 4:
            return 2 * self.size + 1
        return self.size

    def blocks(self) -> Tuple[np.ndarray, np.ndarray]:
        m = self.size
        if self.type == 1:
            return self.sign * E(m), self.sign * (self.eigenvalue * E(m) + F(m))
        if self.type == 2:
            return self.sign * F(m), self.sign * E(m)
        if self.type == 3:
            tail = block_diag(E(2 * m - 2), np.zeros((2, 2)))
            return E(2 * m), self.mu * E(2 * m) + self.nu * H(2 * m) + tail
        if self.type == 4:
            X = np.zeros((2 * m + 1, 2 * m + 1))
            X[:m, m + 1 :] = E(m)
            X[m + 1 :, :m] = E(m)
            return X, F(2 * m + 1)
        return np.zeros((m, m)), np.zeros((m, m))

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LancasterBlockDescriptor":
        return cls(
            type=int(data["type"]),
            size=int(data["size"]),
            sign=int(data.get("sign", 1)),
            eigenvalue=float(data.get("eigenvalue", 0.0)),
            mu=float(data.get("mu", 0.0)),
            nu=float(data.get("nu", 0.0)),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": self.type,
            "size": self.size,
            "sign": self.sign,
            "eigenvalue": self.eigenvalue,
            "mu": self.mu,
            "nu": self.nu,
        }


def lancaster_layout(blocks: Sequence[LancasterBlockDescriptor]) -> List[LancasterBlockDescriptor]:
    """Blocks in canonical order (by type, type 5 last); at most one type-5 block."""
    if not blocks:
        raise DomainError("At least one block descriptor is required")
    if sum(1 for b in blocks if b.type == 5) > 1:
        raise DomainError("At most one type-5 block is allowed")
    return sorted(blocks, key=lambda b: b.type)


def synthesize_lancaster_pair(
    blocks: Sequence[LancasterBlockDescriptor], scramble: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, np.ndarray]:
    ordered = lancaster_layout(blocks)
    pairs = [b.blocks() for b in ordered]
    X = block_diag(*(x for x, _ in pairs))
    Y = block_diag(*(y for _, y in pairs))
    if scramble is None:
        return X, Y
    Q = np.asarray(scramble, dtype=float)
    if Q.shape != X.shape:
        raise DomainError(f"Scramble must have shape {X.shape}, got {Q.shape}")
    if is_singular(Q):
        raise DomainError("Scramble matrix must be nonsingular")
    XQ, YQ = Q.T @ X @ Q, Q.T @ Y @ Q
    return (XQ + XQ.T) / 2.0, (YQ + YQ.T) / 2.0


def pair_regularity(A: np.ndarray, B: np.ndarray, cfg: Optional[Config] = None) -> str:
    search = find_nonsingular_pencil(SymMatrixSet.from_arrays([A, B], cfg), cfg)
    return NONSINGULAR_PAIR if search.found else SINGULAR_PAIR
