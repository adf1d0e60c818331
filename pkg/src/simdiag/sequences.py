"""Closed-form congruence sequences and their numerical verification.

A sequence is a recipe, evaluated at any k >= 1; nothing is materialized.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg as la

from .canon import LancasterBlockDescriptor, eg_rotation, lancaster_layout, uhlig_canonical
from .config import Config, resolve
from .errors import DomainError, KTooLargeError, NotTwsdBError, SingularityError
from .matcore import (
    G,
    PencilKind,
    PencilWitness,
    R,
    SymMatrixSet,
    block_diag,
    congruence,
    diag_norm,
    is_diagonal,
    is_singular,
    offdiag_norm,
)
from .reporting import VerificationReport, VerificationRow

logger = logging.getLogger("simdiag.sequences")

OVERFLOW_LIMIT = 1e150
DEFAULT_K_GRID = (10.0, 1e2, 1e3, 1e4)
DET_DRIFT_LIMIT = 1e-8
BOUNDED_RATIO = 2.0


# --- recipes ---------------------------------------------------------------------


@dataclass(frozen=True)
class NonsingularPairRecipe:
    """P_k = P̃·Diag{R_k(m_s)·Q_s}; size-1 blocks contribute the identity."""

    base: np.ndarray
    sizes: Tuple[int, ...]
    name: str = "NonsingularPair"

    def matrix(self, k: float) -> np.ndarray:
        return self.base @ block_diag(*(R(k, s) @ eg_rotation(s) for s in self.sizes))


@dataclass(frozen=True)
class SingularCase1Recipe:
    """P_k = P̄·Diag{1/k, …, 1/k, k^{m−1}}; the last coordinate lies in the zero block."""

    base: np.ndarray
    name: str = "SingularCase1"

    def matrix(self, k: float) -> np.ndarray:
        m = self.base.shape[0]
        scales = np.full(m, 1.0 / k)
        scales[-1] = float(k) ** (m - 1)
        return self.base * scales


@dataclass(frozen=True)
class SingularCase2Recipe:
    """P_k = P̄·Diag{I, W_k}·Diag{k^{−e}I, V_k} with W_k = R_k(2m_p+1) on the trailing type-4 block.

    V_k = Diag{k^{−e}I_{m_p}, k^{1/2}, k^{−e}I_{m_p}} and e = 1/(2(m−1)) keep det(P_k) = det(P̄).
    """

    base: np.ndarray
    mp: int
    name: str = "SingularCase2"

    def matrix(self, k: float) -> np.ndarray:
        m = self.base.shape[0]
        tail = 2 * self.mp + 1
        head = m - tail
        e = 1.0 / (2.0 * (m - 1))
        shrink = float(k) ** (-e)
        W = block_diag(np.eye(head), R(k, tail))
        V = np.concatenate(
            [np.full(head, shrink), np.full(self.mp, shrink), [math.sqrt(k)], np.full(self.mp, shrink)]
        )
        return self.base @ W * V


@dataclass(frozen=True)
class PsdPencilRecipe:
    """P_k = C̃_k·Q_k / det(C̃_k)^{1/m}, C̃_k = (C + I/k)^{−1/2}, Q_k diagonalizing C̃_k·B·C̃_k."""

    pencil: np.ndarray
    other: np.ndarray
    alpha: float
    beta: float
    name: str = "PsdPencil"

    def matrix(self, k: float) -> np.ndarray:
        m = self.pencil.shape[0]
        w, U = la.eigh(self.pencil)
        w = np.clip(w, 0.0, None)
        inv_sqrt = 1.0 / np.sqrt(w + 1.0 / k)
        C_tilde = (U * inv_sqrt) @ U.T
        inner = C_tilde @ self.other @ C_tilde
        _, Q = la.eigh((inner + inner.T) / 2.0)
        Q = _fix_signs_first_nonzero(Q)
        if np.linalg.det(Q) < 0:
            Q[:, -1] = -Q[:, -1]
        log_det = float(np.sum(np.log(inv_sqrt)))
        return C_tilde @ Q * math.exp(-log_det / m)


@dataclass(frozen=True)
class EFBlockRecipe:
    """P_k = R_k(m)·Q with QᵀE(m)Q = G(m)."""

    size: int
    name: str = "EFBlock"

    def matrix(self, k: float) -> np.ndarray:
        return R(k, self.size) @ eg_rotation(self.size)


@dataclass(frozen=True)
class ConstantRecipe:
    P: np.ndarray
    name: str = "Constant"

    def matrix(self, k: float) -> np.ndarray:
        return self.P


@dataclass(frozen=True)
class BlockSplitRecipe:
    """V_k = Π·Diag{P_k/ε_k, ε_k^{r/(m−r)}·I}·Πᵀ with ε_k = k^{−eps_exponent}."""

    order: Tuple[int, ...]
    first: int
    inner: "CongruenceSequence"
    eps_exponent: float
    name: str = "BlockSplit"

    def matrix(self, k: float) -> np.ndarray:
        m = len(self.order)
        r = self.first
        eps = float(k) ** (-self.eps_exponent)
        core = block_diag(self.inner.recipe.matrix(k) / eps, eps ** (r / (m - r)) * np.eye(m - r))
        Pi = np.zeros((m, m))
        Pi[list(self.order), range(m)] = 1.0
        return Pi @ core @ Pi.T


@dataclass(frozen=True)
class DiagonalRecipe:
    """P_k = base·Diag{k^{e_1}, …, k^{e_m}} with Σe_i = 0."""

    exponents: Tuple[float, ...]
    base: Optional[np.ndarray] = None
    name: str = "Diagonal"

    def matrix(self, k: float) -> np.ndarray:
        scales = np.power(float(k), np.asarray(self.exponents))
        if self.base is None:
            return np.diag(scales)
        return self.base * scales


@dataclass(frozen=True)
class ExplicitRecipe:
    fn: Callable[[float], np.ndarray]
    name: str = "Explicit"

    def matrix(self, k: float) -> np.ndarray:
        return np.asarray(self.fn(k), dtype=float)


Recipe = Union[
    NonsingularPairRecipe,
    SingularCase1Recipe,
    SingularCase2Recipe,
    PsdPencilRecipe,
    EFBlockRecipe,
    ConstantRecipe,
    BlockSplitRecipe,
    DiagonalRecipe,
    ExplicitRecipe,
]


@dataclass(frozen=True)
class CongruenceSequence:
    """A family P_k with constant determinant ``det_value``.

    ``decay_order`` d means offdiag(PₖᵀAᵢPₖ) = O(k^{−d}); ``limits`` lists the diagonal limits when known.
    """

    dim: int
    recipe: Recipe
    det_value: float
    limits: Optional[Tuple[np.ndarray, ...]] = None
    decay_order: float = 1.0
    notes: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def recipe_name(self) -> str:
        return self.recipe.name

    def __call__(self, k: float) -> np.ndarray:
        return evaluate(self, k)


def evaluate(seq: CongruenceSequence, k: float) -> np.ndarray:
    if not k >= 1:
        raise DomainError(f"Sequences are evaluated at k >= 1, got {k}")
    with np.errstate(over="ignore", invalid="ignore"):
        P = seq.recipe.matrix(float(k))
    if not np.all(np.isfinite(P)) or float(np.max(np.abs(P))) > OVERFLOW_LIMIT:
        raise KTooLargeError(f"{seq.recipe_name} overflows at k={k:g}", k=float(k), recipe=seq.recipe_name)
    return P


# --- helpers ---------------------------------------------------------------------


def _fix_signs_first_nonzero(Q: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    Q = np.array(Q, copy=True)
    for j in range(Q.shape[1]):
        col = Q[:, j]
        nz = np.flatnonzero(np.abs(col) > tol)
        if nz.size and col[nz[0]] < 0:
            Q[:, j] = -col
    return Q


def _det(P: np.ndarray) -> float:
    return float(np.linalg.det(P))


def _as_pair(A: np.ndarray, B: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"Pair matrices must be square and equal-shaped, got {A.shape} and {B.shape}")
    return A, B


# --- factories -------------------------------------------------------------------


def seq_constant(P: np.ndarray, limits: Optional[Sequence[np.ndarray]] = None) -> CongruenceSequence:
    P = np.asarray(P, dtype=float)
    det_value = _det(P)
    if det_value == 0.0:
        raise SingularityError("A constant sequence needs a nonsingular P")
    return CongruenceSequence(
        dim=P.shape[0],
        recipe=ConstantRecipe(P=P),
        det_value=det_value,
        limits=tuple(limits) if limits is not None else None,
        decay_order=math.inf,
    )


def seq_nonsingular_pair(A: np.ndarray, B: np.ndarray, cfg: Optional[Config] = None) -> CongruenceSequence:
    cfg = resolve(cfg)
    A, B = _as_pair(A, B)
    if is_singular(A, cfg):
        raise SingularityError("seq_nonsingular_pair needs a nonsingular A")
    scale = max(float(np.linalg.norm(A)), float(np.linalg.norm(B)))
    if is_diagonal(A, cfg.tol_diag, scale) and is_diagonal(B, cfg.tol_diag, scale):
        return seq_constant(np.eye(A.shape[0]), limits=(np.diag(np.diag(A)), np.diag(np.diag(B))))
    canon = uhlig_canonical(A, B, cfg)
    if any(not b.is_real for b in canon.blocks):
        raise DomainError("A⁻¹B has non-real eigenvalues; no bounded congruence sequence is built")
    sizes = tuple(b.size for b in canon.blocks)
    limit_a = block_diag(*(b.sign * G(b.size) for b in canon.blocks))
    limit_b = block_diag(*(b.re * b.sign * G(b.size) for b in canon.blocks))
    logger.debug("Nonsingular pair sequence with block sizes %s", sizes)
    return CongruenceSequence(
        dim=A.shape[0],
        recipe=NonsingularPairRecipe(base=canon.transform, sizes=sizes),
        det_value=_det(canon.transform),
        limits=(limit_a, limit_b),
        decay_order=1.0,
    )


def seq_singular_pair(
    blocks: Sequence[LancasterBlockDescriptor], scramble: Optional[np.ndarray] = None
) -> CongruenceSequence:
    """Sequence for the pair ``synthesize_lancaster_pair(blocks, scramble)``; P̄ is the inverse scramble."""
    ordered = lancaster_layout(blocks)
    m = sum(b.dim for b in ordered)
    base = np.eye(m) if scramble is None else la.inv(np.asarray(scramble, dtype=float))
    if base.shape != (m, m):
        raise DomainError(f"Scramble must have shape {(m, m)}, got {base.shape}")
    det_value = _det(base)
    counts = {t: sum(1 for b in ordered if b.type == t) for t in (1, 2, 3, 4, 5)}
    zeros = (np.zeros((m, m)), np.zeros((m, m)))
    if counts[5]:
        logger.debug("Singular pair with a zero block: scaling the kernel coordinate")
        return CongruenceSequence(
            dim=m, recipe=SingularCase1Recipe(base=base), det_value=det_value, limits=zeros, decay_order=2.0
        )
    if counts[4]:
        mp = ordered[-1].size
        e = 1.0 / (2.0 * (m - 1))
        return CongruenceSequence(
            dim=m,
            recipe=SingularCase2Recipe(base=base, mp=mp),
            det_value=det_value,
            limits=zeros,
            decay_order=min(2.0 * e, 0.5 + e),
        )
    if counts[3]:
        raise NotTwsdBError("pair has complex-eigenvalue blocks and no singular block; it is not TWSD-B")
    sizes = tuple(b.size for b in ordered)
    limit_a = block_diag(*(b.sign * G(b.size) if b.type == 1 else np.zeros((b.size, b.size)) for b in ordered))
    limit_b = block_diag(*(b.sign * (b.eigenvalue if b.type == 1 else 1.0) * G(b.size) for b in ordered))
    return CongruenceSequence(
        dim=m,
        recipe=NonsingularPairRecipe(base=base, sizes=sizes),
        det_value=det_value,
        limits=(limit_a, limit_b),
        decay_order=1.0,
    )


def seq_psd_pencil(A: np.ndarray, B: np.ndarray, witness: PencilWitness) -> CongruenceSequence:
    A, B = _as_pair(A, B)
    if PencilKind(witness.kind) not in (PencilKind.POSITIVE_DEFINITE, PencilKind.POSITIVE_SEMIDEFINITE):
        raise DomainError(f"A semidefinite pencil witness is required, got '{witness.kind}'")
    alpha, beta = (float(c) for c in witness.coeffs)
    if alpha == 0.0 and beta == 0.0:
        raise DomainError("Pencil coefficients must not both be zero")
    C = alpha * A + beta * B
    C = (C + C.T) / 2.0
    other = B if alpha != 0.0 else A
    notes = () if alpha != 0.0 else ("alpha is zero; roles of A and B swapped",)
    return CongruenceSequence(
        dim=A.shape[0],
        recipe=PsdPencilRecipe(pencil=C, other=other, alpha=alpha, beta=beta),
        det_value=1.0,
        limits=None,
        decay_order=0.5,
        notes=notes,
    )


def seq_ef_block(m: int) -> CongruenceSequence:
    if m < 1:
        raise DomainError(f"Block size must be >= 1, got {m}")
    return CongruenceSequence(
        dim=m,
        recipe=EFBlockRecipe(size=m),
        det_value=1.0,
        limits=(G(m), np.zeros((m, m))),
        decay_order=1.0,
    )


def seq_commuting_family(C: SymMatrixSet, coeffs: Sequence[float], index: int, cfg: Optional[Config] = None) -> CongruenceSequence:
    """Pair sequence built from (S, Aᵢ) where S = Σ coeffs·A; it serves the whole commuting family."""
    cfg = resolve(cfg)
    S = C.pencil(coeffs)
    if not 0 <= index < C.size:
        raise DomainError(f"Member index {index} out of range for a set of {C.size}")
    seq = seq_nonsingular_pair(S, C[index], cfg)
    return CongruenceSequence(
        dim=seq.dim,
        recipe=seq.recipe,
        det_value=seq.det_value,
        limits=None,
        decay_order=seq.decay_order,
        notes=(f"built from the pencil and member {index}",),
    )


def seq_block_split(
    dim: int,
    first_block: Sequence[int],
    inner: CongruenceSequence,
    eps_exponent: Optional[float] = None,
) -> CongruenceSequence:
    """Drive the ``first_block`` coordinates with ``inner`` and shrink the rest to zero."""
    first = [int(i) for i in first_block]
    if len(set(first)) != len(first) or any(i < 0 or i >= dim for i in first):
        raise DomainError(f"Invalid block indices {first} for dimension {dim}")
    if not 0 < len(first) < dim:
        raise DomainError("The split needs a nonempty first block and a nonempty remainder")
    if inner.dim != len(first):
        raise DomainError(f"Inner sequence has dimension {inner.dim}, block has {len(first)}")
    if eps_exponent is None:
        eps_exponent = 1.0 if math.isinf(inner.decay_order) else inner.decay_order / 4.0
    if eps_exponent <= 0:
        raise DomainError(f"eps_exponent must be positive, got {eps_exponent}")
    rest = [i for i in range(dim) if i not in first]
    order = tuple(first + rest)
    Pi = np.zeros((dim, dim))
    Pi[list(order), range(dim)] = 1.0
    decay = 2.0 * eps_exponent * len(first) / (dim - len(first))
    if not math.isinf(inner.decay_order):
        decay = min(decay, inner.decay_order - 2.0 * eps_exponent)
    return CongruenceSequence(
        dim=dim,
        recipe=BlockSplitRecipe(order=order, first=len(first), inner=inner, eps_exponent=float(eps_exponent)),
        det_value=inner.det_value,
        limits=None,
        decay_order=decay,
    )


def seq_to_zero(A: np.ndarray, cfg: Optional[Config] = None) -> CongruenceSequence:
    """Congruence sequence driving a single singular symmetric matrix to zero."""
    cfg = resolve(cfg)
    A = np.asarray(A, dtype=float)
    w, U = la.eigh((A + A.T) / 2.0)
    ref = max(float(np.max(np.abs(w))), 1e-300)
    zero = np.abs(w) <= cfg.tol_det * ref
    if not np.any(zero):
        raise DomainError("seq_to_zero needs a singular matrix")
    order = np.concatenate([np.flatnonzero((w > 0) & ~zero), np.flatnonzero((w < 0) & ~zero), np.flatnonzero(zero)])
    scales = np.where(zero, 1.0, 1.0 / np.sqrt(np.abs(w) + zero))
    base = U[:, order] * scales[order]
    return CongruenceSequence(
        dim=A.shape[0],
        recipe=SingularCase1Recipe(base=base),
        det_value=_det(base),
        limits=(np.zeros_like(A),),
        decay_order=2.0,
    )


def seq_diagonal_schedule(exponents: Sequence[float], base: Optional[np.ndarray] = None) -> CongruenceSequence:
    exps = tuple(float(e) for e in exponents)
    if abs(sum(exps)) > 1e-12:
        raise DomainError(f"Exponents must sum to zero for a constant determinant, got {sum(exps):g}")
    det_value = 1.0 if base is None else _det(np.asarray(base, dtype=float))
    return CongruenceSequence(
        dim=len(exps),
        recipe=DiagonalRecipe(exponents=exps, base=None if base is None else np.asarray(base, dtype=float)),
        det_value=det_value,
    )


def seq_explicit(fn: Callable[[float], np.ndarray], det_value: Optional[float] = None) -> CongruenceSequence:
    P1 = np.asarray(fn(1.0), dtype=float)
    if P1.ndim != 2 or P1.shape[0] != P1.shape[1]:
        raise DomainError(f"Explicit sequence must return square matrices, got shape {P1.shape}")
    value = _det(P1) if det_value is None else float(det_value)
    if value == 0.0:
        raise SingularityError("Explicit sequence is singular at k=1")
    return CongruenceSequence(dim=P1.shape[0], recipe=ExplicitRecipe(fn=fn), det_value=value)


# --- verification ----------------------------------------------------------------


def verify_sequence(
    C: SymMatrixSet,
    seq: CongruenceSequence,
    k_grid: Sequence[float] = DEFAULT_K_GRID,
    cfg: Optional[Config] = None,
) -> VerificationReport:
    cfg = resolve(cfg)
    grid = [float(k) for k in k_grid]
    if len(grid) < 3:
        raise DomainError(f"k_grid needs at least 3 points, got {len(grid)}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError(f"k_grid must be strictly ascending, got {grid}")
    if seq.dim != C.dim:
        raise DomainError(f"Sequence dimension {seq.dim} does not match set dimension {C.dim}")

    rows: List[VerificationRow] = []
    for k in grid:
        P = evaluate(seq, k)
        images = [congruence(A, P) for A in C]
        rows.append(
            VerificationRow(
                k=k,
                offdiag=float(sum(offdiag_norm(X) for X in images)),
                max_diag=float(max(diag_norm(X) for X in images)),
                det_drift=abs(_det(P) - seq.det_value) / abs(seq.det_value),
            )
        )

    floor = cfg.tol_diag * max(C.scale(), 1.0)
    offs = [r.offdiag for r in rows]
    monotone = all(b < a or (a <= floor and b <= floor) for a, b in zip(offs, offs[1:]))
    diags = [r.max_diag for r in rows]
    low = min(diags)
    bounded = max(diags) <= floor if low <= floor else max(diags) / low <= BOUNDED_RATIO
    det_constant = max(r.det_drift for r in rows) <= DET_DRIFT_LIMIT

    slope = None
    positive = [(k, v) for k, v in zip(grid, offs) if v > floor]
    if len(positive) >= 2:
        xs = np.log([k for k, _ in positive])
        ys = np.log([v for _, v in positive])
        slope = float(np.polyfit(xs, ys, 1)[0])

    logger.debug(
        "Verified %s: monotone=%s bounded=%s det_constant=%s slope=%s",
        seq.recipe_name, monotone, bounded, det_constant, slope,
    )
    return VerificationReport(
        recipe=seq.recipe_name,
        det_value=seq.det_value,
        rows=rows,
        monotone_decay=monotone,
        bounded_diag=bounded,
        det_constant=det_constant,
        decay_slope=slope,
    )
