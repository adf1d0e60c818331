"""Real Jordan normal form by eigenvalue clustering and rank sequences."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg as la

from .config import Config, resolve
from .errors import DomainError, JordanUnreliableError
from .matcore import MAX_DIM, R, block_diag, jordan_block
from .reporting import Verdict

logger = logging.getLogger("simdiag.jordan")

_TINY = 1e-300


@dataclass(frozen=True)
class JordanBlockSpec:
    """A real block (re, size) or a complex pair re ± i·im with im > 0 and ``size`` 2×2 cells."""

    kind: str
    re: float
    im: float
    size: int

    @property
    def is_real(self) -> bool:
        return self.kind == "real"

    @property
    def eigenvalue(self) -> Union[float, complex]:
        return self.re if self.is_real else complex(self.re, self.im)

    @property
    def dim(self) -> int:
        return self.size if self.is_real else 2 * self.size

    def matrix(self) -> np.ndarray:
        return jordan_block(self.eigenvalue, self.dim)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "re": self.re, "im": self.im, "size": self.size}


def _sort_key(block: JordanBlockSpec) -> Tuple[int, float, float, int]:
    return (0 if block.is_real else 1, block.re, block.im, -block.size)


def jordan_matrix(blocks: Sequence[JordanBlockSpec]) -> np.ndarray:
    return block_diag(*(b.matrix() for b in blocks))


@dataclass(frozen=True)
class RealJordanForm:
    blocks: Tuple[JordanBlockSpec, ...]
    transform: np.ndarray
    residual: float
    condition: float

    @property
    def dim(self) -> int:
        return self.transform.shape[0]

    def matrix(self) -> np.ndarray:
        return jordan_matrix(self.blocks)

    @property
    def is_diagonal(self) -> bool:
        return all(b.is_real and b.size == 1 for b in self.blocks)

    @property
    def all_real(self) -> bool:
        return all(b.is_real for b in self.blocks)

    def has_repeated_block(self, tol: float = 0.0) -> bool:
        """True when two blocks share eigenvalue (within tol) and size."""
        for i, a in enumerate(self.blocks):
            for b in self.blocks[i + 1 :]:
                if a.kind == b.kind and a.size == b.size and abs(a.eigenvalue - b.eigenvalue) <= tol:
                    return True
        return False

    def single_block_per_eigenvalue(self, tol: float = 0.0) -> bool:
        for i, a in enumerate(self.blocks):
            for b in self.blocks[i + 1 :]:
                if a.kind == b.kind and abs(a.eigenvalue - b.eigenvalue) <= tol:
                    return False
        return True

    def column_slices(self) -> List[slice]:
        out, start = [], 0
        for b in self.blocks:
            out.append(slice(start, start + b.dim))
            start += b.dim
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            "blocks": [b.to_dict() for b in self.blocks],
            "transform": self.transform.tolist(),
            "residual": self.residual,
            "condition": self.condition,
        }


# --- eigenvalue clusters ------------------------------------------------------


@dataclass(frozen=True)
class _Cluster:
    center: complex
    members: Tuple[complex, ...]

    @property
    def count(self) -> int:
        return len(self.members)


def _cluster(eigs: np.ndarray, radius: float) -> List[_Cluster]:
    """Single-linkage clusters of eigenvalues under the given radius."""
    n = len(eigs)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(eigs[i] - eigs[j]) <= radius:
                parent[find(i)] = find(j)
    groups: Dict[int, List[complex]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(complex(eigs[i]))
    return [_Cluster(center=complex(np.mean(g)), members=tuple(g)) for g in groups.values()]


def _scale(M: np.ndarray) -> float:
    return max(float(np.linalg.norm(M, 2)) if M.size else 0.0, _TINY)


def _clusters_for(M: np.ndarray, cfg: Config) -> Tuple[List[_Cluster], float]:
    eigs = la.eigvals(M)
    rho = float(np.max(np.abs(eigs))) if len(eigs) else 0.0
    scale = max(rho, _scale(M))
    return _cluster(eigs, cfg.tol_cluster * scale), scale


def _rank(N: np.ndarray, tol: float, ref: float) -> int:
    s = la.svdvals(N)
    if ref <= _TINY:
        return 0
    return int(np.sum(s > tol * ref))


def _rank_sequence(N: np.ndarray, p: int, cfg: Config, scale: float) -> List[int]:
    """r_j = rank((M − λI)^j) for j = 0..p, stopping once it reaches m − p."""
    m = N.shape[0]
    norm = scale if np.any(N) else 0.0
    ranks = [m]
    power = np.eye(m, dtype=N.dtype)
    for j in range(1, p + 1):
        power = power @ N
        ranks.append(_rank(power, cfg.tol_rank, norm**j))
        if ranks[-1] == m - p:
            break
    return ranks


def _segre_from_ranks(ranks: List[int]) -> List[int]:
    """Block sizes from r_j; #blocks of size >= j equals r_{j−1} − r_j."""
    ge = [ranks[j - 1] - ranks[j] for j in range(1, len(ranks))]
    sizes: List[int] = []
    for j in range(len(ge)):
        exact = ge[j] - (ge[j + 1] if j + 1 < len(ge) else 0)
        sizes.extend([j + 1] * exact)
    return sorted(sizes, reverse=True)


def _kernel(Mat: np.ndarray, dim: int) -> np.ndarray:
    """Basis of the ``dim`` smallest right singular directions."""
    m = Mat.shape[1]
    if dim <= 0:
        return np.zeros((m, 0), dtype=Mat.dtype)
    _, _, vh = la.svd(Mat)
    return vh[m - dim :].conj().T


def _chains(N: np.ndarray, sizes: List[int], ranks: List[int], cfg: Config) -> List[Tuple[int, np.ndarray]]:
    """Generalized eigenvector chains, built top-down from the largest size."""
    m = N.shape[0]
    top_size = sizes[0]
    powers = [np.eye(m, dtype=N.dtype)]
    for _ in range(top_size):
        powers.append(powers[-1] @ N)
    nullity = [m - ranks[min(s, len(ranks) - 1)] for s in range(top_size + 1)]
    kernels = [_kernel(powers[s], nullity[s]) for s in range(top_size + 1)]
    chosen: List[Tuple[int, np.ndarray]] = []
    for s in range(top_size, 0, -1):
        need = sizes.count(s)
        if need == 0:
            continue
        used = [kernels[s - 1]] + [(powers[t - s] @ top)[:, None] for t, top in chosen]
        W = np.hstack(used) if used else np.zeros((m, 0), dtype=N.dtype)
        Ks = kernels[s]
        if W.shape[1]:
            Qw = la.orth(W, rcond=cfg.tol_rank)
            Y = Ks - Qw @ (Qw.conj().T @ Ks)
        else:
            Y = Ks
        _, sv, vh = la.svd(Y, full_matrices=False)
        if len(sv) < need or sv[need - 1] <= np.sqrt(cfg.tol_rank):
            raise JordanUnreliableError(
                f"cannot pick {need} independent chain tops of length {s}",
                measured=float(sv[need - 1]) if len(sv) >= need else 0.0,
            )
        tops = Ks @ vh[:need].conj().T
        for c in range(need):
            chosen.append((s, tops[:, c]))
    return chosen


def _chain_columns(N: np.ndarray, size: int, top: np.ndarray) -> np.ndarray:
    cols = [top]
    for _ in range(size - 1):
        cols.append(N @ cols[-1])
    V = np.column_stack(cols[::-1])
    return V / max(float(np.max(np.linalg.norm(V, axis=0))), _TINY)


def _realify(V: np.ndarray) -> np.ndarray:
    """Complex chain columns v_j -> real columns [Im v_j, Re v_j]."""
    out = []
    for j in range(V.shape[1]):
        out.append(V[:, j].imag)
        out.append(V[:, j].real)
    return np.column_stack(out)


def real_jordan_form(M: np.ndarray, cfg: Optional[Config] = None) -> RealJordanForm:
    cfg = resolve(cfg)
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise DomainError(f"Jordan form needs a nonempty square matrix, got shape {M.shape}")
    m = M.shape[0]
    if m > MAX_DIM:
        raise DomainError(f"Jordan form supports m <= {MAX_DIM}, got {m}")

    clusters, scale = _clusters_for(M, cfg)
    pieces: List[Tuple[JordanBlockSpec, np.ndarray]] = []
    partial: List[JordanBlockSpec] = []
    conj_counts: Dict[int, int] = {}
    for cl in clusters:
        c = cl.center
        p = cl.count
        if abs(c.imag) <= cfg.tol_eig * scale:
            lam: complex = complex(c.real, 0.0)
            N = M - c.real * np.eye(m)
        elif c.imag > 0:
            lam = c
            N = M.astype(complex) - c * np.eye(m)
            conj_counts[p] = conj_counts.get(p, 0) + 1
        else:
            conj_counts[p] = conj_counts.get(p, 0) - 1
            continue
        ranks = _rank_sequence(N, p, cfg, scale)
        logger.debug("Cluster %s (multiplicity %d): rank sequence %s", lam, p, ranks)
        if ranks[-1] != m - p:
            raise JordanUnreliableError(
                f"rank sequence {ranks} at eigenvalue {lam} does not reach m - p = {m - p}",
                partial_blocks=partial,
            )
        sizes = _segre_from_ranks(ranks)
        for size, top in _chains(N, sizes, ranks, cfg):
            V = _chain_columns(N, size, top)
            if lam.imag == 0.0:
                spec = JordanBlockSpec("real", float(lam.real), 0.0, size)
                cols = V.real
            else:
                spec = JordanBlockSpec("complex-pair", float(lam.real), float(lam.imag), size)
                cols = _realify(V)
            partial.append(spec)
            pieces.append((spec, cols))
    if any(conj_counts.values()):
        raise JordanUnreliableError("complex eigenvalue clusters are not conjugate-symmetric", partial_blocks=partial)

    pieces.sort(key=lambda item: _sort_key(item[0]))
    blocks = tuple(spec for spec, _ in pieces)
    T = np.hstack([cols for _, cols in pieces])
    if T.shape != (m, m):
        raise JordanUnreliableError(f"assembled transform has shape {T.shape}", partial_blocks=partial)
    condition = float(np.linalg.cond(T))
    if not np.isfinite(condition) or condition > 1.0 / cfg.tol_rank:
        raise JordanUnreliableError(
            f"chain transform is ill-conditioned (cond={condition:.3e})", partial_blocks=partial, measured=condition
        )
    J = jordan_matrix(blocks)
    ref = max(float(np.linalg.norm(M, "fro")), 1.0)
    residual = float(np.linalg.norm(la.solve(T, M @ T) - J, "fro")) / ref
    if residual > cfg.tol_jordan:
        raise JordanUnreliableError(
            f"Jordan reconstruction residual {residual:.3e} exceeds {cfg.tol_jordan:.1e}",
            partial_blocks=partial,
            measured=residual,
        )
    return RealJordanForm(blocks=blocks, transform=T, residual=residual, condition=condition)


def has_only_real_eigenvalues(M: np.ndarray, cfg: Optional[Config] = None) -> Verdict:
    cfg = resolve(cfg)
    M = np.asarray(M, dtype=float)
    m = M.shape[0]
    if not np.any(M):
        return Verdict.YES
    if np.allclose(M, M.T, rtol=0.0, atol=cfg.tol_sym * _scale(M)):
        return Verdict.YES
    clusters, scale = _clusters_for(M, cfg)
    tau = cfg.tol_eig * scale
    verdict = Verdict.YES
    for cl in clusters:
        if all(abs(z.imag) <= tau / 2 for z in cl.members):
            continue
        c = cl.center
        if abs(c.imag) >= 2 * tau:
            return Verdict.NO
        if abs(c.imag) > tau / 2:
            verdict = Verdict.UNKNOWN
            continue
        # conjugate-symmetric cluster: split defective real eigenvalue or a genuine close pair
        N = M - c.real * np.eye(m)
        ranks = _rank_sequence(N, cl.count, cfg, scale)
        nullity = m - ranks[-1]
        if nullity == cl.count:
            continue
        if nullity == 0:
            return Verdict.NO
        verdict = Verdict.UNKNOWN
    return verdict


def is_nilpotent(M: np.ndarray, cfg: Optional[Config] = None) -> Verdict:
    cfg = resolve(cfg)
    M = np.asarray(M, dtype=float)
    m = M.shape[0]
    norm = float(np.linalg.norm(M, 2))
    if norm <= _TINY:
        return Verdict.YES
    eigs = la.eigvals(M)
    by_spectrum = (
        float(np.max(np.abs(eigs))) <= cfg.tol_cluster * norm and abs(np.trace(M)) / m <= cfg.tol_eig * norm
    )
    by_power = float(np.linalg.norm(np.linalg.matrix_power(M, m), 2)) <= cfg.tol_rank * norm**m
    if by_spectrum and by_power:
        return Verdict.YES
    if not by_spectrum and not by_power:
        return Verdict.NO
    logger.debug("Nilpotency checks disagree: spectrum=%s power=%s", by_spectrum, by_power)
    return Verdict.UNKNOWN


def weak_jordan_similarity(M: np.ndarray, cfg: Optional[Config] = None) -> Callable[[float], np.ndarray]:
    """k ↦ P_k with P_k⁻¹ M P_k converging to a diagonal matrix (real spectrum only)."""
    jf = real_jordan_form(M, cfg)
    if not jf.all_real:
        raise DomainError("a diagonal similarity limit exists only for real spectra")
    T = jf.transform

    def evaluate(k: float) -> np.ndarray:
        return T @ block_diag(*(R(k, b.size) for b in jf.blocks))

    return evaluate
