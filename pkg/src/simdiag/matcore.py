"""Symmetric matrix sets, special matrices, residual functions and pencil search."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg as la
from scipy.optimize import minimize, minimize_scalar

from .config import Config, resolve
from .errors import DomainError, SingularityError

logger = logging.getLogger("simdiag.matcore")

MAX_DIM = 32
_TINY = 1e-300


def frob(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, "fro"))


def offdiag(M: np.ndarray) -> np.ndarray:
    out = np.array(M, dtype=float, copy=True)
    np.fill_diagonal(out, 0.0)
    return out


def offdiag_norm(M: np.ndarray) -> float:
    return frob(offdiag(M))


def diag_norm(M: np.ndarray) -> float:
    return float(np.linalg.norm(np.diag(M)))


def congruence(A: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Return PᵀAP, symmetrized."""
    out = P.T @ A @ P
    return (out + out.T) / 2.0


def rel_singularity(M: np.ndarray) -> float:
    """Reciprocal 2-norm condition number; 0 for singular or zero matrices."""
    if M.size == 0:
        return 1.0
    s = la.svdvals(M)
    if s[0] <= _TINY:
        return 0.0
    return float(s[-1] / s[0])


def is_singular(M: np.ndarray, cfg: Optional[Config] = None) -> bool:
    cfg = resolve(cfg)
    return rel_singularity(M) <= cfg.tol_det


def is_diagonal(M: np.ndarray, tol: float, scale: Optional[float] = None) -> bool:
    ref = frob(M) if scale is None else scale
    return offdiag_norm(M) <= tol * max(ref, 1.0)


def numerical_rank(M: np.ndarray, tol: float, ref: Optional[float] = None) -> int:
    """Count singular values above ``tol`` times ``ref`` (default: the largest one)."""
    if M.size == 0:
        return 0
    s = la.svdvals(M)
    base = s[0] if ref is None else ref
    if base <= _TINY:
        return 0
    return int(np.sum(s > tol * base))


@dataclass(frozen=True)
class SymMatrixSet:
    """Ordered set of L real symmetric m×m matrices."""

    dim: int
    mats: Tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise DomainError(f"Matrix dimension must be >= 1, got {self.dim}")
        if len(self.mats) < 1:
            raise DomainError("A matrix set needs at least one matrix")
        for idx, A in enumerate(self.mats):
            if A.shape != (self.dim, self.dim):
                raise DomainError(f"Matrix {idx} has shape {A.shape}, expected {(self.dim, self.dim)}")

    @classmethod
    def from_arrays(
        cls,
        mats: Sequence[Any],
        cfg: Optional[Config] = None,
        symmetrize: bool = False,
    ) -> "SymMatrixSet":
        """Validate symmetry within tol_sym·‖A‖_F and freeze copies of the inputs."""
        cfg = resolve(cfg)
        arrays = [np.array(A, dtype=float) for A in mats]
        if not arrays:
            raise DomainError("A matrix set needs at least one matrix")
        if arrays[0].ndim != 2:
            raise DomainError(f"Matrices must be 2-D, got shape {arrays[0].shape}")
        m = arrays[0].shape[0]
        frozen = []
        for idx, A in enumerate(arrays):
            if A.shape != (m, m):
                raise DomainError(f"Matrix {idx} has shape {A.shape}, expected {(m, m)}")
            if not np.all(np.isfinite(A)):
                raise DomainError(f"Matrix {idx} has non-finite entries")
            asym = float(np.max(np.abs(A - A.T))) if m > 0 else 0.0
            if asym > cfg.tol_sym * max(frob(A), 1.0) and not symmetrize:
                raise DomainError(f"Matrix {idx} is not symmetric (max |A - Aᵀ| = {asym:.3e})")
            S = (A + A.T) / 2.0
            S.setflags(write=False)
            frozen.append(S)
        return cls(dim=m, mats=tuple(frozen))

    @property
    def size(self) -> int:
        return len(self.mats)

    def __len__(self) -> int:
        return len(self.mats)

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self.mats)

    def __getitem__(self, idx: int) -> np.ndarray:
        return self.mats[idx]

    def scale(self) -> float:
        return max(frob(A) for A in self.mats)

    def congruence(self, P: np.ndarray) -> "SymMatrixSet":
        return SymMatrixSet(dim=P.shape[1], mats=tuple(congruence(A, P) for A in self.mats))

    def scaled(self, factor: float) -> "SymMatrixSet":
        return SymMatrixSet(dim=self.dim, mats=tuple(factor * A for A in self.mats))

    def subset(self, rows: Sequence[int]) -> "SymMatrixSet":
        idx = np.asarray(rows, dtype=int)
        return SymMatrixSet(dim=len(idx), mats=tuple(A[np.ix_(idx, idx)] for A in self.mats))

    def pencil(self, coeffs: Sequence[float]) -> np.ndarray:
        if len(coeffs) != self.size:
            raise DomainError(f"Pencil needs {self.size} coefficients, got {len(coeffs)}")
        out = np.zeros((self.dim, self.dim))
        for c, A in zip(coeffs, self.mats):
            out = out + float(c) * A
        return out

    def to_lists(self) -> List[List[List[float]]]:
        return [A.tolist() for A in self.mats]


# --- special matrices -------------------------------------------------------


class SpecialTag(str, Enum):
    E = "E"
    F = "F"
    H = "H"
    G = "G"
    RK = "Rk"
    JORDAN = "Jordan"


@dataclass(frozen=True)
class SpecialMatrixKind:
    tag: SpecialTag
    size: int
    k: float = 1.0
    eigenvalue: Union[float, complex] = 0.0


def E(m: int) -> np.ndarray:
    return np.fliplr(np.eye(m))


def F(m: int) -> np.ndarray:
    """Ones on the sub-antidiagonal i + j = m + 2 (1-based)."""
    out = np.zeros((m, m))
    for i in range(1, m):
        out[i, m - i] = 1.0
    return out


def H(m: int) -> np.ndarray:
    """+1 on the super-antidiagonal, −1 on the sub-antidiagonal."""
    out = np.zeros((m, m))
    for i in range(m - 1):
        out[i, m - 2 - i] = 1.0
    for i in range(1, m):
        out[i, m - i] = -1.0
    return out


def G(m: int) -> np.ndarray:
    plus = (m + 1) // 2
    return np.diag([1.0] * plus + [-1.0] * (m - plus))


def R(k: float, m: int) -> np.ndarray:
    if k < 1:
        raise DomainError(f"R_k needs k >= 1, got {k}")
    deltas = (m + 1) / 2.0 - np.arange(1, m + 1)
    return np.diag(np.power(float(k), deltas))


def jordan_block(eigenvalue: Union[float, complex], m: int) -> np.ndarray:
    """Real Jordan block; a complex eigenvalue a+bi uses [[a,−b],[b,a]] cells and needs even m."""
    lam = complex(eigenvalue)
    if lam.imag == 0.0:
        out = float(lam.real) * np.eye(m)
        for i in range(m - 1):
            out[i, i + 1] = 1.0
        return out
    if m % 2:
        raise DomainError(f"A complex Jordan block needs an even size, got {m}")
    a, b = lam.real, lam.imag
    cell = np.array([[a, -b], [b, a]])
    cells = m // 2
    out = np.kron(np.eye(cells), cell)
    for i in range(cells - 1):
        out[2 * i : 2 * i + 2, 2 * i + 2 : 2 * i + 4] = np.eye(2)
    return out


def special_matrix(kind: SpecialMatrixKind) -> np.ndarray:
    if kind.size < 1:
        raise DomainError(f"Special matrix size must be >= 1, got {kind.size}")
    tag = SpecialTag(kind.tag)
    if tag is SpecialTag.E:
        return E(kind.size)
    if tag is SpecialTag.F:
        return F(kind.size)
    if tag is SpecialTag.H:
        return H(kind.size)
    if tag is SpecialTag.G:
        return G(kind.size)
    if tag is SpecialTag.RK:
        return R(kind.k, kind.size)
    lam = complex(kind.eigenvalue)
    if lam.imag != 0.0 and kind.size % 2:
        raise DomainError(f"A complex Jordan block needs an even size, got {kind.size}")
    return jordan_block(kind.eigenvalue, kind.size)


def block_diag(*blocks: np.ndarray) -> np.ndarray:
    blocks = tuple(b for b in blocks if b.size)
    if not blocks:
        return np.zeros((0, 0))
    return la.block_diag(*blocks)


# --- commutators and residuals ---------------------------------------------


def s_commutator(A: np.ndarray, B: np.ndarray, S: Optional[np.ndarray] = None, cfg: Optional[Config] = None) -> np.ndarray:
    """[A, B]_S = S⁻¹A S⁻¹B − S⁻¹B S⁻¹A."""
    if S is None:
        return A @ B - B @ A
    if is_singular(S, cfg):
        raise SingularityError("S-commutator needs a nonsingular S")
    SA = la.solve(S, A)
    SB = la.solve(S, B)
    return SA @ SB - SB @ SA


def _check_diag_list(C: SymMatrixSet, D: Sequence[np.ndarray], n: int) -> List[np.ndarray]:
    if len(D) != C.size:
        raise DomainError(f"Expected {C.size} diagonal matrices, got {len(D)}")
    out = []
    for idx, Di in enumerate(D):
        Di = np.asarray(Di, dtype=float)
        if Di.ndim == 1:
            Di = np.diag(Di)
        if Di.shape != (n, n):
            raise DomainError(f"D[{idx}] has shape {Di.shape}, expected {(n, n)}")
        out.append(Di)
    return out


def phi_T(C: SymMatrixSet, P: np.ndarray, D: Sequence[np.ndarray], transpose_first: bool = True) -> float:
    """Σ‖PᵀAᵢP − Dᵢ‖² (P is m×n), or Σ‖PAᵢPᵀ − Dᵢ‖² (P is n×m) with transpose_first=False."""
    P = np.asarray(P, dtype=float)
    m = C.dim
    if transpose_first:
        if P.shape[0] != m or P.shape[1] < m:
            raise DomainError(f"P must be m×n with n >= m={m}, got {P.shape}")
        n = P.shape[1]
        images = [P.T @ A @ P for A in C]
    else:
        if P.shape[1] != m or P.shape[0] < m:
            raise DomainError(f"P must be n×m with n >= m={m}, got {P.shape}")
        n = P.shape[0]
        images = [P @ A @ P.T for A in C]
    Ds = _check_diag_list(C, D, n)
    return float(sum(frob(X - Di) ** 2 for X, Di in zip(images, Ds)))


def phi_D(C: SymMatrixSet, P: np.ndarray, D: Sequence[np.ndarray]) -> float:
    """Σ‖Aᵢ − PᵀDᵢP‖² with P n×m."""
    P = np.asarray(P, dtype=float)
    m = C.dim
    if P.ndim != 2 or P.shape[1] != m or P.shape[0] < m:
        raise DomainError(f"P must be n×m with n >= m={m}, got {P.shape}")
    Ds = _check_diag_list(C, D, P.shape[0])
    return float(sum(frob(A - P.T @ Di @ P) ** 2 for A, Di in zip(C, Ds)))


# --- pencils ----------------------------------------------------------------


class PencilKind(str, Enum):
    NONSINGULAR = "nonsingular"
    POSITIVE_DEFINITE = "positive-definite"
    POSITIVE_SEMIDEFINITE = "positive-semidefinite"


@dataclass(frozen=True)
class PencilWitness:
    coeffs: Tuple[float, ...]
    pencil: np.ndarray
    kind: PencilKind
    measure: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "coeffs": list(self.coeffs),
            "pencil": self.pencil.tolist(),
            "kind": self.kind.value,
            "measure": self.measure,
        }


@dataclass(frozen=True)
class PencilSearch:
    """Outcome of a pencil search: a witness, or a verdict string when none was found."""

    witness: Optional[PencilWitness]
    verdict: str
    probabilistic: bool = False
    notes: List[str] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.witness is not None


def _unit(coeffs: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(coeffs)
    return coeffs / nrm if nrm > 0 else coeffs


def find_nonsingular_pencil(C: SymMatrixSet, cfg: Optional[Config] = None) -> PencilSearch:
    cfg = resolve(cfg)
    m = C.dim
    if C.size == 1:
        A = C[0]
        measure = rel_singularity(A)
        if measure > cfg.tol_det:
            return PencilSearch(PencilWitness((1.0,), A.copy(), PencilKind.NONSINGULAR, measure), "nonsingular")
        return PencilSearch(None, "singular-set")
    if C.size == 2:
        # det(αA + (1−α)B) has degree <= m in α; m+1 distinct nodes decide it exactly.
        best: Optional[Tuple[float, float]] = None
        for alpha in np.linspace(0.0, 1.0, m + 1):
            measure = rel_singularity(alpha * C[0] + (1.0 - alpha) * C[1])
            if best is None or measure > best[1]:
                best = (float(alpha), measure)
        assert best is not None
        alpha, measure = best
        logger.debug("Pair pencil search: best alpha=%.4f measure=%.3e", alpha, measure)
        if measure <= cfg.tol_det:
            return PencilSearch(None, "singular-set")
        coeffs = (alpha, 1.0 - alpha)
        return PencilSearch(PencilWitness(coeffs, C.pencil(coeffs), PencilKind.NONSINGULAR, measure), "nonsingular")

    candidates: List[np.ndarray] = [np.eye(C.size)[i] for i in range(C.size)]
    rng = np.random.default_rng(cfg.seed)
    candidates.extend(_unit(rng.standard_normal(C.size)) for _ in range(cfg.n_pencil))
    best_coeffs, best_measure = None, -1.0
    for coeffs in candidates:
        measure = rel_singularity(C.pencil(coeffs))
        if measure > best_measure:
            best_coeffs, best_measure = coeffs, measure
    if best_coeffs is None or best_measure <= cfg.tol_det:
        return PencilSearch(
            None,
            "singular-set",
            probabilistic=True,
            notes=[f"no nonsingular pencil among {len(candidates)} samples"],
        )
    coeffs = tuple(float(c) for c in best_coeffs)
    return PencilSearch(PencilWitness(coeffs, C.pencil(coeffs), PencilKind.NONSINGULAR, best_measure), "nonsingular")


def _lambda_min(M: np.ndarray) -> float:
    return float(la.eigvalsh(M)[0])


def _definite_outcome(C: SymMatrixSet, coeffs: np.ndarray, value: float, cfg: Config) -> PencilSearch:
    scale = max(C.scale(), _TINY)
    pencil = C.pencil(coeffs)
    coeffs_t = tuple(float(c) for c in coeffs)
    if value > cfg.tol_pd * scale:
        return PencilSearch(PencilWitness(coeffs_t, pencil, PencilKind.POSITIVE_DEFINITE, value), "positive-definite")
    if value >= -cfg.tol_pd * scale:
        return PencilSearch(
            PencilWitness(coeffs_t, pencil, PencilKind.POSITIVE_SEMIDEFINITE, value), "positive-semidefinite"
        )
    return PencilSearch(
        None,
        "none-found",
        probabilistic=C.size > 2,
        notes=[f"best smallest eigenvalue {value:.3e}; not a proof of nonexistence"],
    )


def find_definite_pencil(C: SymMatrixSet, cfg: Optional[Config] = None) -> PencilSearch:
    """Search for a unit-norm coefficient vector maximizing λ_min of the pencil."""
    cfg = resolve(cfg)
    if C.size == 1:
        A = C[0]
        vals = la.eigvalsh(A)
        coeffs = np.array([1.0]) if vals[0] >= -vals[-1] else np.array([-1.0])
        return _definite_outcome(C, coeffs, _lambda_min(C.pencil(coeffs)), cfg)

    if C.size == 2:
        thetas = np.linspace(0.0, 2.0 * math.pi, cfg.n_theta, endpoint=False)
        values = [_lambda_min(math.cos(t) * C[0] + math.sin(t) * C[1]) for t in thetas]
        idx = int(np.argmax(values))
        step = 2.0 * math.pi / cfg.n_theta
        res = minimize_scalar(
            lambda t: -_lambda_min(math.cos(t) * C[0] + math.sin(t) * C[1]),
            bounds=(thetas[idx] - step, thetas[idx] + step),
            method="bounded",
            options={"xatol": 1e-13},
        )
        theta, value = float(thetas[idx]), float(values[idx])
        if res.success and -float(res.fun) > value:
            theta, value = float(res.x), -float(res.fun)
        logger.debug("Definite pencil scan: theta=%.6f lambda_min=%.3e", theta, value)
        return _definite_outcome(C, np.array([math.cos(theta), math.sin(theta)]), value, cfg)

    rng = np.random.default_rng(cfg.seed)
    eye = np.eye(C.size)
    candidates = [eye[i] for i in range(C.size)] + [-eye[i] for i in range(C.size)]
    candidates.extend(_unit(rng.standard_normal(C.size)) for _ in range(cfg.n_pencil))
    scored = sorted(((_lambda_min(C.pencil(c)), tuple(c)) for c in candidates), reverse=True)
    best_value, best = scored[0][0], np.array(scored[0][1])
    for _, start in scored[:4]:
        res = minimize(
            lambda c: -_lambda_min(C.pencil(_unit(np.asarray(c)))) if np.linalg.norm(c) > 0 else np.inf,
            np.array(start),
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000},
        )
        value = -float(res.fun)
        if np.isfinite(value) and value > best_value:
            best_value, best = value, _unit(np.asarray(res.x))
    return _definite_outcome(C, best, best_value, cfg)
