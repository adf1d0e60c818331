"""Dense two-phase primal simplex with Bland's anti-cycling rule."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import Config, resolve
from .errors import DomainError, SimdiagError

logger = logging.getLogger("simdiag.simplex")

ITERATION_FACTOR = 50


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"
    INFEASIBLE = "infeasible"


def _matrix(rows: Optional[Any], n: int, name: str) -> np.ndarray:
    if rows is None:
        return np.zeros((0, n))
    M = np.atleast_2d(np.asarray(rows, dtype=float))
    if M.size == 0:
        return np.zeros((0, n))
    if M.shape[1] != n:
        raise DomainError(f"{name} must have {n} columns, got shape {M.shape}")
    return M


def _vector(values: Optional[Any], size: int, name: str) -> np.ndarray:
    v = np.zeros(0) if values is None else np.asarray(values, dtype=float).reshape(-1)
    if v.shape[0] != size:
        raise DomainError(f"{name} must have {size} entries, got {v.shape[0]}")
    return v


@dataclass(frozen=True)
class LpInstance:
    """min costᵀu s.t. A_ub·u ≤ b_ub, A_eq·u = b_eq, u_j ≥ 0 where ``nonneg[j]``."""

    cost: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    nonneg: Tuple[bool, ...]

    @classmethod
    def build(
        cls,
        cost: Sequence[float],
        A_ub: Optional[Any] = None,
        b_ub: Optional[Any] = None,
        A_eq: Optional[Any] = None,
        b_eq: Optional[Any] = None,
        nonneg: Optional[Sequence[bool]] = None,
    ) -> "LpInstance":
        c = np.asarray(cost, dtype=float).reshape(-1)
        n = c.shape[0]
        if n == 0:
            raise DomainError("An LP needs at least one variable")
        Aub = _matrix(A_ub, n, "A_ub")
        Aeq = _matrix(A_eq, n, "A_eq")
        bub = _vector(b_ub, Aub.shape[0], "b_ub")
        beq = _vector(b_eq, Aeq.shape[0], "b_eq")
        flags = tuple(True for _ in range(n)) if nonneg is None else tuple(bool(f) for f in nonneg)
        if len(flags) != n:
            raise DomainError(f"nonneg must have {n} flags, got {len(flags)}")
        for name, arr in (("cost", c), ("A_ub", Aub), ("b_ub", bub), ("A_eq", Aeq), ("b_eq", beq)):
            if not np.all(np.isfinite(arr)):
                raise DomainError(f"LP data '{name}' has non-finite entries")
        return cls(cost=c, A_ub=Aub, b_ub=bub, A_eq=Aeq, b_eq=beq, nonneg=flags)

    @property
    def n_vars(self) -> int:
        return self.cost.shape[0]

    def residual(self, u: np.ndarray) -> float:
        """Largest violation of any constraint or sign restriction at u."""
        parts = [0.0]
        if self.A_ub.shape[0]:
            parts.append(float(np.max(self.A_ub @ u - self.b_ub)))
        if self.A_eq.shape[0]:
            parts.append(float(np.max(np.abs(self.A_eq @ u - self.b_eq))))
        signed = [-u[j] for j, flag in enumerate(self.nonneg) if flag]
        if signed:
            parts.append(float(max(signed)))
        return max(parts)


@dataclass(frozen=True)
class LpResult:
    status: LpStatus
    value: Optional[float] = None
    point: Optional[np.ndarray] = None
    residual: float = 0.0
    iterations: int = 0
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": self.status.value,
            "value": self.value if self.value is not None and np.isfinite(self.value) else None,
            "point": None if self.point is None else self.point.tolist(),
            "residual": self.residual,
            "iterations": self.iterations,
            "notes": list(self.notes),
        }


@dataclass
class _Tableau:
    T: np.ndarray
    rhs: np.ndarray
    basis: List[int]
    iterations: int = 0

    def pivot(self, row: int, col: int) -> None:
        piv = self.T[row, col]
        self.T[row] /= piv
        self.rhs[row] /= piv
        for i in range(self.T.shape[0]):
            if i != row and self.T[i, col] != 0.0:
                f = self.T[i, col]
                self.T[i] -= f * self.T[row]
                self.rhs[i] -= f * self.rhs[row]
        self.basis[row] = col
        self.iterations += 1

    def drop_row(self, row: int) -> None:
        self.T = np.delete(self.T, row, axis=0)
        self.rhs = np.delete(self.rhs, row)
        del self.basis[row]


def _standard_form(lp: LpInstance) -> Tuple[np.ndarray, np.ndarray, np.ndarray, List[Tuple[int, float]]]:
    """Columns: split variables then one slack per inequality row; rows with b < 0 are negated."""
    columns: List[Tuple[int, float]] = []
    for j, flag in enumerate(lp.nonneg):
        columns.append((j, 1.0))
        if not flag:
            columns.append((j, -1.0))
    n_split = len(columns)
    p, q = lp.A_ub.shape[0], lp.A_eq.shape[0]
    A = np.zeros((p + q, n_split + p))
    for col, (j, sign) in enumerate(columns):
        if p:
            A[:p, col] = sign * lp.A_ub[:, j]
        if q:
            A[p:, col] = sign * lp.A_eq[:, j]
    A[:p, n_split:] = np.eye(p)
    b = np.concatenate([lp.b_ub, lp.b_eq])
    c = np.zeros(n_split + p)
    for col, (j, sign) in enumerate(columns):
        c[col] = sign * lp.cost[j]
    neg = b < 0
    A[neg] *= -1.0
    b = np.where(neg, -b, b)
    return A, b, c, columns


def _run(tab: _Tableau, cost: np.ndarray, allowed: int, tol: float, limit: int) -> LpStatus:
    """Bland pivots on tab until optimal or unbounded; only columns < allowed may enter."""
    while True:
        if tab.iterations > limit:
            raise SimdiagError(f"Simplex exceeded {limit} pivots")
        reduced = cost - cost[tab.basis] @ tab.T
        entering = next((j for j in range(allowed) if reduced[j] < -tol), None)
        if entering is None:
            return LpStatus.OPTIMAL
        column = tab.T[:, entering]
        best: Optional[Tuple[float, int, int]] = None
        for i in range(column.shape[0]):
            if column[i] > tol:
                ratio = tab.rhs[i] / column[i]
                key = (ratio, tab.basis[i], i)
                if best is None or ratio < best[0] - tol or (abs(ratio - best[0]) <= tol and tab.basis[i] < best[1]):
                    best = key
        if best is None:
            return LpStatus.UNBOUNDED
        logger.debug("Pivot: column %d enters, row %d (basis %d) leaves", entering, best[2], best[1])
        tab.pivot(best[2], entering)


def solve_lp(lp: LpInstance, cfg: Optional[Config] = None) -> LpResult:
    cfg = resolve(cfg)
    tol = cfg.tol_pivot
    A, b, c, columns = _standard_form(lp)
    rows, n_std = A.shape
    limit = ITERATION_FACTOR * (rows + n_std + 1)

    T = np.hstack([A, np.eye(rows)])
    tab = _Tableau(T=T, rhs=b.astype(float).copy(), basis=list(range(n_std, n_std + rows)))
    phase1_cost = np.concatenate([np.zeros(n_std), np.ones(rows)])
    _run(tab, phase1_cost, n_std, tol, limit)
    infeasibility = float(phase1_cost[tab.basis] @ tab.rhs)
    if infeasibility > tol * max(1.0, float(np.max(b, initial=0.0))):
        logger.debug("Phase 1 ended with infeasibility %.3e", infeasibility)
        return LpResult(status=LpStatus.INFEASIBLE, iterations=tab.iterations)

    row = 0
    while row < len(tab.basis):
        if tab.basis[row] >= n_std:
            candidates = [j for j in range(n_std) if abs(tab.T[row, j]) > tol]
            if candidates:
                tab.pivot(row, candidates[0])
            else:
                logger.debug("Dropping redundant row %d", row)
                tab.drop_row(row)
                continue
        row += 1
    tab.T = tab.T[:, :n_std]

    status = _run(tab, c, n_std, tol, limit)
    if status is LpStatus.UNBOUNDED:
        return LpResult(status=status, value=float("-inf"), iterations=tab.iterations)

    z = np.zeros(n_std)
    z[tab.basis] = tab.rhs
    u = np.zeros(lp.n_vars)
    for col, (j, sign) in enumerate(columns):
        u[j] += sign * z[col]
    u[np.abs(u) < tol] = 0.0
    result = LpResult(
        status=LpStatus.OPTIMAL,
        value=float(lp.cost @ u),
        point=u,
        residual=lp.residual(u),
        iterations=tab.iterations,
    )
    logger.debug("LP optimal value %.6g after %d pivots (residual %.2e)", result.value, result.iterations, result.residual)
    return result
