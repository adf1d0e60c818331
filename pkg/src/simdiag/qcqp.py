"""Quadratically constrained quadratic programs: homogenization, LP relaxation and the single-constraint solver.

Internal convention, with no ½ factors:

    minimize   xᵀA₀x + 2a₀ᵀx
    subject to xᵀAₗx + 2aₗᵀx + cₗ ≤ 0      (or = 0 for equality constraints)

``QcqpInstance.from_half_form`` converts data written as ½xᵀAx + aᵀx + c; ``value_scale``
maps internal objective values back to that convention.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg as la
from scipy.optimize import minimize

from .canon import UhligBlockSpec, UhligCanonicalPair, eg_rotation, uhlig_canonical
from .config import Config, resolve
from .errors import DomainError, SingularityError
from .matcore import R, block_diag, congruence, frob, is_singular, offdiag_norm
from .sequences import CongruenceSequence, evaluate
from .simplex import LpInstance, LpResult, LpStatus, solve_lp

logger = logging.getLogger("simdiag.qcqp")

ORACLE_MAX_DIM = 4
ORACLE_RADIUS = 1e3
REFINE_COUNT = 5
_PENALTY = 1e300


def _sym(M: Any, name: str, m: Optional[int], cfg: Config) -> np.ndarray:
    A = np.atleast_2d(np.asarray(M, dtype=float))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"{name} must be square, got shape {A.shape}")
    if m is not None and A.shape[0] != m:
        raise DomainError(f"{name} must be {m}x{m}, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DomainError(f"{name} has non-finite entries")
    asym = float(np.max(np.abs(A - A.T)))
    if asym > cfg.tol_sym * max(frob(A), 1.0):
        raise DomainError(f"{name} is not symmetric (max |A - Aᵀ| = {asym:.3e})")
    return (A + A.T) / 2.0


def _vec(v: Any, m: int, name: str) -> np.ndarray:
    out = np.zeros(m) if v is None else np.asarray(v, dtype=float).reshape(-1)
    if out.shape[0] != m:
        raise DomainError(f"{name} must have {m} entries, got {out.shape[0]}")
    return out


# --- instances -------------------------------------------------------------------


@dataclass(frozen=True)
class QuadraticConstraint:
    A: np.ndarray
    a: np.ndarray
    c: float
    equality: bool = False

    def value(self, x: np.ndarray) -> float:
        return float(x @ self.A @ x + 2.0 * self.a @ x + self.c)

    def to_dict(self) -> Dict[str, Any]:
        return {"A": self.A.tolist(), "a": self.a.tolist(), "c": self.c, "equality": self.equality}


@dataclass(frozen=True)
class QcqpInstance:
    A0: np.ndarray
    a0: np.ndarray
    constraints: Tuple[QuadraticConstraint, ...]
    value_scale: float = 1.0

    @classmethod
    def build(
        cls,
        A0: Any,
        a0: Optional[Any] = None,
        constraints: Sequence[Tuple[Any, Any, float]] = (),
        equalities: Optional[Sequence[bool]] = None,
        value_scale: float = 1.0,
        cfg: Optional[Config] = None,
    ) -> "QcqpInstance":
        """Constraints are (Aₗ, aₗ, cₗ) triples in the internal convention."""
        cfg = resolve(cfg)
        A0s = _sym(A0, "A0", None, cfg)
        m = A0s.shape[0]
        flags = list(equalities) if equalities is not None else [False] * len(constraints)
        if len(flags) != len(constraints):
            raise DomainError(f"Expected {len(constraints)} equality flags, got {len(flags)}")
        cons = []
        for idx, ((A, a, c), eq) in enumerate(zip(constraints, flags)):
            cons.append(
                QuadraticConstraint(
                    A=_sym(A, f"A_{idx + 1}", m, cfg), a=_vec(a, m, f"a_{idx + 1}"), c=float(c), equality=bool(eq)
                )
            )
        return cls(A0=A0s, a0=_vec(a0, m, "a0"), constraints=tuple(cons), value_scale=value_scale)

    @classmethod
    def from_half_form(
        cls,
        A0: Any,
        a0: Optional[Any] = None,
        constraints: Sequence[Tuple[Any, Any, float]] = (),
        cfg: Optional[Config] = None,
    ) -> "QcqpInstance":
        """Ingest min ½xᵀA₀x + a₀ᵀx s.t. ½xᵀAₗx + aₗᵀx + cₗ ≤ 0; reported values are halved back."""
        doubled = [(A, a, 2.0 * float(c)) for A, a, c in constraints]
        return cls.build(A0, a0, doubled, value_scale=0.5, cfg=cfg)

    @property
    def dim(self) -> int:
        return self.A0.shape[0]

    @property
    def is_homogeneous(self) -> bool:
        return not np.any(self.a0) and all(not np.any(g.a) for g in self.constraints)

    def objective(self, x: np.ndarray) -> float:
        """Objective in the caller's convention (value_scale applied)."""
        x = np.asarray(x, dtype=float)
        return self.value_scale * float(x @ self.A0 @ x + 2.0 * self.a0 @ x)

    def constraint_values(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.array([g.value(x) for g in self.constraints])

    def is_feasible(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        values = self.constraint_values(x)
        for g, v in zip(self.constraints, values):
            if (g.equality and abs(v) > tol) or v > tol:
                return False
        return True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "A0": self.A0.tolist(),
            "a0": self.a0.tolist(),
            "constraints": [g.to_dict() for g in self.constraints],
            "value_scale": self.value_scale,
        }


def homogenize(q: QcqpInstance) -> QcqpInstance:
    """Lift to dimension m+1 with Āₗ = [[Aₗ, aₗ], [aₗᵀ, cₗ]] plus the equality x²ₘ₊₁ = 1."""
    m = q.dim

    def lift(A: np.ndarray, a: np.ndarray, c: float) -> np.ndarray:
        out = np.zeros((m + 1, m + 1))
        out[:m, :m] = A
        out[:m, m] = a
        out[m, :m] = a
        out[m, m] = c
        return out

    zero = np.zeros(m + 1)
    cons = [QuadraticConstraint(A=lift(g.A, g.a, g.c), a=zero, c=0.0, equality=g.equality) for g in q.constraints]
    marker = np.zeros((m + 1, m + 1))
    marker[m, m] = 1.0
    cons.append(QuadraticConstraint(A=marker, a=zero, c=-1.0, equality=True))
    return QcqpInstance(A0=lift(q.A0, q.a0, 0.0), a0=zero, constraints=tuple(cons), value_scale=q.value_scale)


def lift_point(x: np.ndarray) -> np.ndarray:
    return np.append(np.asarray(x, dtype=float), 1.0)


def dehomogenize_point(xbar: np.ndarray) -> np.ndarray:
    """(x, t) with t = ±1 maps to t·x."""
    xbar = np.asarray(xbar, dtype=float)
    t = xbar[-1]
    if abs(t) == 0.0:
        raise DomainError("Homogeneous point has a zero last coordinate")
    return xbar[:-1] / t


# --- LP relaxation ---------------------------------------------------------------


@dataclass(frozen=True)
class LpRelaxation:
    """The diagonal part of every PₖᵀAₗPₖ as an LP over u = y², with the dropped off-diagonal mass."""

    lp: LpInstance
    P: np.ndarray
    k: float
    dropped_mass: float
    value_scale: float

    def back_map(self, u: np.ndarray) -> np.ndarray:
        y = np.sqrt(np.clip(np.asarray(u, dtype=float), 0.0, None))
        return self.P @ y


def lp_relaxation(q: QcqpInstance, seq: CongruenceSequence, k: float) -> LpRelaxation:
    if not q.is_homogeneous:
        raise DomainError("LP relaxation needs a QCQP without linear terms; homogenize it first")
    if seq.dim != q.dim:
        raise DomainError(f"Sequence dimension {seq.dim} does not match QCQP dimension {q.dim}")
    P = evaluate(seq, k)
    objective = congruence(q.A0, P)
    dropped = offdiag_norm(objective)
    ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
    for g in q.constraints:
        W = congruence(g.A, P)
        dropped += offdiag_norm(W)
        if g.equality:
            eq_rows.append(np.diag(W))
            eq_rhs.append(-g.c)
        else:
            ub_rows.append(np.diag(W))
            ub_rhs.append(-g.c)
    lp = LpInstance.build(
        np.diag(objective),
        A_ub=np.array(ub_rows) if ub_rows else None,
        b_ub=ub_rhs or None,
        A_eq=np.array(eq_rows) if eq_rows else None,
        b_eq=eq_rhs or None,
    )
    logger.debug("LP relaxation at k=%g drops off-diagonal mass %.3e", k, dropped)
    return LpRelaxation(lp=lp, P=P, k=float(k), dropped_mass=dropped, value_scale=q.value_scale)


@dataclass(frozen=True)
class RelaxationSolution:
    lp_result: LpResult
    dropped_mass: float
    k: float
    value: Optional[float] = None
    point: Optional[np.ndarray] = None
    objective_at_point: Optional[float] = None
    feasible: Optional[bool] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": "lp-relaxation",
            "status": self.lp_result.status.value,
            "k": self.k,
            "value": self.value,
            "point": None if self.point is None else self.point.tolist(),
            "objective_at_point": self.objective_at_point,
            "feasible": self.feasible,
            "dropped_mass": self.dropped_mass,
            "lp": self.lp_result.to_dict(),
            "heuristic": True,
        }


def solve_lp_relaxation(
    q: QcqpInstance, seq: CongruenceSequence, k: float, cfg: Optional[Config] = None
) -> RelaxationSolution:
    """Heuristic: exact only when the dropped off-diagonal mass is zero."""
    relax = lp_relaxation(q, seq, k)
    result = solve_lp(relax.lp, cfg)
    if result.status is not LpStatus.OPTIMAL or result.point is None:
        return RelaxationSolution(lp_result=result, dropped_mass=relax.dropped_mass, k=relax.k)
    x = relax.back_map(result.point)
    return RelaxationSolution(
        lp_result=result,
        dropped_mass=relax.dropped_mass,
        k=relax.k,
        value=q.value_scale * float(result.value),
        point=x,
        objective_at_point=q.objective(x),
        feasible=q.is_feasible(x, tol=1e-6 * max(1.0, frob(relax.P) ** 2)),
    )


# --- single-constraint problems ----------------------------------------------------


class QcqpStatus(str, Enum):
    ATTAINED = "attained"
    INFIMUM_ONLY = "infimum-only"
    UNBOUNDED_BELOW = "unbounded-below"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class SingleConstraintProblem:
    """min xᵀBx s.t. xᵀAx ≤ b with A nonsingular."""

    B: np.ndarray
    A: np.ndarray
    b: float

    @classmethod
    def build(cls, B: Any, A: Any, b: float, cfg: Optional[Config] = None) -> "SingleConstraintProblem":
        cfg = resolve(cfg)
        As = _sym(A, "A", None, cfg)
        Bs = _sym(B, "B", As.shape[0], cfg)
        if not np.isfinite(b):
            raise DomainError(f"b must be finite, got {b}")
        if is_singular(As, cfg):
            raise SingularityError("The constraint matrix A must be nonsingular")
        return cls(B=Bs, A=As, b=float(b))

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def objective(self, x: np.ndarray) -> float:
        return float(x @ self.B @ x)

    def constraint(self, x: np.ndarray) -> float:
        return float(x @ self.A @ x)

    def as_instance(self) -> QcqpInstance:
        return QcqpInstance(
            A0=self.B,
            a0=np.zeros(self.dim),
            constraints=(QuadraticConstraint(A=self.A, a=np.zeros(self.dim), c=-self.b),),
        )


@dataclass(frozen=True)
class CanonicalProblem:
    """The problem in the canonical basis x = P·y: X = PᵀAP and Y = PᵀBP are block diagonal."""

    form: UhligCanonicalPair
    b: float

    @property
    def blocks(self) -> Tuple[UhligBlockSpec, ...]:
        return self.form.blocks

    def scaling(self, k: float) -> np.ndarray:
        return block_diag(*(R(k, blk.size) for blk in self.blocks))

    def objective_at(self, k: float) -> np.ndarray:
        """R̃ₖᵀYR̃ₖ; the constraint form X is invariant under the same scaling."""
        Rk = self.scaling(k)
        return Rk @ self.form.target_b() @ Rk

    def limit_objective(self) -> np.ndarray:
        """B̂ = Diag{σλE(size)}, the k → ∞ limit of objective_at(k) for real blocks of size ≤ 2."""
        return block_diag(*(blk.re * blk.x_block() for blk in self.blocks))


@dataclass(frozen=True)
class SingleConstraintSolution:
    status: QcqpStatus
    value: Optional[float] = None
    point: Optional[np.ndarray] = None
    structural: bool = False
    blocks: Tuple[UhligBlockSpec, ...] = ()
    lp_result: Optional[LpResult] = None
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        if self.status is QcqpStatus.UNBOUNDED_BELOW:
            value: Any = "-inf"
        else:
            value = self.value
        return {
            "mode": "single-constraint",
            "status": self.status.value,
            "value": value,
            "point": None if self.point is None else self.point.tolist(),
            "structural": self.structural,
            "blocks": [blk.to_dict() for blk in self.blocks],
            "lp": None if self.lp_result is None else self.lp_result.to_dict(),
            "notes": list(self.notes),
        }


def bounded_structure_violations(blocks: Sequence[UhligBlockSpec]) -> List[str]:
    """Reasons the canonical blocks rule out a finite value when a strictly feasible point exists."""
    reasons = []
    for idx, blk in enumerate(blocks):
        if not blk.is_real:
            reasons.append(f"block {idx} has complex eigenvalue {blk.eigenvalue}")
        elif blk.size > 2:
            reasons.append(f"block {idx} has size {blk.size} > 2")
        elif blk.size == 2 and blk.sign != 1:
            reasons.append(f"2-block {idx} has sign {blk.sign}")
        elif blk.size == 2 and blk.re > 0:
            reasons.append(f"2-block {idx} has positive eigenvalue {blk.re:g}")
    return reasons


def _limit_lp(blocks: Sequence[UhligBlockSpec], b: float, tie_pairs: bool) -> LpInstance:
    """LP in u = w² after the 2-blocks are rotated onto G(2); ``tie_pairs`` forces u₁ = u₂ on each 2-block."""
    cons, cost = [], []
    for blk in blocks:
        s = float(blk.sign or 1)
        if blk.size == 1:
            cons.append(s)
            cost.append(s * blk.re)
        else:
            cons.extend([1.0, -1.0])
            cost.extend([blk.re, -blk.re])
    n = len(cost)
    ties = []
    if tie_pairs:
        col = 0
        for blk in blocks:
            if blk.size == 2:
                row = np.zeros(n)
                row[col], row[col + 1] = 1.0, -1.0
                ties.append(row)
            col += blk.size
    return LpInstance.build(
        cost, A_ub=[cons], b_ub=[b], A_eq=np.array(ties) if ties else None, b_eq=[0.0] * len(ties) or None
    )


def _point_from_lp(canon: CanonicalProblem, u: np.ndarray) -> np.ndarray:
    w = np.sqrt(np.clip(u, 0.0, None))
    pieces, col = [], 0
    for blk in canon.blocks:
        if blk.size == 1:
            pieces.append(w[col : col + 1])
        else:
            pieces.append(eg_rotation(2) @ w[col : col + 2])
        col += blk.size
    return canon.form.transform @ np.concatenate(pieces)


def _definite_fast_path(p: SingleConstraintProblem, cfg: Config) -> Optional[SingleConstraintSolution]:
    eigs = la.eigvalsh(p.A)
    if eigs[0] <= cfg.tol_pd * max(1.0, float(np.max(np.abs(eigs)))):
        return None
    if p.b == 0.0:
        return SingleConstraintSolution(
            status=QcqpStatus.ATTAINED,
            value=0.0,
            point=np.zeros(p.dim),
            notes=["A is positive definite and b = 0: the feasible set is the origin"],
        )
    if p.b < 0.0:
        return SingleConstraintSolution(status=QcqpStatus.INFEASIBLE, notes=["A is positive definite and b < 0"])
    return None


def solve_single_constraint(p: SingleConstraintProblem, cfg: Optional[Config] = None) -> SingleConstraintSolution:
    cfg = resolve(cfg)
    fast = _definite_fast_path(p, cfg)
    if fast is not None:
        logger.info("Single-constraint fast path: %s", fast.status.value)
        return fast

    canon = CanonicalProblem(form=uhlig_canonical(p.A, p.B, cfg), b=p.b)
    violations = bounded_structure_violations(canon.blocks)
    if violations:
        logger.info("Canonical structure rules out a finite value: %s", "; ".join(violations))
        return SingleConstraintSolution(
            status=QcqpStatus.UNBOUNDED_BELOW, structural=True, blocks=canon.blocks, notes=violations
        )

    lp = solve_lp(_limit_lp(canon.blocks, p.b, tie_pairs=False), cfg)
    if lp.status is LpStatus.INFEASIBLE:
        return SingleConstraintSolution(status=QcqpStatus.INFEASIBLE, blocks=canon.blocks, lp_result=lp)
    if lp.status is LpStatus.UNBOUNDED:
        return SingleConstraintSolution(
            status=QcqpStatus.UNBOUNDED_BELOW, blocks=canon.blocks, lp_result=lp, notes=["limit LP is unbounded"]
        )

    value = float(lp.value)
    tied = solve_lp(_limit_lp(canon.blocks, p.b, tie_pairs=True), cfg)
    tol = 1e-9 * max(1.0, abs(value))
    if tied.status is LpStatus.OPTIMAL and tied.point is not None and abs(float(tied.value) - value) <= tol:
        x = _point_from_lp(canon, tied.point)
        return SingleConstraintSolution(
            status=QcqpStatus.ATTAINED, value=value, point=x, blocks=canon.blocks, lp_result=lp
        )
    return SingleConstraintSolution(
        status=QcqpStatus.INFIMUM_ONLY,
        value=value,
        blocks=canon.blocks,
        lp_result=lp,
        notes=["every minimizer of the limit problem escapes to infinity along a 2-block"],
    )


# --- brute-force oracle ------------------------------------------------------------


@dataclass(frozen=True)
class OracleResult:
    value: float
    point: Optional[np.ndarray]
    suspected_unbounded: bool
    evaluations: int
    exhausted: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "point": None if self.point is None else self.point.tolist(),
            "suspected_unbounded": self.suspected_unbounded,
            "evaluations": self.evaluations,
            "exhausted": self.exhausted,
        }


def _ray_value(q: float, a: float, b: float, cap: float) -> Tuple[float, float]:
    """Minimum of s·q over s ∈ [0, cap] with s·a ≤ b; returns (value, s) or (inf, nan) if no s."""
    lo, hi = 0.0, cap
    if a > 0.0:
        hi = min(hi, b / a)
    elif a < 0.0:
        lo = max(lo, b / a)
    elif b < 0.0:
        return np.inf, np.nan
    if lo > hi:
        return np.inf, np.nan
    s = hi if q < 0.0 else lo
    return s * q, s


def _direction_samples(m: int, count: int, rng: np.random.Generator) -> np.ndarray:
    fixed = list(np.eye(m))
    for i in range(m):
        for j in range(i + 1, m):
            for sign in (1.0, -1.0):
                d = np.zeros(m)
                d[i], d[j] = 1.0, sign
                fixed.append(d / np.sqrt(2.0))
    random = rng.standard_normal((max(count - len(fixed), 0), m))
    samples = np.vstack([np.array(fixed), random]) if len(random) else np.array(fixed)
    return samples / np.linalg.norm(samples, axis=1, keepdims=True)


def _has_escape_ray(p: SingleConstraintProblem, directions: Sequence[np.ndarray]) -> bool:
    """True when some direction lowers the objective while the constraint never binds along it."""
    tiny = 1e-9 * max(frob(p.B), 1e-300)
    for d in directions:
        norm = float(np.linalg.norm(d))
        if norm == 0.0:
            continue
        u = d / norm
        q, a = float(u @ p.B @ u), float(u @ p.A @ u)
        if q < -tiny and (a < 0.0 or (a == 0.0 and p.b >= 0.0)):
            return True
    return False


def _single_oracle(p: SingleConstraintProblem, budget: int, radius: float, rng: np.random.Generator) -> OracleResult:
    m = p.dim

    def ray(d: np.ndarray, cap: float) -> Tuple[float, float]:
        norm = float(np.linalg.norm(d))
        if norm == 0.0:
            return (0.0, 0.0) if p.b >= 0.0 else (np.inf, np.nan)
        u = d / norm
        return _ray_value(float(u @ p.B @ u), float(u @ p.A @ u), p.b, cap)

    cap = radius**2
    dirs = _direction_samples(m, budget, rng)
    scored = sorted(((ray(d, cap)[0], idx) for idx, d in enumerate(dirs)), key=lambda t: t[0])
    evaluations = len(dirs)
    candidates = list(dirs)
    best_val, best_dir = np.inf, None
    if p.b >= 0.0:
        best_val, best_dir = 0.0, None
    for val, idx in scored[:REFINE_COUNT]:
        if not np.isfinite(val):
            continue
        res = minimize(
            lambda d: min(ray(d, cap)[0], _PENALTY),
            dirs[idx],
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 400 * m},
        )
        evaluations += int(res.nfev)
        candidates.append(np.asarray(res.x, dtype=float))
        for cand in (dirs[idx], res.x):
            v = ray(cand, cap)[0]
            if v < best_val:
                best_val, best_dir = v, cand / np.linalg.norm(cand)

    if not np.isfinite(best_val):
        return OracleResult(value=np.inf, point=None, suspected_unbounded=False, evaluations=evaluations, exhausted=True)
    point = np.zeros(m)
    suspected = False
    if best_dir is not None:
        _, s = ray(best_dir, cap)
        point = np.sqrt(s) * best_dir
    # the best direction may be capped by the constraint while another one keeps falling
    wider = min(ray(d, 4.0 * cap)[0] for d in candidates)
    evaluations += len(candidates)
    suspected = bool(wider < best_val - 1e-6 * max(1.0, abs(best_val))) or _has_escape_ray(p, candidates)
    return OracleResult(value=float(best_val), point=point, suspected_unbounded=suspected, evaluations=evaluations)


def _general_oracle(q: QcqpInstance, budget: int, radius: float, rng: np.random.Generator) -> OracleResult:
    m = q.dim

    def run(cap: float, starts: np.ndarray) -> Tuple[float, Optional[np.ndarray], int]:
        constraints: List[Dict[str, Any]] = [{"type": "ineq", "fun": lambda x, c=cap: c**2 - x @ x}]
        for g in q.constraints:
            kind = "eq" if g.equality else "ineq"
            constraints.append({"type": kind, "fun": (lambda x, g=g: g.value(x)) if g.equality else (lambda x, g=g: -g.value(x))})
        best, best_x, nfev = np.inf, None, 0
        for x0 in starts:
            res = minimize(
                lambda x: float(x @ q.A0 @ x + 2.0 * q.a0 @ x),
                x0,
                jac=lambda x: 2.0 * (q.A0 @ x + q.a0),
                method="SLSQP",
                constraints=constraints,
                options={"maxiter": 200, "ftol": 1e-12},
            )
            nfev += int(res.nfev)
            x = res.x
            if x @ x > cap**2 * (1 + 1e-6) or not q.is_feasible(x, tol=1e-6 * max(1.0, float(x @ x))):
                continue
            v = float(x @ q.A0 @ x + 2.0 * q.a0 @ x)
            if v < best:
                best, best_x = v, x
        return best, best_x, nfev

    n_starts = max(8, budget // 10)
    starts = rng.standard_normal((n_starts, m)) * rng.uniform(0.1, 2.0, size=(n_starts, 1))
    best, x, nfev = run(radius, starts)
    if x is None:
        return OracleResult(value=np.inf, point=None, suspected_unbounded=False, evaluations=nfev, exhausted=True)
    wider, _, more = run(2.0 * radius, np.vstack([2.0 * x, starts]))
    suspected = wider < best - 1e-6 * max(1.0, abs(best))
    return OracleResult(
        value=q.value_scale * best,
        point=x,
        suspected_unbounded=suspected,
        evaluations=nfev + more,
    )


def brute_force_qcqp_oracle(
    p: Union[SingleConstraintProblem, QcqpInstance],
    budget: Optional[int] = None,
    cfg: Optional[Config] = None,
    radius: float = ORACLE_RADIUS,
) -> OracleResult:
    """Sampled global search inside ‖x‖ ≤ radius; flags values that keep falling when the radius doubles."""
    cfg = resolve(cfg)
    budget = cfg.oracle_budget if budget is None else int(budget)
    # homogenized instances carry one extra coordinate
    limit = ORACLE_MAX_DIM if isinstance(p, SingleConstraintProblem) else ORACLE_MAX_DIM + 1
    dim = p.dim
    if dim > limit:
        raise DomainError(f"The oracle supports m <= {ORACLE_MAX_DIM}, got m={dim}")
    rng = np.random.default_rng(cfg.seed)
    if isinstance(p, SingleConstraintProblem):
        result = _single_oracle(p, budget, radius, rng)
    else:
        result = _general_oracle(p, budget, radius, rng)
    logger.debug("Oracle value %.6g (suspected unbounded: %s)", result.value, result.suspected_unbounded)
    return result
