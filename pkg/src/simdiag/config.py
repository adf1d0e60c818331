"""Tolerance and search-budget configuration."""
from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .errors import UsageError

logger = logging.getLogger("simdiag.config")

ENV_PREFIX = "SIMDIAG_TOL_"
SEED_ENV = "SIMDIAG_SEED"
TOL_FLAG_PREFIX = "--tol."


class Config(BaseModel):
    """Declared thresholds for every numerical decision."""

    model_config = ConfigDict(frozen=True)

    tol_sym: float = Field(default=1e-9, description="Asymmetry threshold relative to the Frobenius norm")
    tol_det: float = Field(default=1e-10, description="Determinant threshold relative to the norm scale")
    tol_pd: float = Field(default=1e-9, description="Smallest-eigenvalue threshold for definiteness")
    tol_eig: float = Field(default=1e-6, description="Imaginary-part and magnitude threshold relative to spectral radius")
    tol_cluster: float = Field(default=1e-3, description="Single-linkage radius for eigenvalue clusters, relative")
    tol_rank: float = Field(default=1e-8, description="Relative singular-value cutoff for numerical rank")
    tol_jordan: float = Field(default=1e-6, description="Accepted Jordan reconstruction residual")
    tol_canon: float = Field(default=1e-7, description="Canonical-form pairing threshold")
    tol_comm: float = Field(default=1e-8, description="Relative threshold for vanishing commutators")
    tol_diag: float = Field(default=1e-8, description="Relative off-diagonal threshold for diagonality")
    tol_fact: float = Field(default=1e-10, description="Accepted factorization residual, relative")
    tol_pivot: float = Field(default=1e-10, description="Simplex pivot tolerance")
    n_pencil: int = Field(default=256, ge=1, description="Random pencil samples for sets of three or more")
    n_theta: int = Field(default=720, ge=8, description="Angular grid size for definite-pencil search")
    seed: int = Field(default=0, description="Seed for every pseudorandom search")
    oracle_budget: int = Field(default=400, ge=10, description="Direction samples for the QCQP oracle")

    @field_validator(
        "tol_sym",
        "tol_det",
        "tol_pd",
        "tol_eig",
        "tol_cluster",
        "tol_rank",
        "tol_jordan",
        "tol_canon",
        "tol_comm",
        "tol_diag",
        "tol_fact",
        "tol_pivot",
    )
    @classmethod
    def tolerance_positive(cls, v: float) -> float:
        if not (v > 0.0 and v < 1.0):
            raise ValueError(f"Tolerances must lie in (0, 1), got {v}")
        return v

    @classmethod
    def tolerance_names(cls) -> list[str]:
        return [name[len("tol_"):] for name in cls.model_fields if name.startswith("tol_")]

    def with_overrides(self, **updates: Any) -> "Config":
        """Return a validated copy with the given fields replaced."""
        merged = {**self.model_dump(), **updates}
        return Config(**merged)

    @classmethod
    def from_sources(
        cls,
        yaml_path: Optional[Path] = None,
        env: Optional[Mapping[str, str]] = None,
        overrides: Optional[Dict[str, Any]] = None,
    ) -> "Config":
        """Merge defaults < YAML file < environment < explicit overrides."""
        values: Dict[str, Any] = {}
        if yaml_path is not None:
            values.update(_load_yaml(yaml_path))
        values.update(_from_env(os.environ if env is None else env))
        values.update(overrides or {})
        logger.debug("Config sources merged: %s", sorted(values))
        return cls(**values)


def _load_yaml(path: Path) -> Dict[str, Any]:
    raw = yaml.safe_load(Path(path).read_text()) or {}
    if not isinstance(raw, dict):
        raise UsageError(f"Config file {path} must contain a mapping, got {type(raw).__name__}")
    unknown = [key for key in raw if key not in Config.model_fields]
    if unknown:
        raise UsageError(f"Unknown config keys {unknown}. Expected any of {sorted(Config.model_fields)}")
    return dict(raw)


def _from_env(env: Mapping[str, str]) -> Dict[str, Any]:
    values: Dict[str, Any] = {}
    for name in Config.tolerance_names():
        raw = env.get(f"{ENV_PREFIX}{name.upper()}")
        if raw is not None and raw.strip():
            values[f"tol_{name}"] = float(raw)
    seed = env.get(SEED_ENV)
    if seed is not None and seed.strip():
        values["seed"] = int(seed)
    return values


def parse_tol_flags(tokens: Iterable[str]) -> Dict[str, float]:
    """Parse ``--tol.NAME=value`` tokens into Config field updates."""
    valid = Config.tolerance_names()
    updates: Dict[str, float] = {}
    for token in tokens:
        body = token[len(TOL_FLAG_PREFIX):] if token.startswith(TOL_FLAG_PREFIX) else token
        name, sep, raw = body.partition("=")
        if not sep:
            raise UsageError(f"Tolerance override '{token}' must look like --tol.NAME=value")
        name = name.strip().lower()
        if name not in valid:
            raise UsageError(f"Invalid tolerance '{name}'. Expected one of {valid}")
        try:
            updates[f"tol_{name}"] = float(raw)
        except ValueError as exc:
            raise UsageError(f"Tolerance '{name}' needs a number, got '{raw}'") from exc
    return updates


def resolve(cfg: Optional[Config]) -> Config:
    return cfg if cfg is not None else Config()
