from __future__ import annotations

import pydantic
import pytest

from simdiag.config import Config, parse_tol_flags
from simdiag.errors import UsageError


def test_defaults_are_declared() -> None:
    cfg = Config()
    assert cfg.tol_pivot == 1e-10
    assert "sym" in Config.tolerance_names()
    assert "pivot" in Config.tolerance_names()


def test_parse_tol_flags() -> None:
    assert parse_tol_flags(["--tol.det=1e-12", "--tol.sym=1e-6"]) == {"tol_det": 1e-12, "tol_sym": 1e-6}


def test_parse_tol_flags_rejects_unknown_name() -> None:
    with pytest.raises(UsageError, match="Expected one of"):
        parse_tol_flags(["--tol.bogus=1"])


def test_parse_tol_flags_needs_a_value() -> None:
    with pytest.raises(UsageError):
        parse_tol_flags(["--tol.det"])


def test_tolerances_must_lie_in_unit_interval() -> None:
    with pytest.raises(pydantic.ValidationError):
        Config(tol_det=0.0)
    with pytest.raises(pydantic.ValidationError):
        Config().with_overrides(tol_sym=2.0)


def test_sources_merge_in_order(tmp_path) -> None:
    path = tmp_path / "tol.yaml"
    path.write_text("tol_det: 1.0e-7\ntol_sym: 1.0e-7\nseed: 5\n")
    cfg = Config.from_sources(path, env={"SIMDIAG_TOL_SYM": "1e-5"}, overrides={"tol_pd": 1e-4})
    assert cfg.tol_det == 1e-7, "YAML value should apply"
    assert cfg.tol_sym == 1e-5, "environment should override YAML"
    assert cfg.tol_pd == 1e-4
    assert cfg.seed == 5


def test_config_is_frozen() -> None:
    with pytest.raises(pydantic.ValidationError):
        Config().tol_det = 1e-3  # type: ignore[misc]
