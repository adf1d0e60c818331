from __future__ import annotations

from pathlib import Path

import pytest

from simdiag.config import Config

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture
def cfg() -> Config:
    return Config()


@pytest.fixture
def corpus_dir() -> Path:
    return ROOT / "corpus"
