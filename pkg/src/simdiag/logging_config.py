from __future__ import annotations

import logging
import os
import sys
from typing import IO, Optional

LOG_FORMAT = "[%(asctime)s] %(levelname)s %(name)s: %(message)s"
PACKAGE_PREFIX = "simdiag"


class _PackageFilter(logging.Filter):
    """Everything from our own loggers; only warnings and worse from numpy/scipy and friends."""

    def __init__(self, prefix: str = PACKAGE_PREFIX) -> None:
        super().__init__()
        self.prefix = prefix

    def filter(self, record: logging.LogRecord) -> bool:
        if record.name.startswith(self.prefix) or record.name == "py.warnings":
            return True
        return record.levelno >= logging.WARNING


def level_from_name(name: Optional[str]) -> int:
    """Map a level name to its number; empty or unknown names mean INFO."""
    value = logging.getLevelName((name or "").strip().upper())
    return value if isinstance(value, int) else logging.INFO


def configure_logging(level: Optional[str] = None, stream: Optional[IO[str]] = None) -> int:
    """Install the process-wide handler. ``level`` wins over ``LOG_LEVEL``; output goes to stderr."""
    root_level = level_from_name(level or os.getenv("LOG_LEVEL"))
    handler = logging.StreamHandler(stream or sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler.addFilter(_PackageFilter())

    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(root_level)
    # RuntimeWarnings from ill-conditioned solves land in the log
    logging.captureWarnings(True)
    return root_level
