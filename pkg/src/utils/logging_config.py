"""
Structured JSON logging configuration for ergopt.

Every record is one JSON line in the run log (``ergopt.log`` by default);
WARNING and above are echoed to stderr in the same form.

Usage::

    from src.utils.logging_config import get_logger

    logger = get_logger(__name__)
    logger.info("curve computed", extra={"event_type": "lorenz_curve", "metadata": {"points": 5}})

Command handlers wrap the raw logger so the command name and seed travel
with every record::

    logger = RunAdapter(get_logger("ergopt.commands"), command="lorenz", seed=7)
    logger.info("orbit search started")

Library modules under ``src/dynamics`` use ``logging.getLogger(__name__)``
and never configure handlers themselves.
"""
from __future__ import annotations

import json
import logging
import sys
from datetime import datetime, timezone
from typing import Any, MutableMapping

import numpy as np

_RECORD_FIELDS = ("command", "seed", "event_type", "duration_ms", "metadata")


def _json_default(obj: Any) -> Any:
    # numpy scalars and arrays show up in metadata from the solvers
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    return str(obj)


class JSONFormatter(logging.Formatter):
    """One JSON object per record."""

    def format(self, record: logging.LogRecord) -> str:
        entry: dict[str, Any] = {
            "ts": datetime.now(timezone.utc).isoformat(timespec="milliseconds"),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        entry.update({k: getattr(record, k) for k in _RECORD_FIELDS if getattr(record, k, None) is not None})
        if record.exc_info and record.exc_info[0] is not None:
            entry["exception"] = self.formatException(record.exc_info)
        return json.dumps(entry, default=_json_default)


class _StderrHandler(logging.StreamHandler):
    """Writes to whatever ``sys.stderr`` is at emit time."""

    @property
    def stream(self):
        return sys.stderr

    @stream.setter
    def stream(self, _value):
        pass


class RunAdapter(logging.LoggerAdapter):
    """Injects ``command`` and ``seed`` into every record."""

    def __init__(self, logger: logging.Logger, command: str, seed: int | None = None):
        super().__init__(logger, {"command": command, "seed": seed})

    def process(self, msg: str, kwargs: MutableMapping[str, Any]) -> tuple[str, MutableMapping[str, Any]]:
        kwargs.setdefault("extra", {}).update(self.extra)
        return msg, kwargs


# ---------------------------------------------------------------------------
# Setup
# ---------------------------------------------------------------------------

# Loggers that share the handlers: CLI/commands under ``ergopt``, the library under ``src``.
_NAMESPACES = ("ergopt", "src")
_handlers: list[logging.Handler] = []


def setup_logging(log_file: str | None = None, level: int | str | None = None) -> None:
    """Attach the JSON handlers. Only the first call after a reset has effect.

    Defaults come from :func:`src.config.get_settings`.
    """
    if _handlers:
        return

    from src.config import get_settings
    settings = get_settings()
    log_file = log_file or settings.log_file
    level = level or settings.log_level

    formatter = JSONFormatter()
    fh = logging.FileHandler(log_file, encoding="utf-8")
    sh = _StderrHandler()
    sh.setLevel(logging.WARNING)
    for h in (fh, sh):
        h.setFormatter(formatter)
        _handlers.append(h)

    for name in _NAMESPACES:
        logger = logging.getLogger(name)
        logger.setLevel(level)
        logger.propagate = False
        for h in _handlers:
            logger.addHandler(h)


def reset_logging() -> None:
    """Detach and close the handlers so the next setup picks up new settings."""
    for name in _NAMESPACES:
        logger = logging.getLogger(name)
        for h in _handlers:
            logger.removeHandler(h)
    for h in _handlers:
        h.close()
    _handlers.clear()


def get_logger(name: str = "ergopt") -> logging.Logger:
    """A logger under the ``ergopt`` namespace; sets up logging on first use."""
    setup_logging()
    return logging.getLogger(name if name.startswith("ergopt") else f"ergopt.{name}")
