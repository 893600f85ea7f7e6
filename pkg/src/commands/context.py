"""Per-run state shared by command handlers."""

from __future__ import annotations

import dataclasses
import logging
from pathlib import Path

from src.config import Settings
from src.schemas.experiment import ExperimentConfig


@dataclasses.dataclass
class RunContext:
    """Bundles what a command handler needs.

    Created once per invocation in ``cli.py`` after the config validated.
    """
    config: ExperimentConfig
    settings: Settings              # env settings with config overrides applied
    out_dir: Path
    logger: logging.LoggerAdapter
    outputs: list[str] = dataclasses.field(default_factory=list)

    @property
    def seed(self) -> int:
        return self.config.seed

    def resolve(self, path: str) -> Path:
        """Input paths are relative to the config file's directory."""
        p = Path(path)
        return p if p.is_absolute() else Path(self.config.base_dir) / p

    def output(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        self.outputs.append(str(path))
        return path
