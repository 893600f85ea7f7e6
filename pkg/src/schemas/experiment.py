"""
Experiment configuration schemas.

A config file holds the command-specific fields below; CLI flags override
them. After the command is known the merged dict is validated against the
command's model via ``validate_command_config()``.
"""
from __future__ import annotations

import logging
from typing import List, Optional

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

logger = logging.getLogger(__name__)

VALID_COMMANDS = frozenset({"map-optimize", "flow-optimize", "reduce", "lorenz", "selftest"})


class ExperimentConfig(BaseModel):
    """Fields shared by every command."""
    command: str
    out: str = Field(default="out", min_length=1)
    seed: int = 0
    tol: float = Field(default=1e-9, gt=0)
    exact_tol: float = Field(default=1e-12, gt=0)
    quad_nodes: int = Field(default=16, ge=2, le=512)
    quad_tol: float = Field(default=1e-8, gt=0)
    beta: float = Field(default=0.5, gt=0, lt=1)
    p_max: Optional[int] = Field(default=None, ge=1)
    base_dir: str = "."


class MapOptimizeConfig(ExperimentConfig):
    sft: str
    potential: str


class FlowOptimizeConfig(ExperimentConfig):
    sft: Optional[str] = None
    potential: str
    roof: Optional[str] = None
    suspension: Optional[str] = None

    @model_validator(mode="after")
    def _roof_source(self):
        if self.suspension is None and (self.sft is None or self.roof is None):
            raise ValueError("give either 'suspension' or both 'sft' and 'roof'")
        return self


class ReduceConfig(ExperimentConfig):
    sft: str
    potential: str
    verify_period: int = Field(default=6, ge=1, le=16)


class LorenzConfig(ExperimentConfig):
    gamma: float = 0.75
    a: float = 0.95
    lambda_y: float = 0.5
    lambda1: float = 1.0
    s0: float = 1.0
    lambda2: Optional[float] = None
    lambda3: Optional[float] = None
    epsilon_grid: List[float] = Field(default_factory=lambda: [0.3, 0.1, 0.03, 0.01, 0.003], min_length=1)
    observables: List[str] = Field(
        default_factory=lambda: ["constant", "log_singular", "bump", "bump_spike"], min_length=1)
    dirac_eps: float = Field(default=0.1, gt=0, lt=1)

    @field_validator("epsilon_grid")
    @classmethod
    def _strictly_decreasing(cls, v: List[float]) -> List[float]:
        if any(e < 0 for e in v):
            raise ValueError("epsilon values must be non-negative")
        if any(b >= a for a, b in zip(v, v[1:])):
            raise ValueError("epsilon grid must be strictly decreasing")
        return v


class SelftestConfig(ExperimentConfig):
    scale: float = Field(default=1.0, gt=0, le=1.0)


_COMMAND_SCHEMAS: dict[str, type[ExperimentConfig]] = {
    "map-optimize": MapOptimizeConfig,
    "flow-optimize": FlowOptimizeConfig,
    "reduce": ReduceConfig,
    "lorenz": LorenzConfig,
    "selftest": SelftestConfig,
}


def validate_command_config(command: str, raw: dict) -> tuple[bool, ExperimentConfig | str]:
    """
    Validate *raw* against the schema for *command*.

    Returns ``(True, model)`` on success or ``(False, error_message)``.
    """
    schema = _COMMAND_SCHEMAS.get(command)
    if schema is None:
        return False, f"Unknown command: {command}"

    try:
        return True, schema(**{**raw, "command": command})
    except ValidationError as exc:
        errors = "; ".join(
            f"{'.'.join(str(l) for l in e['loc'])}: {e['msg']}"
            for e in exc.errors()
        )
        logger.info("config_validation_failed | command=%s | errors=%s", command, errors)
        return False, f"Invalid config for '{command}': {errors}"
