from __future__ import annotations

from pydantic_settings import BaseSettings, SettingsConfigDict
from functools import lru_cache

class Settings(BaseSettings):
    # Worker pool cap for ε-grid points and orbit searches (ERGOPT_THREADS)
    threads: int = 4

    # Solver self-check tolerance (ratio zero condition, certificate residuals)
    tol: float = 1e-9
    # Cycle-average identities (coboundary invariance, block conjugacy)
    exact_tol: float = 1e-12

    # Base metric d_beta on two-sided sequences
    beta: float = 0.5

    # Gauss–Legendre nodes per fiber; the error estimate doubles this
    quad_nodes: int = 16
    quad_tol: float = 1e-8

    # Upper bound on words visited by periodic-orbit enumeration
    orbit_budget: int = 5_000_000

    # Largest period accepted by the Lorenz orbit enumeration
    lorenz_p_limit: int = 16

    # Ratio-cycle iteration cap. Optima sit on cycles, so it normally
    # stops after a handful of steps.
    bisection_max_iter: int = 200

    # Validation grid for alpha' > sqrt(2) on [1e-6, 1]
    lorenz_grid_points: int = 10_000

    # Validity threshold |x| <= xbar for the roof comparability constants
    roof_xbar: float = 0.5

    log_file: str = "ergopt.log"
    log_level: str = "INFO"

    model_config = SettingsConfigDict(env_file=".env", env_prefix="ERGOPT_", extra="ignore")

@lru_cache
def _env_settings() -> Settings:
    return Settings()

_override: Settings | None = None

def get_settings() -> Settings:
    return _override if _override is not None else _env_settings()

def override_settings(**updates) -> Settings:
    """Layer per-run values (CLI flags, config file) over the environment."""
    global _override
    _override = _env_settings().model_copy(update=updates)
    return _override

def reset_settings() -> None:
    global _override
    _override = None
    _env_settings.cache_clear()
