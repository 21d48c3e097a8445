from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Runtime knobs, read from TY_* environment variables or a local .env file."""

    model_config = SettingsConfigDict(env_prefix="TY_", env_file=".env", extra="ignore")

    # caps every enumeration of groups and forms (TY_MAX_ORDER)
    max_order: int = Field(500, ge=1)
    bruteforce_bound: int = Field(250, ge=1)
    pentagon_bound: int = Field(16, ge=1)
    enumeration_limit: int = Field(200_000, ge=1)
    materialize_limit: int = Field(10_000, ge=1)
    snap_tolerance: float = Field(1e-6, gt=0)
    numeric_tolerance: float = Field(1e-9, gt=0)
    # selftest worker processes; 0 means one per core
    workers: int = Field(0, ge=0)
    log_level: str = "WARNING"


@lru_cache(maxsize=1)
def get_settings():
    return Settings()
