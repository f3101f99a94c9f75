from __future__ import annotations

import logging
import math
from functools import lru_cache
from typing import Any

from pydantic import Field, field_validator
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
)

_LOG_LEVELS = {"CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG"}
_DEFAULT_WITNESS_MARGIN = 0.1


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        populate_by_name=True,
    )

    tol_fact: float = Field(default=1e-12, alias="POWERLIM_TOL_FACT")
    herm_tol: float = Field(default=1e-10, alias="POWERLIM_HERM_TOL")
    psd_tol: float = Field(default=1e-10, alias="POWERLIM_PSD_TOL")
    sep_rel_tol: float = Field(default=1e-8, alias="POWERLIM_SEP_REL_TOL")
    max_iter_factor: int = Field(default=30, alias="POWERLIM_MAX_ITER_FACTOR")
    cluster_rel_tol: float = Field(default=1e-8, alias="POWERLIM_CLUSTER_REL_TOL")
    cluster_tol: float | None = Field(default=None, alias="POWERLIM_CLUSTER_TOL")
    jc_tol: float = Field(default=1e-8, alias="POWERLIM_JC_TOL")
    flag_tol: float = Field(default=1e-8, alias="POWERLIM_FLAG_TOL")
    mem_tol: float = Field(default=1e-6, alias="POWERLIM_MEM_TOL")
    check_tol: float = Field(default=1e-9, alias="POWERLIM_CHECK_TOL")
    iterations: int = Field(default=20, alias="POWERLIM_K")
    grade_gap: float = Field(default=36.0, alias="POWERLIM_GRADE_GAP")
    witness_margin: float = Field(default=_DEFAULT_WITNESS_MARGIN, alias="POWERLIM_WITNESS_MARGIN")
    trajectory_levels: int = Field(default=10, alias="POWERLIM_TRAJECTORY_LEVELS")
    seed: int = Field(default=42, alias="POWERLIM_SEED")
    suite_instances: int = Field(default=200, alias="POWERLIM_SUITE_INSTANCES")
    suite_min_dim: int = Field(default=2, alias="POWERLIM_SUITE_MIN_DIM")
    suite_max_dim: int = Field(default=8, alias="POWERLIM_SUITE_MAX_DIM")
    suite_workers: int = Field(default=1, alias="POWERLIM_SUITE_WORKERS")
    log_level: str = Field(default="WARNING", alias="POWERLIM_LOG_LEVEL")

    @field_validator(
        "tol_fact",
        "herm_tol",
        "psd_tol",
        "sep_rel_tol",
        "cluster_rel_tol",
        "jc_tol",
        "flag_tol",
        "mem_tol",
        "check_tol",
    )
    @classmethod
    def validate_tolerance(cls, value: float) -> float:
        return max(0.0, float(value))

    @field_validator("witness_margin")
    @classmethod
    def validate_witness_margin(cls, value: float) -> float:
        # ρ < h < ω needs a strictly positive margin
        value = float(value)
        if not math.isfinite(value) or value <= 0:
            return _DEFAULT_WITNESS_MARGIN
        return value

    @field_validator("cluster_tol", mode="before")
    @classmethod
    def parse_cluster_tol(cls, value: Any) -> float | None:
        if value in (None, ""):
            return None
        return max(0.0, float(value))

    @field_validator("max_iter_factor", "suite_workers")
    @classmethod
    def validate_positive(cls, value: int) -> int:
        return max(1, value)

    @field_validator("iterations", "trajectory_levels", "suite_instances")
    @classmethod
    def validate_count(cls, value: int) -> int:
        return max(0, value)

    @field_validator("suite_min_dim", "suite_max_dim")
    @classmethod
    def validate_dimension(cls, value: int) -> int:
        return max(1, value)

    @field_validator("grade_gap")
    @classmethod
    def validate_grade_gap(cls, value: float) -> float:
        return max(1.0, float(value))

    @field_validator("log_level", mode="before")
    @classmethod
    def normalize_log_level(cls, value: Any) -> str:
        level = str(value or "WARNING").strip().upper()
        if level not in _LOG_LEVELS:
            return "WARNING"
        return level

    def max_iter(self, m: int) -> int:
        return self.max_iter_factor * max(1, m)

    def default_cluster_tol(self, norm: float) -> float:
        if self.cluster_tol is not None:
            return self.cluster_tol
        return self.cluster_rel_tol * max(1.0, norm)

    @property
    def suite_dims(self) -> tuple[int, ...]:
        low = min(self.suite_min_dim, self.suite_max_dim)
        high = max(self.suite_min_dim, self.suite_max_dim)
        return tuple(range(low, high + 1))


class CliSettings(Settings):
    """Settings for one command-line invocation: explicit values only, no environment."""

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        return (init_settings,)


_override: Settings | None = None


@lru_cache()
def _environment_settings() -> Settings:
    return Settings()


def get_settings() -> Settings:
    """Get the active settings (an installed override, else the environment)."""
    if _override is not None:
        return _override
    return _environment_settings()


def set_settings(settings: Settings | None) -> None:
    global _override
    _override = settings
    if settings is not None:
        logging.getLogger(__name__).debug("Settings override installed: %s", settings)
