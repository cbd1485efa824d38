"""Application configuration using Pydantic Settings"""
from typing import Literal
from pydantic_settings import BaseSettings, SettingsConfigDict
from functools import lru_cache


class Settings(BaseSettings):
    """Numerical settings loaded from AQFOCK_* environment variables"""

    model_config = SettingsConfigDict(
        env_prefix="AQFOCK_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    # Application Configuration
    log_level: str = "WARNING"

    # Arithmetic Configuration
    precision: Literal["double", "extended"] = "double"
    extended_dps: int = 40

    # Truncation of infinite products and sums
    trunc_tol: float = 1e-16
    trunc_max_terms: int = 10000

    # Radial measure canonicalization
    merge_tol: float = 1e-14
    zero_weight: float = 1e-300
    weight_tol: float = 1e-12

    # Quadrature
    quad_order: int = 400

    # Classifier
    alpha_eq_q_eps: float = 0.0

    # Type-B group enumeration
    max_typeb_rank: int = 5

    # Sweep Configuration
    sweep_workers: int = 4

    @property
    def extended(self) -> bool:
        """Whether q-products are accumulated in extended precision"""
        return self.precision == "extended"


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()
