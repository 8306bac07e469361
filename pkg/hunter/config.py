"""Application and solver configuration."""
import json
from pathlib import Path
from typing import Optional, Tuple

from pydantic import BaseModel, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings. Only the output directory is read from the environment."""

    # App info
    app_name: str = "hunter"
    app_version: str = "0.1.0"
    debug: bool = False

    # Output paths
    output_dir: Path = Path("./output")

    model_config = SettingsConfigDict(
        env_prefix="HUNTER_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


settings = Settings()


# ============ SOLVER CONFIG ============

class IntegratorConfig(BaseModel):
    """Tolerances and limits for adaptive integration."""
    rel_tol: float = Field(default=1e-10, gt=0)
    abs_tol: float = Field(default=1e-12, gt=0)
    max_step_factor: float = Field(default=0.1, gt=0, le=1)  # fraction of |span|
    min_step: float = Field(default=0.0, ge=0)  # 0 disables the check
    max_steps: int = Field(default=100_000, gt=0)
    method: str = "DOP853"

    @field_validator("method")
    @classmethod
    def check_method(cls, value: str) -> str:
        if value not in ("DOP853", "RK45"):
            raise ValueError(f"unsupported method: {value}")
        return value


TIGHT = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14)


class MatchConfig(BaseModel):
    """Parameters of the series launches, matching and verification."""
    sonic_guard: float = Field(default=1e-8, gt=0)
    series_order: int = Field(default=10, ge=4, le=16)
    radius_guard: float = Field(default=1e-3, gt=0)  # relative to max(1, y*)
    origin_launch: float = Field(default=1e-3, gt=0)
    exterior_y_max: float = Field(default=1e3, gt=1)
    lambda_floor: float = Field(default=1e-18, gt=0)
    epsilon_floor: float = Field(default=1e-14, gt=0)
    bracket_halfwidth: float = 0.1
    bracket_inflated: float = 0.5
    match_tol: float = 1e-10
    residual_tol: float = 1e-8
    classification_tol: float = 1e-4
    target_y0: float = Field(default=0.02, ge=1e-3, le=1e-1)
    integrator: IntegratorConfig = TIGHT


class RunConfig(BaseModel):
    """Everything a CLI run needs; round-trips through its JSON file form."""
    subcommand: str = "match"
    integrator: IntegratorConfig = IntegratorConfig()
    match: MatchConfig = MatchConfig()
    y0: Optional[float] = None  # None -> choose_y0(match.target_y0)
    k_range: Tuple[int, int] = (1, 4)
    lambda_override: Optional[float] = None
    epsilon_override: Optional[float] = None
    y_max: float = 1e6
    output_dir: Path = settings.output_dir

    @classmethod
    def from_file(cls, path: Path) -> "RunConfig":
        """Load a config file written by to_file (or by hand)."""
        return cls.model_validate(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_file(self, path: Path) -> None:
        Path(path).write_text(
            json.dumps(self.model_dump(mode="json"), sort_keys=True, indent=2),
            encoding="utf-8",
        )
