from pathlib import Path
from typing import Any, List, Literal, Optional, Tuple

from pydantic import AliasChoices, BaseModel, Field
from pydantic_settings import BaseSettings, SettingsConfigDict

# Defaults shared by the parameter records and the CLI
DEFAULT_SIGMA = 0.15
DEFAULT_NU = 0.25
DEFAULT_DELTA = 1e-3

# Bumped whenever a JSON or CSV layout changes
SCHEMA_VERSION = "1"

LogLevel = Literal["DEBUG", "INFO", "WARNING", "ERROR"]


class ToySettings(BaseModel):
    n: int = Field(6, ge=5, description="Number of generations N")
    delta: float = Field(DEFAULT_DELTA, gt=0, lt=1, description="Closeness delta")
    sigma: float = Field(DEFAULT_SIGMA, gt=0, lt=1, description="Section offset")
    nu: float = Field(DEFAULT_NU, gt=0, description="Exponent in delta**nu")
    phase: float = Field(0.0, description="Heteroclinic phase")


class IntegratorSettings(BaseModel):
    rel_tol: float = Field(1e-11, gt=0, le=1e-6)
    abs_tol: float = Field(1e-14, gt=0, le=1e-6)
    max_step: float = Field(1.0, gt=0)
    max_time: float = Field(200.0, gt=0)
    event_tol: float = Field(1e-10, gt=0, description="Section tolerance")
    tangency_tol: float = Field(1e-12, ge=0)


class CascadeSettings(BaseModel):
    shoot_tolerance: float = Field(1e-9, gt=0)
    per_saddle_budget: float = Field(40.0, gt=0)
    search_depth: int = Field(60, ge=1, le=200)
    retry: bool = Field(True, description="Halve the start offset once on failure")


class LatticeSettings(BaseModel):
    n: int = Field(3, ge=1)
    gen_size: int = Field(4, ge=2)
    radius: int = Field(10_000, ge=1)
    seed: int = 7
    s: float = Field(1.5, gt=0)
    max_attempts: int = Field(400, ge=1)
    spread: bool = True
    growth_s: Optional[float] = Field(None, gt=1)


class GalerkinSettings(BaseModel):
    lambdas: List[float] = Field(default_factory=lambda: [4.0, 8.0, 16.0])
    samples: int = Field(512, ge=2)
    window: float = Field(2.0, gt=0, description="Toy-time window of the lift")
    n: int = Field(5, ge=5, description="Generations of the lifted Lambda")
    s: float = Field(1.5, ge=0)


class NormalFormSettings(BaseModel):
    amplitudes: List[float] = Field(default_factory=lambda: [1e-2, 1e-3, 1e-4])
    support_size: int = Field(12, ge=2)
    seed: int = 11


class SweepSettings(BaseModel):
    deltas: List[float] = Field(default_factory=lambda: [1e-2, 1e-3, 1e-4])
    ns: List[int] = Field(default_factory=lambda: [6])
    nu: float = Field(0.4, gt=0)


class Settings(BaseSettings):
    """Application settings from environment variables with defaults.

    Nested sections are addressed with a double underscore, both in the
    environment and in an experiment config file:
    - TOY__N, TOY__DELTA, TOY__SIGMA, TOY__NU, TOY__PHASE
    - INTEGRATOR__REL_TOL, INTEGRATOR__ABS_TOL, INTEGRATOR__MAX_TIME, ...
    - CASCADE__SEARCH_DEPTH, CASCADE__SHOOT_TOLERANCE, ...
    - LATTICE__N, LATTICE__GEN_SIZE, LATTICE__RADIUS, LATTICE__SEED, LATTICE__S
    - GALERKIN__LAMBDAS, GALERKIN__SAMPLES, GALERKIN__WINDOW
    - NORMAL_FORM__AMPLITUDES, NORMAL_FORM__SUPPORT_SIZE
    - SWEEP__DELTAS, SWEEP__NS, SWEEP__NU
    - CASCADE_LAB_THREADS: worker count for sweeps
    - OUTPUT_DIR: where artifacts are written
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
        env_nested_delimiter="__",
        case_sensitive=False,
    )

    toy: ToySettings = ToySettings()
    integrator: IntegratorSettings = IntegratorSettings()
    cascade: CascadeSettings = CascadeSettings()
    lattice: LatticeSettings = LatticeSettings()
    galerkin: GalerkinSettings = GalerkinSettings()
    normal_form: NormalFormSettings = NormalFormSettings()
    sweep: SweepSettings = SweepSettings()

    threads: int = Field(
        default=1,
        ge=1,
        validation_alias=AliasChoices("cascade_lab_threads", "threads"),
    )
    output_dir: Path = Path("artifacts")
    log_level: LogLevel = "INFO"


def load_settings(config: Optional[Path] = None, **overrides: Any) -> Settings:
    """Build settings for one run.

    Explicit overrides win over the environment, which wins over the config
    file, which wins over ``.env`` and the defaults.
    """
    env_files: Tuple[str, ...] = (".env",)
    if config is not None:
        env_files = (".env", str(config))
    return Settings(_env_file=env_files, **overrides)


settings = Settings()
