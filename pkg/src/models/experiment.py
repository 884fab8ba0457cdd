# =============================================================================
# models/experiment.py
# =============================================================================
# Purpose:
# The experiment configuration read from JSON (or assembled from a preset and
# command-line overrides), and the result record of one run.
#
# ExperimentConfig rejects unknown fields, so a misspelled parameter is an
# error rather than a silently ignored default.
# =============================================================================

import json
from enum import Enum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from config import Config
from models.distribution import InitialFieldSpec
from models.errors import ConfigError
from models.filter_table import AdiabaticFilterSpec, FilterSpec
from models.pulse import AtomCase
from models.schedule import ScheduleSpec


class ExperimentKind(str, Enum):
    FILTER_DUMP = "filter-dump"
    ENSEMBLE = "ensemble"
    TRAJECTORIES = "trajectories"
    BRUTE_FORCE = "brute-force"
    BINOMIAL = "binomial"
    TRAP_SCHEDULE = "trap-schedule"
    VALIDATE_ORACLE = "validate-oracle"
    SCALING = "scaling"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


# Kinds that act with a single filter table
FILTER_KINDS = {
    ExperimentKind.FILTER_DUMP,
    ExperimentKind.ENSEMBLE,
    ExperimentKind.TRAJECTORIES,
    ExperimentKind.BRUTE_FORCE,
    ExperimentKind.BINOMIAL,
}


# -----------------------------------------------------------------------------
# OracleGrid: parameter grid compared by validate-oracle
# -----------------------------------------------------------------------------
class OracleGrid(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    lambda1s: list[float] = [0.0, 0.5, 1.0, 2.0]
    lambda2s: list[float] = [0.0, 0.5, 1.0, 2.0]
    etas: list[float] = [0.3, 1.0, 2.0]
    nmax: int = Field(default=30, ge=0)
    window: float = Config.WINDOW
    tol: float = Field(default=Config.TOL, gt=0)
    workers: int = Field(default=1, ge=1)


# -----------------------------------------------------------------------------
# ExperimentConfig
# -----------------------------------------------------------------------------
class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: ExperimentKind

    # Initial cavity field and photon-number cutoff (None: the field's default)
    field: InitialFieldSpec = InitialFieldSpec()
    nmax: int | None = Field(default=None, ge=0)

    # Per-atom interaction
    filter: FilterSpec | None = None
    case: AtomCase = AtomCase.A
    m: int = Field(default=10, ge=0)

    # Always present so every run can be repeated exactly
    seed: int = 0

    # ensemble: keep every `stride`-th distribution of the history (m = 0 and m always kept)
    stride: int = Field(default=1, ge=1)

    # trajectories
    count: int = Field(default=1000, ge=1)

    # trap-schedule
    schedules: list[ScheduleSpec] = []
    noise_sigmas: list[float] = [0.0]
    realizations: int = Field(default=Config.REALIZATIONS, ge=1)
    target_n: int = Field(default=10, ge=0)

    # scaling
    n_primes: list[int] = [1, 2, 4, 8, 16]
    threshold: float = Field(default=Config.FOCK_THRESHOLD, gt=0, le=1)
    max_atoms: int = Field(default=10_000, ge=1)

    # validate-oracle
    oracle: OracleGrid = OracleGrid()

    # Output file (None: <output dir>/<kind>.<format>)
    output: str | None = None
    format: OutputFormat = OutputFormat.CSV

    @field_validator("noise_sigmas")
    @classmethod
    def _sigmas_in_range(cls, sigmas: list[float]) -> list[float]:
        if not sigmas:
            raise ValueError("at least one noise level is required")
        for sigma in sigmas:
            if not 0.0 <= sigma < 1.0:
                raise ValueError(f"noise sigma {sigma} outside [0, 1)")
        return sigmas

    @field_validator("n_primes")
    @classmethod
    def _n_primes_nonnegative(cls, n_primes: list[int]) -> list[int]:
        if any(n < 0 for n in n_primes):
            raise ValueError("n_primes must be >= 0")
        return n_primes

    @model_validator(mode="after")
    def _check_kind_fields(self) -> "ExperimentConfig":
        if self.kind in FILTER_KINDS and self.filter is None:
            raise ValueError(f"experiment '{self.kind.value}' needs a 'filter'")
        if self.kind is ExperimentKind.BINOMIAL and not isinstance(self.filter, AdiabaticFilterSpec):
            raise ValueError("experiment 'binomial' needs an 'adiabatic-kappa' filter")
        if self.kind is ExperimentKind.TRAP_SCHEDULE and not self.schedules:
            raise ValueError("experiment 'trap-schedule' needs at least one entry in 'schedules'")
        return self


# -----------------------------------------------------------------------------
# Parsing
# -----------------------------------------------------------------------------

def _describe(error: ValidationError) -> list[str]:
    lines = []
    for item in error.errors():
        loc = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{loc}: {item['msg']}")
    return lines


def parse_config_data(data: Any) -> ExperimentConfig:
    """Validate an already-decoded config, turning pydantic errors into ConfigError."""
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        lines = _describe(e)
        raise ConfigError("invalid experiment config: " + "; ".join(lines), errors=lines) from e


def parse_config(text: str) -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}", line=e.lineno, column=e.colno) from e
    return parse_config_data(data)


def dump_config(config: ExperimentConfig) -> dict:
    """Fully resolved config, every default filled in."""
    return config.model_dump(mode="json")


# -----------------------------------------------------------------------------
# RunResult
# -----------------------------------------------------------------------------
class RunState(str, Enum):
    COMPLETED = "completed"
    FAILED = "failed"     # ran to the end but a validation check did not pass


class RunResult(BaseModel):
    state: RunState
    outputs: list[str]
    manifest: str
    summary: dict[str, Any] = {}
