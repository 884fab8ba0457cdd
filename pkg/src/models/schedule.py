# =============================================================================
# models/schedule.py
# =============================================================================
# Purpose:
# Models for trapping-state experiments:
# - TrappingState: a photon number n' and Rabi-cycle index q with sqrt(n'+1) eta = q
# - Schedule: one eta = g0 T per atom (the atom velocities)
# - NoiseModel: relative Gaussian error on each atom's eta
# - ScheduleSpec: declarative schedules for experiment configs (fixed,
#   incrementing or a custom list), selected by `kind`
# - ScheduleSeries: mean and spread of P_m(target) over noise realizations
# =============================================================================

from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator


class TrappingState(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_prime: int = Field(ge=0)
    q: int = Field(ge=1)


class Schedule(BaseModel):
    model_config = ConfigDict(frozen=True)

    etas: tuple[float, ...]

    @field_validator("etas")
    @classmethod
    def _positive(cls, etas: tuple[float, ...]) -> tuple[float, ...]:
        if any(not eta > 0 for eta in etas):
            raise ValueError("every eta in a schedule must be > 0")
        return etas

    def __len__(self) -> int:
        return len(self.etas)


class NoiseModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    # standard deviation of the Gaussian error, as a fraction of eta
    relative_sigma: float = Field(default=0.0, ge=0.0, lt=1.0)
    seed: int = 0


# -----------------------------------------------------------------------------
# Schedule specs (discriminated on `kind`)
# -----------------------------------------------------------------------------

class FixedScheduleSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["fixed"] = "fixed"
    n_prime: int = Field(default=10, ge=0)
    q: int = Field(default=1, ge=1)


class IncrementingScheduleSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["incrementing"] = "incrementing"
    n_prime: int = Field(default=10, ge=0)
    q_start: int = Field(default=1, ge=1)


class CustomScheduleSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["custom"] = "custom"
    # inline etas, or a JSON file holding an array of them
    etas: list[float] | None = None
    path: str | None = None


ScheduleSpec = Annotated[
    Union[FixedScheduleSpec, IncrementingScheduleSpec, CustomScheduleSpec],
    Field(discriminator="kind"),
]


class ScheduleSeries(BaseModel):
    model_config = ConfigDict(frozen=True)

    target_n: int
    realizations: int
    relative_sigma: float
    mean: list[float]
    stddev: list[float]
    resampled: int = 0

    def csv_rows(self) -> list[tuple[int, float, float]]:
        """Rows for the "m,mean_probability,stddev" table."""
        return [(m, mu, sd) for m, (mu, sd) in enumerate(zip(self.mean, self.stddev))]

    def standard_error(self, m: int) -> float:
        return self.stddev[m] / self.realizations ** 0.5
