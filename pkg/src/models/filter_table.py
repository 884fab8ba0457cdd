# =============================================================================
# models/filter_table.py
# =============================================================================
# Purpose:
# Filter functions: the probability |a+(n)|^2 that an atom leaves manifold n
# in the level it entered. Includes:
# - Kappa: the constant adiabatic-limit stay probability
# - FilterTable: a tabulated filter over n = 0..nmax
# - FilterSpec: declarative description of how a table is built, selected
#   by its `kind` field, so tables can be rebuilt for a larger nmax
#
# p_minus is never stored; it is always 1 - p_plus.
# =============================================================================

from enum import Enum
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator
from pydantic.type_adapter import TypeAdapter

from config import Config
from models.pulse import AtomCase


class FilterProvenance(str, Enum):
    EXACT_DK = "exact-dk"
    ADIABATIC_KAPPA = "adiabatic-kappa"
    RESONANT = "resonant"
    NUMERIC = "numeric"


class Kappa(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float = Field(ge=0.0, le=1.0)


# -----------------------------------------------------------------------------
# Filter specs (discriminated on `kind`)
# -----------------------------------------------------------------------------

class DKFilterSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["exact-dk"] = "exact-dk"
    lambda1: float = 0.0
    lambda2: float = 0.0
    eta: float = Field(default=1.0, ge=0)


class AdiabaticFilterSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["adiabatic-kappa"] = "adiabatic-kappa"
    # Either kappa directly, or the sweep parameters it is derived from
    kappa: float | None = Field(default=None, ge=0.0, le=1.0)
    lambda1: float | None = None
    lambda2: float | None = None


class ResonantFilterSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["resonant"] = "resonant"
    eta: float = Field(default=1.0, ge=0)


class NumericFilterSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["numeric"] = "numeric"
    lambda1: float = 0.0
    lambda2: float = 0.0
    eta: float = Field(default=1.0, ge=0)
    case: AtomCase = AtomCase.A
    window: float = Config.WINDOW
    tol: float = Field(default=Config.TOL, gt=0)


FilterSpec = Annotated[
    Union[DKFilterSpec, AdiabaticFilterSpec, ResonantFilterSpec, NumericFilterSpec],
    Field(discriminator="kind"),
]

FilterSpecAdapter = TypeAdapter(FilterSpec)


# -----------------------------------------------------------------------------
# FilterTable
# -----------------------------------------------------------------------------
class FilterTable(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    # stay probability per manifold n = 0..nmax
    p_plus: np.ndarray

    provenance: FilterProvenance

    # how the table was built, when known; lets callers extend it
    spec: FilterSpec | None = None

    @field_validator("p_plus", mode="before")
    @classmethod
    def _as_unit_interval(cls, value) -> np.ndarray:
        arr = np.array(value, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("filter table must be a non-empty one-dimensional sequence")
        if not np.all(np.isfinite(arr)):
            raise ValueError("filter entries must be finite")
        if arr.min() < -Config.PROBABILITY_CLAMP or arr.max() > 1.0 + Config.PROBABILITY_CLAMP:
            raise ValueError("filter entries must lie in [0, 1]")
        arr = np.clip(arr, 0.0, 1.0)
        arr.setflags(write=False)
        return arr

    @field_serializer("p_plus")
    def _serialize_p_plus(self, p_plus: np.ndarray) -> list[float]:
        return p_plus.tolist()

    @property
    def nmax(self) -> int:
        return self.p_plus.size - 1

    @property
    def p_minus(self) -> np.ndarray:
        return 1.0 - self.p_plus

    def covers(self, nmax: int) -> bool:
        return nmax <= self.nmax

    def csv_rows(self) -> list[tuple[int, float, float]]:
        """Rows for the "n,p_plus,p_minus" table."""
        return [(n, float(p), float(1.0 - p)) for n, p in enumerate(self.p_plus)]
