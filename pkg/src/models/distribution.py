# =============================================================================
# models/distribution.py
# =============================================================================
# Purpose:
# Data models for the cavity field:
# - InitialFieldSpec: how the field starts out (vacuum, Fock or coherent)
# - PhotonDistribution: probabilities over photon number n = 0..nmax
#
# Only diagonal (probability-level) information is kept. The nonselective
# ensemble never needs the phases of the field amplitudes.
# =============================================================================

import math
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

from config import Config


# -----------------------------------------------------------------------------
# FieldKind: the initial field states we know how to build
# -----------------------------------------------------------------------------
class FieldKind(str, Enum):
    VACUUM = "vacuum"
    FOCK = "fock"
    COHERENT = "coherent"


# -----------------------------------------------------------------------------
# InitialFieldSpec
# -----------------------------------------------------------------------------
class InitialFieldSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: FieldKind = FieldKind.VACUUM

    # Photon number of a Fock state (kind == fock only)
    n: int | None = Field(default=None, ge=0)

    # Mean photon number of a coherent state (kind == coherent only)
    nbar: float | None = Field(default=None, ge=0)

    # Largest probability mass the truncation may throw away
    tail_epsilon: float = Field(default=Config.TAIL_EPSILON, gt=0, lt=1)

    @model_validator(mode="after")
    def _check_kind_fields(self) -> "InitialFieldSpec":
        if self.kind is FieldKind.FOCK and self.n is None:
            raise ValueError("fock field needs a photon number 'n'")
        if self.kind is FieldKind.COHERENT:
            if self.nbar is None or not math.isfinite(self.nbar):
                raise ValueError("coherent field needs a finite mean photon number 'nbar'")
        return self

    @classmethod
    def vacuum(cls) -> "InitialFieldSpec":
        return cls(kind=FieldKind.VACUUM)

    @classmethod
    def fock(cls, n: int) -> "InitialFieldSpec":
        return cls(kind=FieldKind.FOCK, n=n)

    @classmethod
    def coherent(cls, nbar: float, tail_epsilon: float = Config.TAIL_EPSILON) -> "InitialFieldSpec":
        return cls(kind=FieldKind.COHERENT, nbar=nbar, tail_epsilon=tail_epsilon)

    def default_nmax(self) -> int:
        """Smallest sensible cutoff; coherent states get nbar + 10*sqrt(nbar) + 20."""
        if self.kind is FieldKind.FOCK:
            return int(self.n)
        if self.kind is FieldKind.COHERENT:
            return int(math.ceil(self.nbar + 10.0 * math.sqrt(self.nbar) + 20.0))
        return 0


# -----------------------------------------------------------------------------
# PhotonDistribution
# -----------------------------------------------------------------------------
# Dense, read-only array over n = 0..nmax. Nonnegativity and finiteness are
# checked on construction; normalization is not, because shifted and
# filtered intermediate distributions are legitimately unnormalized.
class PhotonDistribution(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    probs: np.ndarray

    @field_validator("probs", mode="before")
    @classmethod
    def _as_probability_array(cls, value) -> np.ndarray:
        arr = np.array(value, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("probabilities must be a non-empty one-dimensional sequence")
        if not np.all(np.isfinite(arr)):
            raise ValueError("probabilities must be finite")
        if arr.min() < 0.0:
            # rounding noise from subtractions is tolerated, real negatives are not
            if arr.min() < -Config.PROBABILITY_CLAMP:
                raise ValueError(f"negative probability {arr.min():.3e}")
            arr = np.clip(arr, 0.0, None)
        arr.setflags(write=False)
        return arr

    @field_serializer("probs")
    def _serialize_probs(self, probs: np.ndarray) -> list[float]:
        return probs.tolist()

    @property
    def nmax(self) -> int:
        return self.probs.size - 1

    @property
    def mass(self) -> float:
        return math.fsum(self.probs)

    def at(self, n: int) -> float:
        """Probability of photon number n; zero outside 0..nmax."""
        if 0 <= n <= self.nmax:
            return float(self.probs[n])
        return 0.0

    def is_normalized(self, tol: float = Config.NORMALIZATION_TOLERANCE) -> bool:
        return abs(self.mass - 1.0) <= tol

    def argmax(self) -> int:
        return int(np.argmax(self.probs))
