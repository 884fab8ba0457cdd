# =============================================================================
# models/pulse.py
# =============================================================================
# Purpose:
# Models describing one atom's passage through the cavity:
# - DKParams: Demkov-Kunike detuning sweep and coupling pulse
# - TabulatedPulse: sampled detuning/coupling for anything else
# - AtomCase: whether the atom enters in its upper (a) or lower (b) level
# - TwoLevelAmplitudes: the atom-field amplitudes after the passage
# =============================================================================

import math
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


# -----------------------------------------------------------------------------
# AtomCase
# -----------------------------------------------------------------------------
class AtomCase(str, Enum):
    A = "a"     # enters in the upper level |+>
    B = "b"     # enters in the lower level |->

    @property
    def initial_amplitudes(self) -> tuple[complex, complex]:
        return (1.0 + 0j, 0j) if self is AtomCase.A else (0j, 1.0 + 0j)


# -----------------------------------------------------------------------------
# DKParams
# -----------------------------------------------------------------------------
# Half-detuning  E_bar + E0 * tanh(t / T),  coupling  g0 * sech(t / T).
class DKParams(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    e_bar: float = 0.0
    e0: float = 0.0
    g0: float = Field(default=0.0, ge=0)
    t_scale: float = Field(default=1.0, gt=0)

    @classmethod
    def from_dimensionless(
        cls, lambda1: float, lambda2: float, eta: float, t_scale: float = 1.0
    ) -> "DKParams":
        return cls(e_bar=lambda1 / t_scale, e0=lambda2 / t_scale, g0=eta / t_scale, t_scale=t_scale)

    @property
    def lambda1(self) -> float:
        return self.e_bar * self.t_scale

    @property
    def lambda2(self) -> float:
        return self.e0 * self.t_scale

    @property
    def eta(self) -> float:
        return self.g0 * self.t_scale


# -----------------------------------------------------------------------------
# TabulatedPulse
# -----------------------------------------------------------------------------
# Samples of the full detuning (delta_omega, not halved) and the coupling g,
# linearly interpolated between sample times.
class TabulatedPulse(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    times: list[float]
    detuning: list[float]
    coupling: list[float]

    @model_validator(mode="after")
    def _check_samples(self) -> "TabulatedPulse":
        if not (len(self.times) == len(self.detuning) == len(self.coupling)):
            raise ValueError("times, detuning and coupling need the same length")
        if len(self.times) < 2:
            raise ValueError("a tabulated pulse needs at least two samples")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("sample times must be strictly increasing")
        if any(g < 0 for g in self.coupling):
            raise ValueError("coupling samples must be >= 0")
        return self

    def half_detuning(self, t: float) -> float:
        return 0.5 * float(np.interp(t, self.times, self.detuning))

    def coupling_at(self, t: float) -> float:
        return float(np.interp(t, self.times, self.coupling))


# -----------------------------------------------------------------------------
# TwoLevelAmplitudes
# -----------------------------------------------------------------------------
class TwoLevelAmplitudes(BaseModel):
    model_config = ConfigDict(frozen=True)

    a_plus: complex
    a_minus: complex

    @property
    def norm(self) -> float:
        return math.sqrt(abs(self.a_plus) ** 2 + abs(self.a_minus) ** 2)

    @property
    def populations(self) -> tuple[float, float]:
        return abs(self.a_plus) ** 2, abs(self.a_minus) ** 2
