# =============================================================================
# models/outcome.py
# =============================================================================
# Purpose:
# Records of selective measurements:
# - OutcomeSequence: flip indicators k_j of the measured atoms, with the level
#   each atom entered in
# - Trajectory: one sampled (or enumerated) outcome sequence, its probability
#   and the conditional field it leaves behind
#
# k_j = -1: entered |+>, left |->   (case a flip, adds a photon)
# k_j = +1: entered |->, left |+>   (case b flip, removes a photon)
# k_j =  0: left in the level it entered
# =============================================================================

from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.distribution import PhotonDistribution
from models.pulse import AtomCase

# the flip each case can show besides "no flip"
FLIP_FOR_CASE = {AtomCase.A: -1, AtomCase.B: +1}


class OutcomeSequence(BaseModel):
    model_config = ConfigDict(frozen=True)

    entries: tuple[int, ...]
    cases: tuple[AtomCase, ...]

    @model_validator(mode="after")
    def _check_admissible(self) -> "OutcomeSequence":
        if len(self.entries) != len(self.cases):
            raise ValueError(
                f"{len(self.entries)} outcomes recorded for {len(self.cases)} atoms"
            )
        for j, (k, case) in enumerate(zip(self.entries, self.cases)):
            if k not in (0, FLIP_FOR_CASE[case]):
                raise ValueError(f"outcome {k:+d} of atom {j} is impossible for case {case.value}")
        return self

    @classmethod
    def uniform(cls, entries, case: AtomCase) -> "OutcomeSequence":
        return cls(entries=tuple(entries), cases=(case,) * len(entries))

    @property
    def m(self) -> int:
        return len(self.entries)

    @property
    def nu(self) -> int:
        return sum(self.entries)

    def label(self) -> str:
        return " ".join(f"{k:+d}" if k else "0" for k in self.entries)


class Trajectory(BaseModel):
    model_config = ConfigDict(frozen=True)

    sequence: OutcomeSequence
    probability: float = Field(ge=0.0, le=1.0 + 1e-12)
    final: PhotonDistribution

    def to_record(self) -> dict:
        """Flat record for the JSON-lines export."""
        return {
            "sequence": list(self.sequence.entries),
            "probability": self.probability,
            "final": self.final.probs.tolist(),
        }
