# =============================================================================
# models/errors.py
# =============================================================================
# Purpose:
# Error types raised by the simulation modules, plus a serialisable report
# model the CLI prints when a run fails.
#
# Every error carries a numeric `code` in the spirit of JSON-RPC error objects
# (-32603 style), so a failed run can be reported as structured data rather
# than a bare traceback.
# =============================================================================

from typing import Any

from pydantic import BaseModel


# -----------------------------------------------------------------------------
# ErrorReport
# -----------------------------------------------------------------------------
# Structured view of a failure. Only one of these is printed per failed run.
class ErrorReport(BaseModel):
    # Numeric error code (see the classes below)
    code: int

    # Human-readable message describing the error
    message: str

    # Optional context (offending field, time and step size, required nmax, ...)
    data: Any | None = None


# -----------------------------------------------------------------------------
# Base exception
# -----------------------------------------------------------------------------
class CavityFockError(Exception):
    code: int = -32000

    def __init__(self, message: str, **data: Any):
        super().__init__(message)
        self.message = message
        self.data = data or None

    def to_report(self) -> ErrorReport:
        return ErrorReport(code=self.code, message=self.message, data=self.data)


class InvalidSpecError(CavityFockError, ValueError):
    """A field spec, outcome or parameter violates its type invariants."""
    code = -32001


class TruncationError(CavityFockError):
    """The photon-number cutoff leaves too much probability in the tail."""
    code = -32002

    @property
    def required_nmax(self) -> int | None:
        return (self.data or {}).get("required_nmax")


class PropagationError(CavityFockError):
    """The adaptive integrator gave up (step size underflow or similar)."""
    code = -32003


class FilterRangeError(CavityFockError, ValueError):
    """Pulse parameters outside the range the closed forms are evaluated in."""
    code = -32004


class FilterIndexError(CavityFockError, IndexError):
    """A filter table does not cover the photon numbers a step needs."""
    code = -32005


class NormalizationError(CavityFockError):
    """Input not normalized, zero total mass, or norm drift beyond the limit."""
    code = -32006


class ImpossibleOutcomeError(CavityFockError):
    """A selective outcome with (numerically) zero probability was requested."""
    code = -32007


class EnumerationLimitError(CavityFockError):
    """Exhaustive outcome enumeration requested for too many atoms."""
    code = -32008


class ConfigError(CavityFockError, ValueError):
    """Experiment configuration failed to parse or validate."""
    code = -32602
