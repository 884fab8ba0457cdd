# =============================================================================
# cavity/trapping.py
# =============================================================================
# Purpose:
# Trapping states of the resonant filter and the velocity schedules built on
# them.
#
# A Fock state n' is trapping for eta when sqrt(n' + 1) eta = q is an integer:
# the atom then makes exactly q Rabi cycles, leaves in its upper level, and
# no population moves from n' to n' + 1. Consecutive trapping states cut the
# photon-number axis into blocks that exchange no probability.
#
# Schedules assign one eta per atom. Velocity errors are modelled as a
# relative Gaussian error on eta (eta = g0 T and T scales with the inverse
# velocity).
# =============================================================================

import json
import logging
import math
from pathlib import Path
from typing import Callable, Literal, Sequence

import numpy as np
from pydantic import ValidationError

from cavity.filters import adiabatic_filter, resonant_filter
from cavity.measurement import ensemble_step
from config import Config
from models.distribution import PhotonDistribution
from models.errors import InvalidSpecError
from models.pulse import AtomCase
from models.schedule import (
    CustomScheduleSpec,
    FixedScheduleSpec,
    IncrementingScheduleSpec,
    NoiseModel,
    Schedule,
    ScheduleSeries,
    ScheduleSpec,
    TrappingState,
)

logger = logging.getLogger(__name__)


# -----------------------------------------------------------------------------
# Trapping arithmetic
# -----------------------------------------------------------------------------

def eta_for_trap(n_prime: int, q: int) -> float:
    if n_prime < 0 or q < 1:
        raise InvalidSpecError(f"need n' >= 0 and q >= 1, got ({n_prime}, {q})", n_prime=n_prime, q=q)
    return q / math.sqrt(n_prime + 1)


def trap_states(eta: float, nmax: int) -> list[TrappingState]:
    """All (n', q) with n' <= nmax and n' + 1 = (q / eta)^2, sorted by n'."""
    if not eta > 0:
        raise InvalidSpecError(f"eta must be > 0, got {eta}", eta=eta)
    states = []
    q = 1
    while True:
        x = (q / eta) ** 2 - 1.0
        if x > nmax + 0.5:
            break
        n_prime = round(x)
        if 0 <= n_prime <= nmax and abs(x - n_prime) <= Config.TRAP_TOLERANCE * max(1.0, x):
            states.append(TrappingState(n_prime=n_prime, q=q))
        q += 1
    return states


def block_boundaries(eta: float, nmax: int) -> list[tuple[int, int]]:
    """Inclusive (start, end) ranges, each ending at a trapping state, plus the open top block."""
    blocks = []
    start = 0
    for state in trap_states(eta, nmax):
        blocks.append((start, state.n_prime))
        start = state.n_prime + 1
    if start <= nmax:
        blocks.append((start, nmax))
    return blocks


def block_masses(d: PhotonDistribution, eta: float) -> list[float]:
    """Probability inside each block of `eta` (the top block absorbs everything above)."""
    blocks = block_boundaries(eta, d.nmax)
    return [math.fsum(d.probs[start : end + 1]) for start, end in blocks]


def photon_number_uncertainty(n_prime: int, relative_sigma: float) -> float:
    """
    Spread of the trapped photon number caused by a relative eta error:
    n' + 1 = (q / eta)^2, so dn' = 2 (n' + 1) d(eta) / eta to first order.
    """
    return 2.0 * (n_prime + 1) * relative_sigma


# -----------------------------------------------------------------------------
# Schedules
# -----------------------------------------------------------------------------

def make_schedule_fixed(n_prime: int, q: int, m: int) -> Schedule:
    return Schedule(etas=(eta_for_trap(n_prime, q),) * m)


def make_schedule_incrementing(n_prime: int, q_start: int, m: int) -> Schedule:
    """Atom j (1-based) traps n' with index q_start + j - 1."""
    if q_start < 1:
        raise InvalidSpecError(f"q_start must be >= 1, got {q_start}", q_start=q_start)
    return Schedule(etas=tuple(eta_for_trap(n_prime, q_start + j) for j in range(m)))


def make_schedule_custom(etas: Sequence[float]) -> Schedule:
    try:
        return Schedule(etas=tuple(float(eta) for eta in etas))
    except ValidationError as e:
        raise InvalidSpecError(f"invalid schedule: {e.errors()[0]['msg']}") from e


def load_schedule(path: str | Path) -> Schedule:
    """Read a schedule file: a JSON array of eta values."""
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidSpecError(f"cannot read schedule file {path}: {e}", path=str(path)) from e
    if not isinstance(data, list):
        raise InvalidSpecError(f"schedule file {path} must hold a JSON array of etas", path=str(path))
    return make_schedule_custom(data)


def dump_schedule(schedule: Schedule) -> str:
    return json.dumps(list(schedule.etas))


def build_schedule(spec: ScheduleSpec, m: int) -> Schedule:
    if isinstance(spec, FixedScheduleSpec):
        return make_schedule_fixed(spec.n_prime, spec.q, m)
    if isinstance(spec, IncrementingScheduleSpec):
        return make_schedule_incrementing(spec.n_prime, spec.q_start, m)
    if isinstance(spec, CustomScheduleSpec):
        if spec.path is not None:
            return load_schedule(spec.path)
        if spec.etas is not None:
            return make_schedule_custom(spec.etas)
    raise InvalidSpecError("custom schedule needs 'etas' or 'path'")


# -----------------------------------------------------------------------------
# Running schedules
# -----------------------------------------------------------------------------

def _noisy_etas(schedule: Schedule, noise: NoiseModel, realization: int) -> tuple[np.ndarray, int]:
    etas = np.asarray(schedule.etas, dtype=float)
    if noise.relative_sigma == 0.0:
        return etas, 0
    rng = np.random.default_rng([noise.seed, realization])
    eps = rng.normal(0.0, noise.relative_sigma, etas.size)
    noisy = etas * (1.0 + eps)
    resampled = 0
    while np.any(noisy <= 0.0):
        bad = noisy <= 0.0
        resampled += int(bad.sum())
        noisy[bad] = etas[bad] * (1.0 + rng.normal(0.0, noise.relative_sigma, int(bad.sum())))
    return noisy, resampled


def _resonant_step(d: PhotonDistribution, eta: float, case: AtomCase) -> PhotonDistribution:
    return ensemble_step(d, resonant_filter(eta, d.nmax + 2), case)


def run_schedule(
    d0: PhotonDistribution,
    schedule: Schedule,
    case: AtomCase,
    noise: NoiseModel | None,
    target_n: int,
    realizations: int = Config.REALIZATIONS,
) -> ScheduleSeries:
    """
    P_m(target_n) for m = 0..len(schedule), averaged over noise realizations.

    Every atom applies one nonselective step with the resonant filter of its
    (possibly perturbed) eta. Realization r draws its errors from
    np.random.default_rng([seed, r]), one per atom in schedule order.
    """
    if realizations < 1:
        raise InvalidSpecError(f"realizations must be >= 1, got {realizations}", realizations=realizations)
    noise = noise or NoiseModel()
    if noise.relative_sigma == 0.0 and realizations > 1:
        logger.warning(f"run_schedule: noiseless schedule, using 1 realization instead of {realizations}")
        realizations = 1

    m = len(schedule)
    curves = np.empty((realizations, m + 1))
    resampled = 0
    for r in range(realizations):
        etas, redrawn = _noisy_etas(schedule, noise, r)
        resampled += redrawn
        d = d0
        curves[r, 0] = d.at(target_n)
        for j, eta in enumerate(etas):
            d = _resonant_step(d, float(eta), case)
            curves[r, j + 1] = d.at(target_n)

    if resampled:
        logger.warning(f"run_schedule: resampled {resampled} non-positive eta draws")

    mean = [math.fsum(curves[:, j]) / realizations for j in range(m + 1)]
    if realizations > 1:
        stddev = [
            math.sqrt(math.fsum((curves[:, j] - mean[j]) ** 2) / (realizations - 1)) for j in range(m + 1)
        ]
    else:
        stddev = [0.0] * (m + 1)

    logger.info(
        f"run_schedule: {m} atoms, sigma={noise.relative_sigma}, {realizations} realization(s), "
        f"final P({target_n}) = {mean[-1]:.6f}"
    )
    return ScheduleSeries(
        target_n=target_n,
        realizations=realizations,
        relative_sigma=noise.relative_sigma,
        mean=mean,
        stddev=stddev,
        resampled=resampled,
    )


def atoms_to_threshold(series: Sequence[float], threshold: float = Config.FOCK_THRESHOLD) -> int | None:
    """First m with series[m] >= threshold, or None."""
    for m, value in enumerate(series):
        if value >= threshold:
            return m
    return None


# -----------------------------------------------------------------------------
# Preparation cost
# -----------------------------------------------------------------------------

PreparationKind = Literal["adiabatic", "fixed", "incrementing"]


def preparation_cost(
    d0: PhotonDistribution,
    n_prime: int,
    kind: PreparationKind,
    threshold: float = Config.FOCK_THRESHOLD,
    max_atoms: int = 10_000,
) -> int | None:
    """
    Number of case (a) atoms until P_m(n') >= threshold, or None within max_atoms.

    adiabatic:     kappa = 0 crossings, one photon per atom
    fixed:         every atom traps n' with q = 1
    incrementing:  atom j traps n' with q = j
    """
    if kind == "adiabatic":
        ladder = adiabatic_filter(0.0, n_prime + 2)
        step: Callable[[PhotonDistribution, int], PhotonDistribution] = (
            lambda d, j: ensemble_step(d, ladder, AtomCase.A)
        )
    elif kind == "fixed":
        eta = eta_for_trap(n_prime, 1)
        step = lambda d, j: _resonant_step(d, eta, AtomCase.A)
    elif kind == "incrementing":
        step = lambda d, j: _resonant_step(d, eta_for_trap(n_prime, j + 1), AtomCase.A)
    else:
        raise InvalidSpecError(f"unknown preparation kind {kind!r}", kind=kind)

    d = d0
    for j in range(max_atoms + 1):
        if d.at(n_prime) >= threshold:
            return j
        if j < max_atoms:
            d = step(d, j)
    return None
