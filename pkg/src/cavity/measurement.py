# =============================================================================
# cavity/measurement.py
# =============================================================================
# Purpose:
# What the passing atoms do to the photon distribution.
#
# Selective (recorded outcomes):
# - detection_probability, apply_selective, sequence_probability
# - sample_trajectories, enumerate_trajectories
#
# Nonselective (outcomes discarded):
# - ensemble_step / ensemble_run (the recurrence)
# - brute_force_ensemble (explicit average over every outcome sequence)
# - binomial_closed_form, adiabatic_shift_law (adiabatic closed forms)
#
# Index bookkeeping: filters are indexed by the manifold number. A case (a)
# atom meeting n photons lives in manifold n + 1; a case (b) atom in
# manifold n. With s = p_plus (stay) and 1 - s (flip):
#
#   case a, k =  0:  P'(n) ~ s(n + 1) P(n)
#   case a, k = -1:  P'(n) ~ (1 - s(n)) P(n - 1)
#   case b, k =  0:  P'(n) ~ s(n) P(n)
#   case b, k = +1:  P'(n) ~ (1 - s(n + 1)) P(n + 1)
#
# The case (b) stay probability equals the case (a) one (2x2 unitarity), so
# one table serves both.
#
# The averaged distribution is a Fock state only if every conditional branch
# ends in that same Fock state. Nothing here checks for it.
# =============================================================================

import logging
import math
from typing import Iterator, Sequence

import numpy as np
from pydantic import ValidationError
from scipy.special import comb, gammaln, xlogy

from cavity import fockspace
from cavity.filters import ensure_coverage
from config import Config
from models.distribution import PhotonDistribution
from models.errors import (
    EnumerationLimitError,
    FilterIndexError,
    ImpossibleOutcomeError,
    InvalidSpecError,
    NormalizationError,
)
from models.filter_table import FilterTable, Kappa
from models.outcome import FLIP_FOR_CASE, OutcomeSequence, Trajectory
from models.pulse import AtomCase

logger = logging.getLogger(__name__)

# above this m the binomial coefficients are formed from log-gamma
BINOMIAL_LOG_SPACE_M = 60


# -----------------------------------------------------------------------------
# Internal helpers
# -----------------------------------------------------------------------------

def _require_normalized(d: PhotonDistribution) -> None:
    if not d.is_normalized():
        raise NormalizationError(
            f"expected a normalized distribution, total mass is {d.mass:.15g}", mass=d.mass
        )


def _covering(f: FilterTable, nmax: int) -> FilterTable:
    f = ensure_coverage(f, nmax)
    if not f.covers(nmax):
        raise FilterIndexError(
            f"filter table covers manifolds up to {f.nmax}, step needs {nmax}",
            table_nmax=f.nmax,
            required_nmax=nmax,
        )
    return f


def _needed_manifold(size: int, case: AtomCase) -> int:
    # highest manifold a step touches for a distribution over 0..size-1
    return size if case is AtomCase.A else size - 1


def _check_outcome(case: AtomCase, outcome: int) -> None:
    if outcome not in (0, FLIP_FOR_CASE[case]):
        raise InvalidSpecError(
            f"outcome {outcome:+d} is impossible for case {case.value}", outcome=outcome, case=case.value
        )


def _branch(probs: np.ndarray, f: FilterTable, case: AtomCase, outcome: int) -> np.ndarray:
    """Unnormalized distribution after one atom with the given outcome."""
    size = probs.size
    if case is AtomCase.A:
        stay = f.p_plus[1 : size + 1]
        if outcome == 0:
            return stay * probs
        out = np.zeros(size + 1)
        out[1:] = (1.0 - stay) * probs
        return out if out[-1] > 0.0 else out[:-1]

    stay = f.p_plus[:size]
    if outcome == 0:
        return stay * probs
    flip = 1.0 - stay
    flip[0] = 0.0   # manifold 0 has no upper state to flip into
    out = (flip * probs)[1:]
    return out if out.size else np.zeros(1)


def _per_atom(
    filters: FilterTable | Sequence[FilterTable],
    cases: AtomCase | Sequence[AtomCase],
    m: int,
) -> tuple[list[FilterTable], list[AtomCase]]:
    tables = [filters] * m if isinstance(filters, FilterTable) else list(filters)
    case_list = [cases] * m if isinstance(cases, AtomCase) else [AtomCase(c) for c in cases]
    if len(tables) != m or len(case_list) != m:
        raise InvalidSpecError(
            f"need one filter and one case per atom: m={m}, "
            f"{len(tables)} filters, {len(case_list)} cases"
        )
    return tables, case_list


def _as_sequence(k: OutcomeSequence | Sequence[int], cases: list[AtomCase]) -> OutcomeSequence:
    if isinstance(k, OutcomeSequence):
        return k
    try:
        return OutcomeSequence(entries=tuple(int(x) for x in k), cases=tuple(cases))
    except ValidationError as e:
        raise InvalidSpecError(f"invalid outcome sequence: {e.errors()[0]['msg']}") from e


# -----------------------------------------------------------------------------
# Selective measurements
# -----------------------------------------------------------------------------

def detection_probability(d: PhotonDistribution, f: FilterTable, case: AtomCase) -> tuple[float, float]:
    """
    Probabilities of finding the outgoing atom in |+> and in |->.

    Case a: P(+) = sum_n s(n + 1) P(n). Case b: P(+) = sum_n (1 - s(n)) P(n).
    """
    _require_normalized(d)
    size = d.nmax + 1
    if not f.covers(_needed_manifold(size, case)):
        raise FilterIndexError(
            f"filter table covers manifolds up to {f.nmax}, need {_needed_manifold(size, case)}",
            table_nmax=f.nmax,
            required_nmax=_needed_manifold(size, case),
        )
    if case is AtomCase.A:
        p_up = math.fsum(f.p_plus[1 : size + 1] * d.probs)
    else:
        p_up = math.fsum(f.p_minus[:size] * d.probs)
    p_up = min(1.0, max(0.0, p_up))
    return p_up, 1.0 - p_up


def apply_selective(
    d: PhotonDistribution, f: FilterTable, case: AtomCase, outcome: int
) -> tuple[PhotonDistribution, float]:
    """
    Condition the field on one recorded outcome.

    Returns:
        (normalized conditional distribution, probability of the outcome)

    Raises:
        InvalidSpecError: outcome not admissible for the case
        ImpossibleOutcomeError: outcome probability below 1e-300
    """
    _check_outcome(case, outcome)
    _require_normalized(d)
    f = _covering(f, _needed_manifold(d.nmax + 1, case))
    weights = _branch(d.probs, f, case, outcome)
    prob = math.fsum(weights)
    if prob < Config.IMPOSSIBLE_PROBABILITY:
        raise ImpossibleOutcomeError(
            f"outcome {outcome:+d} has probability {prob:.3e} for case {case.value}",
            outcome=outcome,
            probability=prob,
        )
    return PhotonDistribution(probs=weights / prob), min(1.0, prob)


def sequence_probability(
    d0: PhotonDistribution,
    filters: FilterTable | Sequence[FilterTable],
    cases: AtomCase | Sequence[AtomCase],
    k: OutcomeSequence | Sequence[int],
) -> float:
    """
    Probability of recording the whole sequence k, i.e. the mass left after
    applying every outcome's filter without renormalizing. Impossible
    sequences give 0.
    """
    _require_normalized(d0)
    m = len(k.entries) if isinstance(k, OutcomeSequence) else len(k)
    tables, case_list = _per_atom(filters, cases, m)
    sequence = _as_sequence(k, case_list)

    weights = d0.probs
    for j, (outcome, case) in enumerate(zip(sequence.entries, sequence.cases)):
        table = _covering(tables[j], _needed_manifold(weights.size, case))
        weights = _branch(weights, table, case, outcome)
        if not np.any(weights > 0.0):
            return 0.0
    return min(1.0, math.fsum(weights))


def iter_branches(
    d0: PhotonDistribution, tables: list[FilterTable], cases: list[AtomCase]
) -> Iterator[tuple[tuple[int, ...], np.ndarray]]:
    """Depth-first walk over every admissible outcome sequence with nonzero weight."""
    stack = [((), d0.probs)]
    while stack:
        prefix, weights = stack.pop()
        j = len(prefix)
        if j == len(tables):
            yield prefix, weights
            continue
        case = cases[j]
        tables[j] = _covering(tables[j], _needed_manifold(weights.size, case))
        for outcome in (FLIP_FOR_CASE[case], 0):
            branch = _branch(weights, tables[j], case, outcome)
            if np.any(branch > 0.0):
                stack.append((prefix + (outcome,), branch))


def _check_enumeration_size(m: int) -> None:
    if m > Config.MAX_BRUTE_FORCE_ATOMS:
        raise EnumerationLimitError(
            f"enumerating 2^{m} outcome sequences refused; m must be <= {Config.MAX_BRUTE_FORCE_ATOMS}",
            m=m,
            limit=Config.MAX_BRUTE_FORCE_ATOMS,
        )


def enumerate_trajectories(
    d0: PhotonDistribution,
    filters: FilterTable | Sequence[FilterTable],
    cases: AtomCase | Sequence[AtomCase],
    m: int,
) -> list[Trajectory]:
    """Every possible outcome sequence with its probability and conditional field."""
    _check_enumeration_size(m)
    _require_normalized(d0)
    tables, case_list = _per_atom(filters, cases, m)
    trajectories = []
    for prefix, weights in iter_branches(d0, tables, case_list):
        prob = math.fsum(weights)
        trajectories.append(
            Trajectory(
                sequence=OutcomeSequence(entries=prefix, cases=tuple(case_list)),
                probability=min(1.0, prob),
                final=PhotonDistribution(probs=weights / prob),
            )
        )
    trajectories.sort(key=lambda t: t.sequence.entries)
    return trajectories


def sample_trajectories(
    d0: PhotonDistribution,
    filters: FilterTable | Sequence[FilterTable],
    cases: AtomCase | Sequence[AtomCase],
    m: int,
    count: int,
    seed: int = 0,
) -> list[Trajectory]:
    """
    Monte Carlo realisation of the selective process.

    Trajectory i draws its outcomes from np.random.default_rng([seed, i]), so
    any subset of trajectories can be reproduced independently of the others.
    Conditional distributions are shared between trajectories with the same
    outcome prefix.
    """
    if count < 1:
        raise InvalidSpecError(f"count must be >= 1, got {count}", count=count)
    _require_normalized(d0)
    tables, case_list = _per_atom(filters, cases, m)

    # prefix -> (normalized probs, flip probability, flip probs, stay probs)
    nodes: dict[tuple[int, ...], tuple] = {}
    finals: dict[tuple[int, ...], PhotonDistribution] = {(): d0}
    states: dict[tuple[int, ...], np.ndarray] = {(): d0.probs}

    def children(prefix: tuple[int, ...]) -> tuple:
        if prefix not in nodes:
            j = len(prefix)
            probs = states[prefix]
            case = case_list[j]
            tables[j] = _covering(tables[j], _needed_manifold(probs.size, case))
            flip = _branch(probs, tables[j], case, FLIP_FOR_CASE[case])
            stay = _branch(probs, tables[j], case, 0)
            p_flip, p_stay = math.fsum(flip), math.fsum(stay)
            total = p_flip + p_stay
            nodes[prefix] = (p_flip / total, flip, stay, p_flip, p_stay)
        return nodes[prefix]

    trajectories = []
    for index in range(count):
        rng = np.random.default_rng([seed, index])
        draws = rng.random(m)
        prefix: tuple[int, ...] = ()
        probability = 1.0
        for j in range(m):
            threshold, flip, stay, p_flip, p_stay = children(prefix)
            flipped = draws[j] < threshold
            outcome = FLIP_FOR_CASE[case_list[j]] if flipped else 0
            weights, p = (flip, p_flip) if flipped else (stay, p_stay)
            prefix = prefix + (outcome,)
            probability *= p
            if prefix not in states:
                states[prefix] = weights / p
        if prefix not in finals:
            finals[prefix] = PhotonDistribution(probs=states[prefix])
        trajectories.append(
            Trajectory(
                sequence=OutcomeSequence(entries=prefix, cases=tuple(case_list)),
                probability=min(1.0, probability),
                final=finals[prefix],
            )
        )

    logger.info(f"sample_trajectories: {count} trajectories, {len(states)} distinct conditional states")
    return trajectories


# -----------------------------------------------------------------------------
# Nonselective measurements
# -----------------------------------------------------------------------------

def ensemble_step(d: PhotonDistribution, f: FilterTable, case: AtomCase) -> PhotonDistribution:
    """
    One atom with its outcome discarded.

    Case a: P'(n) = s(n + 1) P(n) + (1 - s(n)) P(n - 1), growing nmax by one
    whenever mass flows past the top. Case b: P'(n) = s(n) P(n) + (1 - s(n + 1)) P(n + 1).
    """
    _require_normalized(d)
    probs = d.probs
    size = probs.size
    f = _covering(f, _needed_manifold(size, case))

    if case is AtomCase.A:
        stay = f.p_plus[1 : size + 1]
        out = np.zeros(size + 1)
        out[:size] += stay * probs
        out[1:] += (1.0 - stay) * probs
        if out[-1] == 0.0:
            out = out[:-1]
        else:
            logger.debug(f"ensemble_step: nmax grown to {size}")
    else:
        stay = f.p_plus[:size]
        flip = 1.0 - stay
        flip[0] = 0.0
        out = stay * probs
        out[:-1] += (flip * probs)[1:]
    return PhotonDistribution(probs=out)


def ensemble_run(d0: PhotonDistribution, f: FilterTable, case: AtomCase, m: int) -> list[PhotonDistribution]:
    """History [P_0, P_1, ..., P_m] of the nonselective recurrence."""
    if m < 0:
        raise InvalidSpecError(f"m must be >= 0, got {m}", m=m)
    history = [d0]
    for _ in range(m):
        f = ensure_coverage(f, _needed_manifold(history[-1].nmax + 1, case))
        history.append(ensemble_step(history[-1], f, case))
    return history


def brute_force_ensemble(d0: PhotonDistribution, f: FilterTable, case: AtomCase, m: int) -> PhotonDistribution:
    """
    Ensemble distribution as the probability-weighted sum of every
    conditional distribution. Exponential in m; only an oracle.
    """
    _check_enumeration_size(m)
    _require_normalized(d0)
    tables, case_list = _per_atom(f, case, m)
    total = np.zeros(d0.nmax + 1)
    for _, weights in iter_branches(d0, tables, case_list):
        if weights.size > total.size:
            total = np.concatenate([total, np.zeros(weights.size - total.size)])
        total[: weights.size] += weights
    return PhotonDistribution(probs=total)


# -----------------------------------------------------------------------------
# Adiabatic closed forms
# -----------------------------------------------------------------------------

def binomial_closed_form(kappa: Kappa | float, m: int) -> PhotonDistribution:
    """P_m(n) = C(m, n) kappa^(m - n) (1 - kappa)^n over n = 0..m (vacuum start)."""
    if m < 0:
        raise InvalidSpecError(f"m must be >= 0, got {m}", m=m)
    value = kappa.value if isinstance(kappa, Kappa) else Kappa(value=kappa).value
    n = np.arange(m + 1)
    if m <= BINOMIAL_LOG_SPACE_M:
        probs = comb(m, n) * np.power(value, m - n) * np.power(1.0 - value, n)
    else:
        log_probs = (
            gammaln(m + 1) - gammaln(n + 1) - gammaln(m - n + 1)
            + xlogy(m - n, value) + xlogy(n, 1.0 - value)
        )
        probs = np.exp(log_probs)
    return PhotonDistribution(probs=probs)


def adiabatic_shift_law(d0: PhotonDistribution, case: AtomCase, m: int) -> PhotonDistribution:
    """
    Perfect adiabatic crossings (kappa = 0): case a adds one photon per atom,
    P_m(n) = P_0(n - m); case b removes one, P_m(n) = P_0(n + m), with the
    vacuum collecting everything that would fall below n = 0.
    """
    if m < 0:
        raise InvalidSpecError(f"m must be >= 0, got {m}", m=m)
    if case is AtomCase.A:
        return fockspace.shift(fockspace.pad(d0, d0.nmax + m), -m)
    erased = fockspace.shift(d0, m).probs.copy()
    erased[0] = math.fsum(d0.probs[: m + 1])
    return PhotonDistribution(probs=erased)
