# =============================================================================
# cavity/filters.py
# =============================================================================
# Purpose:
# Filter functions of the Demkov-Kunike model, in four flavours:
# - dk_filter:          exact closed form (cosine form, analytically continued)
# - adiabatic_filter:   the kappa step  [1, kappa, kappa, ...]
# - resonant_filter:    cos^2(pi * eta * sqrt(n)) for E_bar = E0 = 0
# - numeric_filter:     tabulated from the ODE propagator
#
# With x = pi * (L1 + L2), y = pi * (L1 - L2) and C = 2 cosh(x) cosh(y) the
# exact stay probability is
#
#     L1 > L2:   1 - cosh(2 pi L2) / C + cos(2 pi sqrt(eta^2 n - L2^2)) / C
#     L1 <= L2:  cosh(2 pi L1) / C + cos(2 pi sqrt(eta^2 n - L2^2)) / C
#
# (the two lines are the same function; each is the well-conditioned one on
# its side). Below eta^2 n = L2^2 the cosine becomes cosh(2 pi sqrt(L2^2 - eta^2 n)).
# Hyperbolic ratios are formed from log-cosh differences so |L| up to 50 never
# overflows. Only |L1| and |L2| enter: the transition probability is unchanged
# by reversing the sweep direction or the sign of the detuning.
# =============================================================================

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Sequence

import numpy as np

from cavity import dynamics
from config import Config
from models.errors import FilterRangeError, InvalidSpecError
from models.filter_table import (
    AdiabaticFilterSpec,
    DKFilterSpec,
    FilterProvenance,
    FilterSpec,
    FilterTable,
    Kappa,
    NumericFilterSpec,
    ResonantFilterSpec,
)
from models.pulse import AtomCase, DKParams

logger = logging.getLogger(__name__)

LOG2 = math.log(2.0)

# extra rows built whenever a table has to grow
GROWTH_HEADROOM = 16


# -----------------------------------------------------------------------------
# Helpers
# -----------------------------------------------------------------------------

def _log_cosh(x):
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - LOG2


def _check_range(lambda1: float, lambda2: float, eta: float) -> None:
    if eta < 0:
        raise InvalidSpecError(f"eta must be >= 0, got {eta}", eta=eta)
    for name, value in (("lambda1", lambda1), ("lambda2", lambda2), ("eta", eta)):
        if not math.isfinite(value):
            raise FilterRangeError(f"{name} must be finite, got {value}", **{name: value})
    worst = max(abs(lambda1), abs(lambda2))
    if worst > Config.MAX_SAFE_LAMBDA:
        raise FilterRangeError(
            f"|lambda| = {worst} exceeds the evaluated range {Config.MAX_SAFE_LAMBDA}",
            lambda1=lambda1,
            lambda2=lambda2,
        )


def _check_nmax(nmax: int) -> None:
    if nmax < 0:
        raise InvalidSpecError(f"nmax must be >= 0, got {nmax}", nmax=nmax)


def _log_denominator(l1: float, l2: float) -> float:
    return LOG2 + float(_log_cosh(math.pi * (l1 + l2))) + float(_log_cosh(math.pi * (l1 - l2)))


# -----------------------------------------------------------------------------
# Exact Demkov-Kunike filter
# -----------------------------------------------------------------------------

def dk_stay_probability(lambda1: float, lambda2: float, eta: float, n) -> np.ndarray:
    """
    Exact stay probability for (real) photon numbers `n`.

    Accepts non-integer n so the continuation across eta^2 n = L2^2 can be
    probed directly. n = 0 is NOT special-cased here.
    """
    _check_range(lambda1, lambda2, eta)
    l1, l2 = abs(lambda1), abs(lambda2)
    n = np.atleast_1d(np.asarray(n, dtype=float))
    log_den = _log_denominator(l1, l2)

    disc = eta * eta * n - l2 * l2
    osc = np.empty_like(n)
    oscillating = disc >= 0.0
    osc[oscillating] = np.cos(2.0 * math.pi * np.sqrt(disc[oscillating])) * math.exp(-log_den)
    osc[~oscillating] = np.exp(_log_cosh(2.0 * math.pi * np.sqrt(-disc[~oscillating])) - log_den)

    if l1 > l2:
        p = 1.0 - math.exp(float(_log_cosh(2.0 * math.pi * l2)) - log_den) + osc
    else:
        p = math.exp(float(_log_cosh(2.0 * math.pi * l1)) - log_den) + osc
    return np.clip(p, 0.0, 1.0)


def dk_filter(lambda1: float, lambda2: float, eta: float, nmax: int) -> FilterTable:
    """Exact Demkov-Kunike filter table; p_plus[0] = 1 in both branches."""
    _check_nmax(nmax)
    p_plus = dk_stay_probability(lambda1, lambda2, eta, np.arange(nmax + 1))
    p_plus[0] = 1.0
    return FilterTable(
        p_plus=p_plus,
        provenance=FilterProvenance.EXACT_DK,
        spec=DKFilterSpec(lambda1=lambda1, lambda2=lambda2, eta=eta),
    )


def dk_filter_hyperbolic(lambda1: float, lambda2: float, eta: float, nmax: int) -> np.ndarray:
    """
    The sinh/cosh product form of the same filter, evaluated with complex
    square roots. Debug cross-check only: overflows for |lambda| beyond ~100
    and loses accuracy long before that.
    """
    _check_range(lambda1, lambda2, eta)
    _check_nmax(nmax)
    l1, l2 = abs(lambda1), abs(lambda2)
    n = np.arange(nmax + 1, dtype=float)
    root = np.sqrt((l2 * l2 - eta * eta * n).astype(complex))
    den = math.cosh(math.pi * (l1 + l2)) * math.cosh(math.pi * (l1 - l2))
    if l1 > l2:
        p = 1.0 - (np.sinh(math.pi * (l2 + root)) * np.sinh(math.pi * (l2 - root))).real / den
    else:
        p = (np.cosh(math.pi * (l1 + root)) * np.cosh(math.pi * (l1 - root))).real / den
    return p


# -----------------------------------------------------------------------------
# Adiabatic limit
# -----------------------------------------------------------------------------

def adiabatic_kappa(lambda1: float, lambda2: float) -> Kappa:
    """Non-oscillating part of the exact filter; 0.5 on |L1| = |L2|."""
    l1, l2 = abs(lambda1), abs(lambda2)
    log_den = _log_denominator(l1, l2)
    if l1 > l2:
        value = 1.0 - math.exp(float(_log_cosh(2.0 * math.pi * l2)) - log_den)
    else:
        value = math.exp(float(_log_cosh(2.0 * math.pi * l1)) - log_den)
    return Kappa(value=min(1.0, max(0.0, value)))


def adiabatic_filter(kappa: Kappa | float, nmax: int) -> FilterTable:
    _check_nmax(nmax)
    value = kappa.value if isinstance(kappa, Kappa) else Kappa(value=kappa).value
    p_plus = np.full(nmax + 1, value)
    p_plus[0] = 1.0
    return FilterTable(
        p_plus=p_plus,
        provenance=FilterProvenance.ADIABATIC_KAPPA,
        spec=AdiabaticFilterSpec(kappa=value),
    )


# -----------------------------------------------------------------------------
# Resonant (non-adiabatic) limit
# -----------------------------------------------------------------------------

def resonant_filter(eta: float, nmax: int) -> FilterTable:
    """
    cos^2(pi eta sqrt(n)). Where eta sqrt(n) is an integer to within
    TRAP_TOLERANCE the entry is set to exactly 1, so trapping states block
    the ladder exactly rather than up to rounding.
    """
    if eta < 0:
        raise InvalidSpecError(f"eta must be >= 0, got {eta}", eta=eta)
    _check_nmax(nmax)
    x = eta * np.sqrt(np.arange(nmax + 1, dtype=float))
    p_plus = np.cos(math.pi * x) ** 2
    trapped = np.abs(x - np.round(x)) <= Config.TRAP_TOLERANCE * np.maximum(1.0, x)
    p_plus[trapped] = 1.0
    return FilterTable(
        p_plus=p_plus,
        provenance=FilterProvenance.RESONANT,
        spec=ResonantFilterSpec(eta=eta),
    )


# -----------------------------------------------------------------------------
# Numeric filter
# -----------------------------------------------------------------------------

def _numeric_row(job: tuple) -> float:
    params, n, case, window, tol = job
    return dynamics.stay_probability(params, n, case, window, tol)


def _numeric_rows(
    params: DKParams, case: AtomCase, ns: Iterable[int], window: float, tol: float, workers: int
) -> list[float]:
    jobs = [(params, n, case, window, tol) for n in ns]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_numeric_row, jobs))
    return [_numeric_row(job) for job in jobs]


def numeric_filter(
    params: DKParams,
    case: AtomCase,
    nmax: int,
    window: float = Config.WINDOW,
    tol: float = Config.TOL,
    workers: int = 1,
) -> FilterTable:
    """Stay probabilities from the propagator, one manifold per row."""
    _check_nmax(nmax)
    rows = _numeric_rows(params, case, range(nmax + 1), window, tol, workers)
    logger.debug(f"numeric_filter: {nmax + 1} manifolds for case {case.value}")
    return FilterTable(
        p_plus=rows,
        provenance=FilterProvenance.NUMERIC,
        spec=NumericFilterSpec(
            lambda1=params.lambda1, lambda2=params.lambda2, eta=params.eta,
            case=case, window=window, tol=tol,
        ),
    )


# -----------------------------------------------------------------------------
# Declarative construction and growth
# -----------------------------------------------------------------------------

def build_filter(spec: FilterSpec, nmax: int) -> FilterTable:
    if isinstance(spec, DKFilterSpec):
        return dk_filter(spec.lambda1, spec.lambda2, spec.eta, nmax)
    if isinstance(spec, ResonantFilterSpec):
        return resonant_filter(spec.eta, nmax)
    if isinstance(spec, NumericFilterSpec):
        params = DKParams.from_dimensionless(spec.lambda1, spec.lambda2, spec.eta)
        return numeric_filter(params, spec.case, nmax, spec.window, spec.tol)
    if spec.kappa is not None:
        return adiabatic_filter(spec.kappa, nmax)
    if spec.lambda1 is None or spec.lambda2 is None:
        raise InvalidSpecError("adiabatic filter needs kappa or both lambda1 and lambda2")
    return adiabatic_filter(adiabatic_kappa(spec.lambda1, spec.lambda2), nmax)


def ensure_coverage(table: FilterTable, nmax: int) -> FilterTable:
    """
    Return a table covering manifolds 0..nmax, rebuilding from its spec
    (with some headroom) when it is too short. Tables without a spec are
    returned unchanged; callers then raise FilterIndexError.
    """
    if table.covers(nmax) or table.spec is None:
        return table
    target = nmax + GROWTH_HEADROOM
    logger.debug(f"ensure_coverage: growing {table.provenance.value} table {table.nmax} -> {target}")
    spec = table.spec
    if isinstance(spec, NumericFilterSpec):
        # keep the rows already integrated
        params = DKParams.from_dimensionless(spec.lambda1, spec.lambda2, spec.eta)
        extra = _numeric_rows(params, spec.case, range(table.nmax + 1, target + 1), spec.window, spec.tol, 1)
        return FilterTable(
            p_plus=np.concatenate([table.p_plus, extra]), provenance=table.provenance, spec=spec
        )
    return build_filter(spec, target)


# -----------------------------------------------------------------------------
# Oracle comparison
# -----------------------------------------------------------------------------

def oracle_deviation(
    lambda1s: Sequence[float],
    lambda2s: Sequence[float],
    etas: Sequence[float],
    nmax: int,
    window: float = Config.WINDOW,
    tol: float = Config.TOL,
    workers: int = 1,
) -> list[tuple[float, float, float, int, float, float, float]]:
    """
    Compare dk_filter with numeric_filter over a parameter grid.

    Returns rows (lambda1, lambda2, eta, n, analytic, numeric, abs_diff).
    """
    rows = []
    for lambda1 in lambda1s:
        for lambda2 in lambda2s:
            for eta in etas:
                analytic = dk_filter(lambda1, lambda2, eta, nmax).p_plus
                params = DKParams.from_dimensionless(lambda1, lambda2, eta)
                numeric = numeric_filter(params, AtomCase.A, nmax, window, tol, workers).p_plus
                for n in range(nmax + 1):
                    diff = abs(float(analytic[n]) - float(numeric[n]))
                    rows.append((lambda1, lambda2, eta, n, float(analytic[n]), float(numeric[n]), diff))
    if rows:
        logger.info(f"oracle_deviation: max |analytic - numeric| = {max(r[-1] for r in rows):.3e}")
    return rows
