# =============================================================================
# cavity/dynamics.py
# =============================================================================
# Purpose:
# Numerical propagation of one two-level manifold
#
#     i d/dt [a+, a-] = [[dw/2, g sqrt(n)], [g sqrt(n), -dw/2]] [a+, a-]
#
# with time-dependent detuning and coupling. The result is independent of the
# closed-form filter functions, which is what makes it usable as their oracle.
#
# Demkov-Kunike pulses are integrated in the dimensionless time s = t / T over
# s in [-window, +window]; tabulated pulses over their own sample range.
# =============================================================================

import logging
import math

import numpy as np
from scipy.integrate import solve_ivp

from config import Config
from models.errors import InvalidSpecError, NormalizationError, PropagationError
from models.pulse import AtomCase, DKParams, TabulatedPulse, TwoLevelAmplitudes

logger = logging.getLogger(__name__)

# tanh/sech are evaluated with math.cosh, which overflows near |s| = 710
MAX_WINDOW = 300.0
MIN_WINDOW = 10.0


def _dk_rhs(lambda1: float, lambda2: float, coupling: float):
    def rhs(s, y):
        d = lambda1 + lambda2 * math.tanh(s)
        c = coupling / math.cosh(s)
        a_plus, a_minus = y[0], y[1]
        return np.array((-1j * (d * a_plus + c * a_minus), -1j * (c * a_plus - d * a_minus)))

    return rhs


def _tabulated_rhs(pulse: TabulatedPulse, sqrt_n: float):
    def rhs(t, y):
        d = pulse.half_detuning(t)
        c = sqrt_n * pulse.coupling_at(t)
        a_plus, a_minus = y[0], y[1]
        return np.array((-1j * (d * a_plus + c * a_minus), -1j * (c * a_plus - d * a_minus)))

    return rhs


def propagate(
    params: DKParams | TabulatedPulse,
    n: int,
    case: AtomCase,
    window: float = Config.WINDOW,
    tol: float = Config.TOL,
    method: str = Config.INTEGRATOR,
) -> TwoLevelAmplitudes:
    """
    Integrate manifold n from the case's initial condition to the end of the pulse.

    Args:
        params: Demkov-Kunike parameters or a tabulated pulse
        n: manifold photon number, >= 1
        case: AtomCase.A starts in |+>, AtomCase.B in |->
        window: half-width of the DK integration range in units of T (ignored for tabulated pulses)
        tol: relative and absolute tolerance handed to the embedded Runge-Kutta stepper
        method: scipy.integrate.solve_ivp method ("DOP853" or "RK45")

    Returns:
        TwoLevelAmplitudes; only the moduli are meaningful, the global phase is arbitrary

    Raises:
        InvalidSpecError: n < 1, tol <= 0 or window outside [10, 300]
        PropagationError: the stepper failed, reported with the time and last step size
        NormalizationError: |a+|^2 + |a-|^2 drifted from 1 by more than NORM_DRIFT_LIMIT
    """
    if n < 1:
        raise InvalidSpecError(f"manifold n must be >= 1, got {n}", n=n)
    if tol <= 0:
        raise InvalidSpecError(f"tolerance must be > 0, got {tol}", tol=tol)

    if isinstance(params, TabulatedPulse):
        rhs = _tabulated_rhs(params, math.sqrt(n))
        span = (params.times[0], params.times[-1])
    else:
        if not MIN_WINDOW <= window <= MAX_WINDOW:
            raise InvalidSpecError(
                f"window must lie in [{MIN_WINDOW}, {MAX_WINDOW}] (units of T), got {window}",
                window=window,
            )
        rhs = _dk_rhs(params.lambda1, params.lambda2, params.eta * math.sqrt(n))
        span = (-window, window)

    y0 = np.array(case.initial_amplitudes, dtype=complex)
    sol = solve_ivp(rhs, span, y0, method=method, rtol=tol, atol=tol)

    if not sol.success:
        t_fail = float(sol.t[-1])
        step = float(sol.t[-1] - sol.t[-2]) if sol.t.size > 1 else float("nan")
        raise PropagationError(
            f"integrator stopped at t={t_fail:.6g} (step {step:.3e}): {sol.message}",
            t=t_fail,
            step=step,
            n=n,
        )

    amplitudes = TwoLevelAmplitudes(a_plus=complex(sol.y[0, -1]), a_minus=complex(sol.y[1, -1]))
    drift = abs(amplitudes.norm ** 2 - 1.0)
    if drift > Config.NORM_DRIFT_LIMIT:
        raise NormalizationError(
            f"norm drifted by {drift:.3e} in manifold n={n}; tighten tol", drift=drift, n=n
        )
    if drift > 10 * tol:
        logger.warning(f"propagate: norm drift {drift:.3e} exceeds 10*tol in manifold n={n}")
    return amplitudes


def transition_probabilities(
    params: DKParams | TabulatedPulse,
    n: int,
    case: AtomCase,
    window: float = Config.WINDOW,
    tol: float = Config.TOL,
    method: str = Config.INTEGRATOR,
) -> tuple[float, float]:
    """
    (|a+|^2, |a-|^2) after the passage, renormalized to sum to one.

    The n = 0 manifold only holds |0,->, so nothing can happen there: the
    atom keeps its level, (1, 0) for case a and (0, 1) for case b.
    """
    if n == 0:
        return (1.0, 0.0) if case is AtomCase.A else (0.0, 1.0)

    p_plus, p_minus = propagate(params, n, case, window, tol, method).populations
    total = p_plus + p_minus
    p_plus = min(1.0, max(0.0, p_plus / total))
    return p_plus, 1.0 - p_plus


def stay_probability(
    params: DKParams | TabulatedPulse,
    n: int,
    case: AtomCase,
    window: float = Config.WINDOW,
    tol: float = Config.TOL,
    method: str = Config.INTEGRATOR,
) -> float:
    """Probability that the atom leaves in the level it entered."""
    p_plus, p_minus = transition_probabilities(params, n, case, window, tol, method)
    return p_plus if case is AtomCase.A else p_minus
