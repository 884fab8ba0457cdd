import math

import pytest

from cavity import dynamics
from cavity.filters import dk_stay_probability
from models.errors import InvalidSpecError
from models.pulse import AtomCase, DKParams, TabulatedPulse


def resonant(eta: float) -> DKParams:
    return DKParams.from_dimensionless(0.0, 0.0, eta)


def test_full_rabi_cycle_returns_to_upper_level():
    p_plus, p_minus = dynamics.transition_probabilities(resonant(1.0), 1, AtomCase.A)
    assert p_plus == pytest.approx(1.0, abs=1e-6)
    assert p_minus == pytest.approx(0.0, abs=1e-6)


def test_resonant_pulse_area():
    p_plus, _ = dynamics.transition_probabilities(resonant(1.0), 2, AtomCase.A)
    assert p_plus == pytest.approx(math.cos(math.pi * math.sqrt(2)) ** 2, abs=1e-6)


@pytest.mark.parametrize("eta", [0.3, 1.0, 2.5])
@pytest.mark.parametrize("n", range(1, 51))
def test_resonant_oracle(eta, n):
    p_plus, _ = dynamics.transition_probabilities(resonant(eta), n, AtomCase.A)
    assert p_plus == pytest.approx(math.cos(math.pi * eta * math.sqrt(n)) ** 2, abs=1e-6)


def test_demkov_kunike_crossing_matches_closed_form():
    params = DKParams.from_dimensionless(0.0, 2.0, 2.0)
    p_plus, _ = dynamics.transition_probabilities(params, 4, AtomCase.A)
    assert p_plus == pytest.approx(float(dk_stay_probability(0.0, 2.0, 2.0, 4)[0]), abs=1e-6)


def test_dimensional_parameters_only_enter_through_products():
    scaled = DKParams(e_bar=0.25, e0=1.0, g0=0.5, t_scale=2.0)
    unit = DKParams.from_dimensionless(0.5, 2.0, 1.0)
    assert scaled.lambda1 == unit.lambda1 and scaled.eta == unit.eta
    a = dynamics.stay_probability(scaled, 3, AtomCase.A)
    b = dynamics.stay_probability(unit, 3, AtomCase.A)
    assert a == pytest.approx(b, abs=1e-8)


def test_empty_manifold_keeps_the_atom():
    assert dynamics.transition_probabilities(resonant(1.0), 0, AtomCase.A) == (1.0, 0.0)
    assert dynamics.transition_probabilities(resonant(1.0), 0, AtomCase.B) == (0.0, 1.0)
    assert dynamics.stay_probability(resonant(1.0), 0, AtomCase.B) == 1.0


def test_no_coupling_means_no_transition():
    p_plus, p_minus = dynamics.transition_probabilities(DKParams.from_dimensionless(1.0, 2.0, 0.0), 5, AtomCase.A)
    assert p_plus == pytest.approx(1.0, abs=1e-12)
    assert p_minus == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("lambdas", [(0.5, 1.0, 0.7), (2.0, 0.5, 1.3), (1.0, 1.0, 0.4)])
def test_flip_probability_is_the_same_for_both_cases(lambdas):
    params = DKParams.from_dimensionless(*lambdas)
    p_a, m_a = dynamics.transition_probabilities(params, 3, AtomCase.A)
    p_b, m_b = dynamics.transition_probabilities(params, 3, AtomCase.B)
    assert p_a + m_a == pytest.approx(1.0, abs=1e-9)
    # case a flips into |->, case b flips into |+>
    assert m_a == pytest.approx(p_b, abs=1e-9)


def test_norm_is_preserved():
    params = DKParams.from_dimensionless(3.0, -2.0, 4.0)
    amplitudes = dynamics.propagate(params, 10, AtomCase.A)
    assert abs(amplitudes.norm - 1.0) < 1e-8


def test_window_convergence():
    params = DKParams.from_dimensionless(0.5, 1.5, 1.0)
    narrow = dynamics.stay_probability(params, 4, AtomCase.A, window=20.0)
    wide = dynamics.stay_probability(params, 4, AtomCase.A, window=40.0)
    assert narrow == pytest.approx(wide, abs=1e-8)


def test_rk45_agrees_with_default_method():
    params = DKParams.from_dimensionless(0.5, 1.0, 1.0)
    default = dynamics.stay_probability(params, 2, AtomCase.A)
    rk45 = dynamics.stay_probability(params, 2, AtomCase.A, tol=1e-10, method="RK45")
    assert default == pytest.approx(rk45, abs=1e-7)


def test_tabulated_square_pulse():
    # constant coupling g over a time tau: |a+|^2 = cos^2(g sqrt(n) tau)
    tau = math.pi / 4
    pulse = TabulatedPulse(times=[0.0, tau], detuning=[0.0, 0.0], coupling=[1.0, 1.0])
    p_plus, _ = dynamics.transition_probabilities(pulse, 1, AtomCase.A)
    assert p_plus == pytest.approx(0.5, abs=1e-8)
    assert pulse.half_detuning(0.3) == 0.0 and pulse.coupling_at(0.3) == 1.0


def test_tabulated_pulse_with_constant_detuning():
    # half detuning d and coupling c sqrt(n) held fixed: Rabi formula with W = sqrt(c^2 n + d^2)
    d, c, n = 0.5, 0.25, 4
    w = math.hypot(d, c * math.sqrt(n))
    tau = math.pi / (2 * w)
    pulse = TabulatedPulse(times=[0.0, tau], detuning=[2 * d, 2 * d], coupling=[c, c])
    p_plus, p_minus = dynamics.transition_probabilities(pulse, n, AtomCase.A)
    assert p_plus == pytest.approx(1.0 - (c * c * n) / (w * w), abs=1e-6)
    assert p_plus + p_minus == pytest.approx(1.0, abs=1e-6)


def test_tabulated_pulse_validation():
    with pytest.raises(ValueError):
        TabulatedPulse(times=[0.0, 0.0], detuning=[0.0, 0.0], coupling=[1.0, 1.0])
    with pytest.raises(ValueError):
        TabulatedPulse(times=[0.0, 1.0], detuning=[0.0], coupling=[1.0, 1.0])


@pytest.mark.parametrize(
    "kwargs",
    [{"n": 0}, {"n": 1, "tol": 0.0}, {"n": 1, "window": 5.0}, {"n": 1, "window": 500.0}],
)
def test_invalid_arguments(kwargs):
    n = kwargs.pop("n")
    with pytest.raises(InvalidSpecError):
        dynamics.propagate(resonant(1.0), n, AtomCase.A, **kwargs)
