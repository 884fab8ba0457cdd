import json
import math

import numpy as np
import pytest

from cavity import fockspace
from models.distribution import InitialFieldSpec, PhotonDistribution
from models.errors import InvalidSpecError, NormalizationError, TruncationError


# -----------------------------------------------------------------------------
# make_distribution
# -----------------------------------------------------------------------------

def test_vacuum_is_delta_at_zero():
    d = fockspace.make_distribution(InitialFieldSpec.vacuum(), nmax=5)
    assert d.probs.tolist() == [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]


def test_fock_state_is_delta():
    d = fockspace.make_distribution(InitialFieldSpec.fock(3), nmax=5)
    assert d.probs.tolist() == [0.0, 0.0, 0.0, 1.0, 0.0, 0.0]


def test_fock_state_above_cutoff_is_rejected():
    with pytest.raises(InvalidSpecError):
        fockspace.make_distribution(InitialFieldSpec.fock(7), nmax=5)


def test_coherent_state_is_poissonian():
    d = fockspace.make_distribution(InitialFieldSpec.coherent(4.0), nmax=30)
    assert d.probs[4] == pytest.approx(math.exp(-4) * 4**4 / 24, abs=1e-12)
    assert d.probs[4] == pytest.approx(0.19537, abs=1e-5)
    assert d.mass == pytest.approx(1.0, abs=1e-12)


def test_coherent_default_cutoff_covers_tail():
    spec = InitialFieldSpec.coherent(47.0)
    d = fockspace.make_distribution(spec)
    assert d.nmax == spec.default_nmax() == math.ceil(47 + 10 * math.sqrt(47) + 20)


def test_short_cutoff_names_required_nmax():
    with pytest.raises(TruncationError) as excinfo:
        fockspace.make_distribution(InitialFieldSpec.coherent(47.0), nmax=60)
    required = excinfo.value.required_nmax
    assert required is not None and required > 60
    # the suggested cutoff is enough
    fockspace.make_distribution(InitialFieldSpec.coherent(47.0), nmax=required)


def test_coherent_spec_requires_nbar():
    with pytest.raises(ValueError):
        InitialFieldSpec(kind="coherent")


# -----------------------------------------------------------------------------
# Moments
# -----------------------------------------------------------------------------

def test_fock_moments_are_exact():
    d = fockspace.make_distribution(InitialFieldSpec.fock(7), nmax=10)
    assert fockspace.mean_photon(d) == 7.0
    assert fockspace.variance(d) == 0.0


def test_vacuum_mean_is_zero():
    assert fockspace.mean_photon(fockspace.make_distribution(InitialFieldSpec.vacuum(), nmax=3)) == 0.0


def test_variance_of_small_distribution():
    d = fockspace.from_probabilities([0.25, 0.5, 0.25])
    assert fockspace.variance(d) == pytest.approx(0.5, abs=1e-15)


def test_coherent_mean_matches_nbar():
    d = fockspace.make_distribution(InitialFieldSpec.coherent(4.0), nmax=40)
    assert fockspace.mean_photon(d) == pytest.approx(4.0, abs=1e-9)
    assert fockspace.variance(d) == pytest.approx(4.0, abs=1e-9)


def test_moments_of_mixture_of_fock_states():
    a = fockspace.make_distribution(InitialFieldSpec.fock(2), nmax=4)
    b = fockspace.make_distribution(InitialFieldSpec.fock(4), nmax=4)
    mean, var = fockspace.moments_of_mixture([(0.5, a), (0.5, b)])
    assert mean == pytest.approx(3.0)
    assert var == pytest.approx(1.0)


def test_moments_of_mixture_rejects_zero_weight():
    a = fockspace.make_distribution(InitialFieldSpec.fock(2), nmax=4)
    with pytest.raises(NormalizationError):
        fockspace.moments_of_mixture([(0.0, a)])


# -----------------------------------------------------------------------------
# shift / pad / normalize
# -----------------------------------------------------------------------------

@pytest.mark.parametrize(
    "probs, nu, expected",
    [
        ([0.0, 1.0, 0.0], 1, [1.0, 0.0, 0.0]),
        ([1.0, 0.0, 0.0], -1, [0.0, 1.0, 0.0]),
        ([0.5, 0.5, 0.0], 1, [0.5, 0.0, 0.0]),
    ],
)
def test_shift(probs, nu, expected):
    shifted = fockspace.shift(fockspace.from_probabilities(probs), nu)
    assert shifted.probs.tolist() == expected


def test_shift_loses_boundary_mass():
    shifted = fockspace.shift(fockspace.from_probabilities([0.5, 0.5, 0.0]), 1)
    assert shifted.mass == pytest.approx(0.5)


def test_shift_up_then_down_restores_distribution():
    d = fockspace.from_probabilities([0.0, 0.2, 0.3, 0.5, 0.0])
    assert np.array_equal(fockspace.shift(fockspace.shift(d, 1), -1).probs, d.probs)


def test_pad_grows_with_zeros():
    d = fockspace.pad(fockspace.from_probabilities([0.5, 0.5]), 4)
    assert d.probs.tolist() == [0.5, 0.5, 0.0, 0.0, 0.0]


def test_normalize():
    d = fockspace.from_probabilities([1.0, 3.0], normalize_result=True)
    assert d.probs.tolist() == [0.25, 0.75]


def test_normalize_zero_mass():
    with pytest.raises(NormalizationError):
        fockspace.normalize(PhotonDistribution(probs=[0.0, 0.0]))


def test_negative_probability_is_rejected():
    with pytest.raises(InvalidSpecError):
        fockspace.from_probabilities([1.1, -0.1])


def test_distribution_is_read_only():
    d = fockspace.from_probabilities([0.5, 0.5])
    with pytest.raises(ValueError):
        d.probs[0] = 1.0


# -----------------------------------------------------------------------------
# Serialisation
# -----------------------------------------------------------------------------

def test_json_and_csv_forms():
    d = fockspace.from_probabilities([0.25, 0.5, 0.25])
    assert json.loads(fockspace.to_json(d)) == [0.25, 0.5, 0.25]
    assert fockspace.from_json(fockspace.to_json(d)).probs.tolist() == [0.25, 0.5, 0.25]
    assert fockspace.csv_rows(d) == [(0, 0.25), (1, 0.5), (2, 0.25)]


def test_from_json_rejects_objects():
    with pytest.raises(InvalidSpecError):
        fockspace.from_json('{"probs": [1.0]}')
