import json
import math

import numpy as np
import pytest

from cavity import fockspace, trapping
from cavity.filters import resonant_filter
from cavity.measurement import ensemble_run, ensemble_step
from models.distribution import InitialFieldSpec
from models.errors import InvalidSpecError
from models.pulse import AtomCase
from models.schedule import CustomScheduleSpec, FixedScheduleSpec, IncrementingScheduleSpec, NoiseModel, Schedule


def coherent(nbar: float):
    return fockspace.make_distribution(InitialFieldSpec.coherent(nbar))


# -----------------------------------------------------------------------------
# Trapping arithmetic
# -----------------------------------------------------------------------------

@pytest.mark.parametrize("n_prime, q, eta", [(35, 6, 1.0), (48, 7, 1.0), (63, 8, 1.0), (0, 1, 1.0)])
def test_eta_for_trap(n_prime, q, eta):
    assert trapping.eta_for_trap(n_prime, q) == pytest.approx(eta, abs=1e-15)


def test_eta_for_first_trap_at_ten():
    assert trapping.eta_for_trap(10, 1) == pytest.approx(0.301511, abs=1e-6)


def test_eta_for_trap_rejects_bad_indices():
    with pytest.raises(InvalidSpecError):
        trapping.eta_for_trap(3, 0)


def test_trap_states_for_unit_eta():
    states = trapping.trap_states(1.0, 100)
    assert [s.n_prime for s in states] == [0, 3, 8, 15, 24, 35, 48, 63, 80, 99]
    assert [s.q for s in states] == list(range(1, 11))


def test_trap_states_for_half_eta():
    assert [(s.n_prime, s.q) for s in trapping.trap_states(0.5, 20)] == [(3, 1), (15, 2)]


def test_irrational_eta_has_no_traps():
    assert trapping.trap_states(math.pi / 7, 50) == []


def test_trap_states_invert_eta_for_trap():
    for n_prime, q in [(10, 1), (10, 3), (35, 6)]:
        eta = trapping.eta_for_trap(n_prime, q)
        assert any(s.n_prime == n_prime and s.q == q for s in trapping.trap_states(eta, 100))


def test_block_boundaries():
    assert trapping.block_boundaries(1.0, 10) == [(0, 0), (1, 3), (4, 8), (9, 10)]
    assert trapping.block_boundaries(math.pi / 7, 12) == [(0, 12)]


def test_block_mass_is_conserved_by_every_atom():
    d = coherent(20.0)
    f = resonant_filter(1.0, d.nmax + 2)
    after = ensemble_step(d, f, AtomCase.A)
    before = trapping.block_masses(fockspace.pad(d, after.nmax), 1.0)
    # only the open top block moves mass past the old cutoff
    np.testing.assert_allclose(trapping.block_masses(after, 1.0)[:-1], before[:-1], atol=1e-12)


def test_photon_number_uncertainty_grows_linearly():
    assert trapping.photon_number_uncertainty(10, 0.02) == pytest.approx(0.44)
    assert trapping.photon_number_uncertainty(21, 0.02) == pytest.approx(2 * trapping.photon_number_uncertainty(10, 0.02))


# -----------------------------------------------------------------------------
# Schedules
# -----------------------------------------------------------------------------

def test_fixed_schedule():
    assert trapping.make_schedule_fixed(10, 1, 3).etas == pytest.approx([1 / math.sqrt(11)] * 3)
    assert trapping.make_schedule_fixed(0, 1, 1).etas == (1.0,)
    assert trapping.make_schedule_fixed(35, 6, 2).etas == (1.0, 1.0)


def test_incrementing_schedule():
    schedule = trapping.make_schedule_incrementing(10, 1, 3)
    assert schedule.etas == pytest.approx([1 / math.sqrt(11), 2 / math.sqrt(11), 3 / math.sqrt(11)])
    assert trapping.make_schedule_incrementing(10, 4, 1).etas == trapping.make_schedule_fixed(10, 4, 1).etas
    assert all(b > a for a, b in zip(schedule.etas, schedule.etas[1:]))


def test_incrementing_schedule_keeps_the_trap():
    for j, eta in enumerate(trapping.make_schedule_incrementing(10, 2, 5).etas):
        assert any(s.n_prime == 10 and s.q == j + 2 for s in trapping.trap_states(eta, 10))


def test_custom_schedules(tmp_path):
    path = tmp_path / "etas.json"
    path.write_text(trapping.dump_schedule(Schedule(etas=(0.5, 1.0))))
    assert trapping.load_schedule(path).etas == (0.5, 1.0)
    assert json.loads(path.read_text()) == [0.5, 1.0]
    with pytest.raises(InvalidSpecError):
        trapping.make_schedule_custom([0.5, -1.0])


def test_schedule_file_must_be_an_array(tmp_path):
    path = tmp_path / "etas.json"
    path.write_text('{"etas": [1.0]}')
    with pytest.raises(InvalidSpecError):
        trapping.load_schedule(path)


def test_build_schedule_from_specs():
    assert len(trapping.build_schedule(FixedScheduleSpec(), 4)) == 4
    assert trapping.build_schedule(IncrementingScheduleSpec(q_start=2), 2).etas[0] == pytest.approx(2 / math.sqrt(11))
    assert trapping.build_schedule(CustomScheduleSpec(etas=[0.7]), 9).etas == (0.7,)
    with pytest.raises(InvalidSpecError):
        trapping.build_schedule(CustomScheduleSpec(), 3)


# -----------------------------------------------------------------------------
# Trapping in the nonselective ensemble
# -----------------------------------------------------------------------------

def test_mass_builds_up_on_the_trapping_states():
    d0 = coherent(47.0)
    history = ensemble_run(d0, resonant_filter(1.0, d0.nmax + 1), AtomCase.A, 1000)

    for previous, current in zip(history, history[1:]):
        for n_prime in (35, 48, 63):
            assert current.at(n_prime) >= previous.at(n_prime)
        before = trapping.block_masses(fockspace.pad(previous, current.nmax), 1.0)
        after = trapping.block_masses(current, 1.0)
        np.testing.assert_allclose(after[:-1], before[:-1], atol=1e-12)

    final = history[-1]
    top_three = set(np.argsort(final.probs)[-3:].tolist())
    assert top_three == {35, 48, 63}


def test_noiseless_fixed_schedule_is_monotone():
    schedule = trapping.make_schedule_fixed(10, 1, 60)
    series = trapping.run_schedule(coherent(4.0), schedule, AtomCase.A, NoiseModel(), target_n=10, realizations=1)
    assert len(series.mean) == 61
    assert all(b >= a for a, b in zip(series.mean, series.mean[1:]))
    assert series.stddev == [0.0] * 61


def test_noiseless_run_uses_one_realization():
    schedule = trapping.make_schedule_fixed(10, 1, 3)
    series = trapping.run_schedule(coherent(4.0), schedule, AtomCase.A, None, target_n=10, realizations=50)
    assert series.realizations == 1


def test_incrementing_schedule_is_faster():
    d0 = coherent(4.0)
    fixed = trapping.run_schedule(d0, trapping.make_schedule_fixed(10, 1, 600), AtomCase.A, NoiseModel(), 10, 1)
    incrementing = trapping.run_schedule(
        d0, trapping.make_schedule_incrementing(10, 1, 600), AtomCase.A, NoiseModel(), 10, 1
    )
    m_fixed = trapping.atoms_to_threshold(fixed.mean, 0.9)
    m_incrementing = trapping.atoms_to_threshold(incrementing.mean, 0.9)
    assert m_fixed is not None and m_incrementing is not None
    assert m_incrementing < m_fixed


@pytest.mark.slow
def test_velocity_noise_destroys_trapping():
    d0 = coherent(4.0)
    m = 600
    noiseless = trapping.run_schedule(
        d0, trapping.make_schedule_incrementing(10, 1, m), AtomCase.A, NoiseModel(), 10, 1
    )
    m_success = trapping.atoms_to_threshold(noiseless.mean, 0.9)
    assert m_success is not None

    schedule = trapping.make_schedule_incrementing(10, 1, m_success)
    noisy = trapping.run_schedule(d0, schedule, AtomCase.A, NoiseModel(relative_sigma=0.02, seed=0), 10, 200)
    assert noisy.realizations == 200
    gap = noiseless.mean[m_success] - noisy.mean[m_success]
    assert gap >= 5 * noisy.standard_error(m_success)


def test_noise_realizations_are_reproducible():
    d0 = coherent(4.0)
    schedule = trapping.make_schedule_incrementing(10, 1, 15)
    noise = NoiseModel(relative_sigma=0.05, seed=7)
    first = trapping.run_schedule(d0, schedule, AtomCase.A, noise, 10, 8)
    second = trapping.run_schedule(d0, schedule, AtomCase.A, noise, 10, 8)
    assert first.mean == second.mean
    assert first.stddev == second.stddev
    assert any(sd > 0 for sd in first.stddev)


def test_run_schedule_needs_a_realization():
    with pytest.raises(InvalidSpecError):
        trapping.run_schedule(coherent(4.0), trapping.make_schedule_fixed(10, 1, 2), AtomCase.A, None, 10, 0)


def test_series_csv_rows():
    series = trapping.run_schedule(coherent(4.0), trapping.make_schedule_fixed(10, 1, 2), AtomCase.A, None, 10, 1)
    rows = series.csv_rows()
    assert [row[0] for row in rows] == [0, 1, 2]
    assert rows[0][1] == pytest.approx(coherent(4.0).at(10))


# -----------------------------------------------------------------------------
# Threshold and cost
# -----------------------------------------------------------------------------

def test_atoms_to_threshold():
    assert trapping.atoms_to_threshold([0.1, 0.5, 0.95, 0.99], 0.9) == 2
    assert trapping.atoms_to_threshold([0.1, 0.5], 0.9) is None


def test_adiabatic_ladder_costs_one_atom_per_photon():
    vacuum = fockspace.make_distribution(InitialFieldSpec.vacuum())
    for n_prime in (1, 4, 9):
        assert trapping.preparation_cost(vacuum, n_prime, "adiabatic") == n_prime


def test_trapped_preparations_reach_the_target():
    vacuum = fockspace.make_distribution(InitialFieldSpec.vacuum())
    fixed = trapping.preparation_cost(vacuum, 4, "fixed", max_atoms=5000)
    incrementing = trapping.preparation_cost(vacuum, 4, "incrementing", max_atoms=5000)
    assert fixed is not None and fixed >= 4
    assert incrementing is not None and incrementing >= 4


def test_preparation_cost_gives_up():
    vacuum = fockspace.make_distribution(InitialFieldSpec.vacuum())
    assert trapping.preparation_cost(vacuum, 9, "fixed", max_atoms=3) is None
    with pytest.raises(InvalidSpecError):
        trapping.preparation_cost(vacuum, 2, "optimal")
