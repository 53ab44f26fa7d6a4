import math
from dataclasses import replace

import numpy as np
import pytest

from pulsecool.engine.engine import (
    auto_burn_in,
    background_heating_kick,
    block_count_for,
    harmonic_advance,
    isotropic_unit_vector,
    pulse_interaction,
    pulse_step,
    run,
)
from pulsecool.engine.ion_state import IonState
from pulsecool.engine.trajectory_io import read_trajectory_csv, write_trajectory_csv
from pulsecool.model.config_types import CD114, DEFAULT_LASER, DEFAULT_TRAP, EmissionDelayMode, SimConfig
from pulsecool.model.constants import K_B, TWO_PI
from pulsecool.model.errors import PulseCoolWarning, SimulationError
from pulsecool.theory.theory import excitation_probability
from species import LIGHT_ION, SPLIT_TRAP, SYMMETRIC_TRAP

DARK = replace(DEFAULT_LASER, rabi_angle=0.0)
RESONANT = replace(DEFAULT_LASER, detuning=0.0)


def moving_state():
    return IonState(np.array([1e-6, -2e-6, 0.5e-6]), np.array([3.0, 1.0, -2.0]))


class TestHarmonicAdvance:

    def test_full_period_is_identity(self):
        state = moving_state()
        period = TWO_PI / SYMMETRIC_TRAP.omega[0]
        after = harmonic_advance(state, SYMMETRIC_TRAP, period)
        assert after.position == pytest.approx(state.position, abs=1e-18)
        assert after.velocity == pytest.approx(state.velocity, abs=1e-11)
        assert after.time == pytest.approx(period)

    def test_quarter_period(self):
        omega = SYMMETRIC_TRAP.omega[0]
        state = moving_state()
        after = harmonic_advance(state, SYMMETRIC_TRAP, 0.25 * TWO_PI / omega)
        assert after.position == pytest.approx(state.velocity / omega, rel=1e-9, abs=1e-18)
        assert after.velocity == pytest.approx(-state.position * omega, rel=1e-9, abs=1e-11)

    def test_energy_is_conserved(self):
        state = moving_state()
        before = state.energies(CD114.mass, DEFAULT_TRAP.omega_array)
        for dt in (1e-9, 3.7e-7, 0.01):
            after = harmonic_advance(state, DEFAULT_TRAP, dt).energies(CD114.mass, DEFAULT_TRAP.omega_array)
            assert after == pytest.approx(before, rel=1e-12)

    def test_negative_step(self):
        with pytest.raises(ValueError):
            harmonic_advance(moving_state(), DEFAULT_TRAP, -1.0)


class TestPulseInteraction:

    def test_dark_pulse_never_absorbs(self):
        rng = np.random.default_rng(0)
        state = moving_state()
        for _ in range(100):
            after, absorbed = pulse_interaction(state, CD114, DARK, rng)
            assert not absorbed
            assert after is state

    def test_resonant_pi_pulse_always_absorbs(self):
        rng = np.random.default_rng(1)
        state = IonState.at_rest()
        after, absorbed = pulse_interaction(state, CD114, RESONANT, rng, emission=False)
        assert absorbed
        assert after.scatter_count == 1
        assert after.velocity == pytest.approx(CD114.recoil_velocity * RESONANT.beam_array, rel=1e-15)

        after, absorbed = pulse_interaction(state, CD114, RESONANT, rng)
        kick = after.velocity - CD114.recoil_velocity * RESONANT.beam_array
        assert absorbed
        assert np.linalg.norm(kick) == pytest.approx(CD114.recoil_velocity, rel=1e-12)

    def test_absorption_frequency(self):
        heavy = replace(CD114, mass=1e6 * CD114.mass)
        laser = replace(DEFAULT_LASER, rabi_angle=1.1, detuning=2 * -0.6 / DEFAULT_LASER.tau)
        n = 1_000_000
        result = run(heavy, DEFAULT_TRAP, laser, SimConfig(seed=11, n_pulses=n, burn_in_pulses=0),
                     initial=IonState.at_rest())
        p = excitation_probability(laser.rabi_angle, laser.tau, laser.detuning)
        sigma = math.sqrt(p * (1 - p) / n)
        assert abs(result.stats.total_scatters / n - p) < 4 * sigma


def test_isotropic_unit_vectors():
    rng = np.random.default_rng(5)
    n = 1_000_000
    vectors = isotropic_unit_vector(rng, n)
    assert vectors.shape == (n, 3)
    assert np.linalg.norm(vectors, axis=1) == pytest.approx(np.ones(n), abs=1e-12)
    assert np.all(np.abs(vectors.mean(axis=0)) < 4 * math.sqrt(1 / 3 / n))
    second = vectors.T @ vectors / n
    assert np.diag(second) == pytest.approx(np.full(3, 1 / 3), abs=4 * math.sqrt(4 / 45 / n))
    off = second[~np.eye(3, dtype=bool)]
    assert np.all(np.abs(off) < 4 * math.sqrt(1 / 15 / n))
    assert isotropic_unit_vector(rng).shape == (3,)


class TestBackgroundHeating:

    @staticmethod
    def kinetic_temperature(kicks, dt, trials=2000, rate=1.0):
        rng = np.random.default_rng(21)
        velocities = []
        for _ in range(trials):
            state = IonState.at_rest()
            for _ in range(kicks):
                state = background_heating_kick(state, rate, dt, rng, mass=CD114.mass)
            velocities.append(state.velocity)
        return CD114.mass * np.mean(np.square(velocities)) / K_B

    def test_free_ion_temperature_rises_at_rate(self):
        assert self.kinetic_temperature(kicks=2, dt=0.5) == pytest.approx(1.0, rel=0.1)
        assert self.kinetic_temperature(kicks=1, dt=1.0) == pytest.approx(1.0, rel=0.1)

    def test_zero_rate_is_a_no_op(self):
        state = moving_state()
        assert background_heating_kick(state, 0.0, 1.0, np.random.default_rng(), mass=CD114.mass) is state

    def test_negative_rate(self):
        with pytest.raises(ValueError):
            background_heating_kick(moving_state(), -1.0, 1.0, np.random.default_rng(), mass=CD114.mass)


class TestPulseStep:

    def test_dark_step_is_a_rotation(self):
        state = moving_state()
        after, absorbed = pulse_step(state, CD114, DEFAULT_TRAP, DARK, SimConfig(), np.random.default_rng(2))
        expected = harmonic_advance(state, DEFAULT_TRAP, DARK.period)
        assert not absorbed
        assert after.position == pytest.approx(expected.position, rel=1e-12)
        assert after.velocity == pytest.approx(expected.velocity, rel=1e-12)
        assert after.time == DARK.period

    def test_sampled_emission_keeps_the_period(self):
        sim = SimConfig(emission_delay_mode=EmissionDelayMode.SAMPLED)
        after, absorbed = pulse_step(IonState.at_rest(), CD114, DEFAULT_TRAP, RESONANT, sim,
                                     np.random.default_rng(3))
        assert absorbed
        assert after.scatter_count == 1
        assert after.time == pytest.approx(RESONANT.period, rel=1e-15)


class TestRun:

    def test_dark_run_conserves_energy(self):
        sim = SimConfig(seed=4, n_pulses=20_000, burn_in_pulses=0, initial_temperature=5.0)
        result = run(CD114, DEFAULT_TRAP, DARK, sim)
        assert result.stats.total_scatters == 0
        assert np.all(result.center == 0.0)

        omega = DEFAULT_TRAP.omega_array
        final = result.final_state.energies(CD114.mass, omega)
        assert result.stats.temperature == pytest.approx(final / K_B, rel=1e-9)
        assert result.stats.kinetic_temperature + result.stats.potential_temperature == pytest.approx(
            2 * result.stats.temperature, rel=1e-9)

    def test_dark_run_matches_one_long_rotation(self):
        state = moving_state()
        n = 1000
        result = run(CD114, DEFAULT_TRAP, DARK, SimConfig(n_pulses=n, burn_in_pulses=0), initial=state)
        expected = harmonic_advance(state, DEFAULT_TRAP, n * DARK.period)
        assert result.final_state.position == pytest.approx(expected.position, rel=1e-9, abs=1e-17)
        assert result.final_state.velocity == pytest.approx(expected.velocity, rel=1e-9, abs=1e-10)
        assert result.final_state.time == pytest.approx(n * DARK.period)

    def test_dark_run_has_no_energy_drift(self):
        state = moving_state()
        omega = DEFAULT_TRAP.omega_array
        sim = SimConfig(n_pulses=20_000_000, burn_in_pulses=0, n_blocks=2)
        result = run(CD114, DEFAULT_TRAP, DARK, sim, initial=state)
        drift = result.final_state.energies(CD114.mass, omega) / state.energies(CD114.mass, omega) - 1.0
        assert np.all(np.abs(drift) < 1e-11)

    @pytest.mark.slow
    def test_dark_run_has_no_energy_drift_over_1e9_pulses(self):
        state = moving_state()
        omega = DEFAULT_TRAP.omega_array
        sim = SimConfig(n_pulses=1_000_000_000, burn_in_pulses=0, n_blocks=2)
        result = run(CD114, DEFAULT_TRAP, DARK, sim, initial=state)
        drift = result.final_state.energies(CD114.mass, omega) / state.energies(CD114.mass, omega) - 1.0
        assert np.all(np.abs(drift) < 1e-9)

    def test_same_seed_same_run(self):
        sim = SimConfig(seed=3, n_pulses=50_000, burn_in_pulses=1000)
        a = run(CD114, DEFAULT_TRAP, DEFAULT_LASER, sim)
        b = run(CD114, DEFAULT_TRAP, DEFAULT_LASER, sim)
        c = run(CD114, DEFAULT_TRAP, DEFAULT_LASER, replace(sim, seed=4))
        assert np.array_equal(a.stats.temperature, b.stats.temperature)
        assert np.array_equal(a.final_state.velocity, b.final_state.velocity)
        assert a.stats.total_scatters == b.stats.total_scatters
        assert not np.array_equal(a.final_state.velocity, c.final_state.velocity)

    def test_impulse_bookkeeping(self):
        n = 200_000
        result = run(CD114, DEFAULT_TRAP, DEFAULT_LASER, SimConfig(seed=8, n_pulses=n, burn_in_pulses=0))
        scatters = result.stats.total_scatters
        assert scatters > 0
        recoil = CD114.recoil_momentum
        assert result.impulse_absorption == pytest.approx(scatters * recoil * DEFAULT_LASER.beam_array, rel=1e-9)
        assert np.all(np.abs(result.impulse_emission) < 4 * recoil * math.sqrt(scatters / 3))

    def test_block_statistics(self):
        sim = SimConfig(seed=5, n_pulses=1_000_000, burn_in_pulses=10_000, n_blocks=16)
        stats = run(LIGHT_ION, SPLIT_TRAP, DEFAULT_LASER, sim).stats
        assert stats.n_samples == 990_000
        assert stats.n_blocks == 16
        assert stats.burn_in_pulses == 10_000
        assert np.all(np.isfinite(stats.temperature_err))
        value, err = stats.axes_temperature((0, 1))
        assert value == pytest.approx(stats.temperature[:2].mean())
        assert err > 0

    def test_blocks_span_many_correlation_times(self):
        # Cd+ energy relaxes over ~1e7 pulses: a short run keeps two blocks
        assert block_count_for(CD114, DEFAULT_LASER, 90_000, 16) == 2
        assert block_count_for(CD114, DEFAULT_LASER, 10**10, 32) == 32
        assert block_count_for(CD114, DARK, 90_000, 16) == 16
        sim = SimConfig(seed=5, n_pulses=100_000, burn_in_pulses=10_000, n_blocks=16)
        assert run(CD114, DEFAULT_TRAP, DEFAULT_LASER, sim).stats.n_blocks == 2

    def test_traces(self, tmp_path):
        sim = SimConfig(seed=6, n_pulses=10_000, burn_in_pulses=0, energy_stride=100, trajectory_stride=1000)
        result = run(CD114, DEFAULT_TRAP, DEFAULT_LASER, sim)
        assert result.energy_trace.shape == (100, 3)
        assert result.energy_times[1] == pytest.approx(100 / DEFAULT_LASER.rep_rate)
        trajectory = result.trajectory
        assert trajectory.shape == (10, 9)
        assert np.array_equal(trajectory[:, 0], np.arange(0, 10_000, 1000))
        assert trajectory[:, 1] == pytest.approx(trajectory[:, 0] / DEFAULT_LASER.rep_rate)
        assert np.all(np.diff(trajectory[:, 8]) >= 0)

        path = tmp_path / "trajectory.csv"
        write_trajectory_csv(path, trajectory)
        assert read_trajectory_csv(path) == pytest.approx(trajectory, rel=1e-8)

    def test_non_finite_state_is_reported(self):
        broken = IonState(np.zeros(3), np.array([np.inf, 0.0, 0.0]))
        with pytest.raises(SimulationError) as info:
            run(CD114, DEFAULT_TRAP, DEFAULT_LASER, SimConfig(n_pulses=10, burn_in_pulses=0), initial=broken)
        assert info.value.pulse_index == 0

    def test_sampled_mode_is_deterministic(self):
        sim = SimConfig(seed=9, n_pulses=20_000, burn_in_pulses=0,
                        emission_delay_mode=EmissionDelayMode.SAMPLED, background_heating=100.0)
        a = run(CD114, DEFAULT_TRAP, DEFAULT_LASER, sim)
        b = run(CD114, DEFAULT_TRAP, DEFAULT_LASER, sim)
        assert a.stats.total_scatters > 0
        assert np.array_equal(a.final_state.position, b.final_state.position)


class TestBurnIn:

    def test_no_burn_in_without_cooling(self):
        assert auto_burn_in(CD114, DARK, 1000) == 0

    def test_capped_at_half_the_run(self):
        with pytest.warns(PulseCoolWarning, match="burn-in"):
            assert auto_burn_in(CD114, DEFAULT_LASER, 100_000_000) == 50_000_000

    def test_covers_five_efolds(self):
        pulses = auto_burn_in(CD114, DEFAULT_LASER, 10 ** 10)
        assert 10_000_000 < pulses < 5 * 10 ** 9
