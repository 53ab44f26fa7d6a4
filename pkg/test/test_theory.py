import math
from dataclasses import replace

import numpy as np
import pytest

from pulsecool.imaging.synth import thermal_sigma
from pulsecool.model.config_types import CD114, DEFAULT_BEAM_DIR, DEFAULT_LASER, DEFAULT_TRAP
from pulsecool.model.constants import EV, K_B, TWO_PI
from pulsecool.model.errors import InsufficientRangeError, NoEquilibriumError
from pulsecool.theory import theory
from species import SYMMETRIC_TRAP, WEAK_RABI_ANGLE

TAU = 1.3e-12


def at_half_phase(a, **changes):
    """Default laser with tau*delta/2 = a."""
    return replace(DEFAULT_LASER, detuning=2.0 * a / TAU, **changes)


OPTIMAL = replace(DEFAULT_LASER, detuning=theory.optimal_detuning(TAU), rabi_angle=WEAK_RABI_ANGLE)


class TestExcitationProbability:

    def test_resonant_pi_pulse(self):
        assert theory.excitation_probability(math.pi, TAU, 0.0) == pytest.approx(1.0, abs=1e-15)

    def test_half_pi_detuned(self):
        assert theory.excitation_probability(math.pi / 2, TAU, 2.0 / TAU) == pytest.approx(0.2100, abs=1e-4)

    def test_weak_pulse(self):
        assert theory.excitation_probability(WEAK_RABI_ANGLE, TAU, 0.0) == pytest.approx(0.2, abs=1e-12)

    def test_bounded_even_and_decreasing(self):
        delta = np.linspace(0.0, 5e13, 200)
        for theta in (0.3, 1.0, math.pi):
            p = theory.excitation_probability(theta, TAU, delta)
            assert np.all((p >= 0) & (p <= math.sin(theta / 2) ** 2 + 1e-15))
            assert np.array_equal(p, theory.excitation_probability(theta, TAU, -delta))
            assert np.all(np.diff(p) <= 0)

    def test_no_overflow_far_off_resonance(self):
        assert theory.excitation_probability(math.pi, TAU, 1e20) == 0.0


def test_atom_frame_detuning():
    k = CD114.k
    assert theory.atom_frame_detuning(-TWO_PI * 200e9, k, 10.0) == pytest.approx(-TWO_PI * 200e9 - 10.0 * k)
    assert theory.atom_frame_detuning(1e11, k, 0.0) == 1e11


class TestForce:

    def test_optimal_weak_pulse_force(self):
        assert theory.scattering_force(CD114, OPTIMAL) == pytest.approx(1.80e-20, rel=2e-3)

    def test_zero_rabi_angle(self):
        assert theory.scattering_force(CD114, replace(OPTIMAL, rabi_angle=0.0)) == 0.0

    def test_proportional_to_rep_rate(self):
        doubled = replace(OPTIMAL, rep_rate=2 * OPTIMAL.rep_rate)
        assert theory.scattering_force(CD114, doubled) == pytest.approx(2 * theory.scattering_force(CD114, OPTIMAL))

    def test_no_friction_on_resonance(self):
        assert theory.linearize_force(CD114, DEFAULT_TRAP, at_half_phase(0.0)).beta == 0.0

    def test_cooling_rate_at_optimum(self):
        linear = theory.linearize_force(CD114, SYMMETRIC_TRAP, OPTIMAL)
        assert linear.cools
        assert linear.beta_over_m == pytest.approx(-1.98, rel=5e-3)
        assert theory.cooling_rate(CD114, OPTIMAL) == pytest.approx(linear.beta_over_m)
        assert linear.equilibrium_shift == pytest.approx((3.34e-9,) * 3, rel=5e-3)

    def test_beta_is_the_force_slope(self):
        h = 2e-4 / (CD114.k * TAU)
        for a in (-1.5, -0.6585, -0.2, 0.4):
            laser = at_half_phase(a, rabi_angle=1.1)
            slope = (theory.scattering_force(CD114, laser, h) - theory.scattering_force(CD114, laser, -h)) / (2 * h)
            beta = theory.linearize_force(CD114, DEFAULT_TRAP, laser).beta
            assert beta == pytest.approx(slope, rel=1e-6)

    def test_sign_of_beta_follows_detuning(self):
        assert theory.cooling_rate(CD114, at_half_phase(-0.5)) < 0
        assert theory.cooling_rate(CD114, at_half_phase(0.5)) > 0

    def test_optimal_detuning(self):
        delta = theory.optimal_detuning(TAU)
        assert math.tanh(TAU * delta / 2) ** 2 == pytest.approx(1 / 3, rel=1e-12)
        rates = [theory.cooling_rate(CD114, at_half_phase(a)) for a in np.linspace(-2.0, -0.1, 191)]
        assert min(rates) >= theory.cooling_rate(CD114, replace(DEFAULT_LASER, detuning=delta)) - 1e-12


class TestDiffusionAndTemperature:

    def test_diffusion_power(self):
        assert theory.diffusion_power(CD114, DEFAULT_LASER, 0.0) == 0.0
        p = theory.excitation_probability(WEAK_RABI_ANGLE, TAU, theory.optimal_detuning(TAU))
        assert p == pytest.approx(0.2 * 2 / 3)
        assert theory.diffusion_power(CD114, OPTIMAL, p) == pytest.approx(1.61e-22, rel=5e-3)

    def test_einstein_relation(self):
        for theta in np.linspace(0.2, math.pi, 7):
            for a in np.linspace(-2.5, -0.05, 15):
                laser = at_half_phase(a, rabi_angle=theta)
                p = theory.excitation_probability(theta, TAU, laser.detuning)
                ratio = theory.diffusion_power(CD114, laser, p) / (K_B * abs(theory.cooling_rate(CD114, laser)))
                assert ratio == pytest.approx(theory.equilibrium_temperature(TAU, laser.detuning), rel=1e-9)

    def test_reference_temperatures(self):
        expected = {-0.5: 7.341, -0.8168: 5.038, -1.5: 3.748}
        for a, t in expected.items():
            assert theory.equilibrium_temperature(TAU, 2 * a / TAU) == pytest.approx(t, rel=5e-4)

    def test_floor(self):
        assert theory.temperature_floor(TAU) == pytest.approx(3.3923, rel=1e-4)
        assert theory.equilibrium_temperature(TAU, -1e16) == pytest.approx(theory.temperature_floor(TAU), rel=1e-12)
        grid = -np.logspace(9, 15, 50)
        assert np.all(theory.equilibrium_temperature(TAU, grid) >= theory.temperature_floor(TAU))

    @pytest.mark.parametrize("delta", [0.0, 1e11])
    def test_no_equilibrium_without_red_detuning(self, delta):
        with pytest.raises(NoEquilibriumError):
            theory.equilibrium_temperature(TAU, delta)
        with pytest.raises(NoEquilibriumError):
            theory.axis_equilibrium_temperature(TAU, delta, DEFAULT_BEAM_DIR, math.pi)

    def test_axis_temperature_for_the_diagonal_beam(self):
        delta = 2 * -0.8168 / TAU
        p_exc = theory.excitation_probability(math.pi, TAU, delta)
        per_axis = theory.axis_equilibrium_temperature(TAU, delta, DEFAULT_BEAM_DIR, math.pi)
        expected = math.sqrt(3) * theory.equilibrium_temperature(TAU, delta) * (1.0 - 0.5 * p_exc)
        assert per_axis == pytest.approx(np.full(3, expected), rel=1e-12)

    @pytest.mark.parametrize("a, expected", [(-0.5, 7.715), (-0.8168, 6.341), (-1.5, 5.905)])
    def test_axis_temperature_for_pi_pulses(self, a, expected):
        # only the spread of the absorption kick heats; strong pulses near resonance heat least
        per_axis = theory.axis_equilibrium_temperature(TAU, 2 * a / TAU, DEFAULT_BEAM_DIR, math.pi)
        assert per_axis == pytest.approx(np.full(3, expected), rel=1e-3)

    def test_weak_pulses_recover_the_full_kick_heating(self):
        delta = 2 * -0.5 / TAU
        per_axis = theory.axis_equilibrium_temperature(TAU, delta, DEFAULT_BEAM_DIR, 1e-4)
        assert per_axis == pytest.approx(np.full(3, math.sqrt(3) * theory.equilibrium_temperature(TAU, delta)),
                                         rel=1e-8)

    def test_axis_temperature_without_beam_projection(self):
        per_axis = theory.axis_equilibrium_temperature(TAU, -1e12, (1.0, 0.0, 0.0), math.pi)
        assert math.isfinite(per_axis[0])
        assert np.all(np.isinf(per_axis[1:]))

    def test_axis_damping_rate(self):
        rates = theory.axis_energy_damping_rate(CD114, OPTIMAL)
        assert rates == pytest.approx(np.full(3, -theory.cooling_rate(CD114, OPTIMAL) / math.sqrt(3)), rel=1e-12)
        assert np.all(rates > 0)


class TestScatterRate:

    def test_cold_rate(self):
        assert theory.scatter_rate(CD114, at_half_phase(0.0)) == pytest.approx(80e6)
        assert theory.scatter_rate(CD114, OPTIMAL) == pytest.approx(80e6 * 0.2 * 2 / 3)
        assert theory.scatter_rate(CD114, replace(OPTIMAL, rabi_angle=0.0)) == 0.0

    def test_fwhm(self):
        assert theory.lineshape_fwhm(TAU) / TWO_PI == pytest.approx(431.6e9, rel=2e-4)
        assert theory.lineshape_fwhm_numeric(TAU) == pytest.approx(theory.lineshape_fwhm(TAU), rel=1e-9)

    def test_thermal_average_approaches_cold_rate(self):
        cold = theory.scatter_rate(CD114, OPTIMAL)
        assert theory.thermal_scatter_rate(CD114, OPTIMAL, 1.0) == pytest.approx(cold, rel=1e-6)
        assert theory.thermal_scatter_rate(CD114, OPTIMAL, 0.0) == cold
        on_peak = at_half_phase(0.0)
        assert theory.thermal_scatter_rate(CD114, on_peak, 1e4) < theory.scatter_rate(CD114, on_peak)


class TestDopplerAndBroadening:

    def test_speed_and_shift_at_one_ev(self):
        speed = theory.speed_from_energy(CD114, 1.0 * EV)
        assert speed == pytest.approx(1301.0, rel=1e-3)
        assert theory.doppler_shift(CD114, 1300.0) == pytest.approx(3.61e10, rel=2e-3)
        assert theory.doppler_shift_hz(CD114, 1300.0) == pytest.approx(3.61e10 / TWO_PI, rel=2e-3)

    def test_broadening_at_half_linewidth(self):
        gamma = CD114.gamma
        assert theory.power_broadening_intensity(gamma / 2, gamma, 5000.0) == pytest.approx(5000.0)
        with pytest.raises(ValueError):
            theory.power_broadening_intensity(1.0, 0.0, 5000.0)

    def test_broadening_estimates(self):
        assert theory.power_broadening_as_quoted() == pytest.approx(1.0368e10, rel=1e-9)
        shift = theory.doppler_shift(CD114, 1300.0)
        consistent = theory.power_broadening_intensity(shift, CD114.gamma, CD114.saturation_intensity)
        assert consistent == pytest.approx(2.58e8, rel=5e-3)


class TestTrapQuantities:

    def test_micromotion_ratio(self):
        assert theory.micromotion_ratio(SYMMETRIC_TRAP, 0) == pytest.approx(0.033578, rel=1e-4)
        trap = replace(SYMMETRIC_TRAP, omega=(1e-3, 1.0, 1.0))
        assert theory.micromotion_ratio(trap, 0) < 1e-10

    def test_temperature_from_rms(self):
        omega = TWO_PI * 0.85e6
        assert theory.temperature_from_rms(1.6e-6, omega, CD114.mass) == pytest.approx(1.0, rel=2e-3)
        for t in (0.01, 1.0, 30.0):
            sigma = thermal_sigma(t, omega, CD114.mass)
            assert theory.temperature_from_rms(sigma, omega, CD114.mass) == pytest.approx(t, rel=1e-12)

    def test_residual_excitation(self):
        assert theory.residual_excitation(CD114.lifetime, 80e6) == pytest.approx(0.01881, abs=1e-5)
        assert theory.residual_excitation(CD114.lifetime, 0.0) == 0.0

    def test_radiation_pressure_offset(self):
        offset = theory.radiation_pressure_offset(CD114, SYMMETRIC_TRAP, OPTIMAL)
        shift = theory.linearize_force(CD114, SYMMETRIC_TRAP, OPTIMAL).equilibrium_shift
        assert offset == pytest.approx(shift, rel=1e-12)


class TestCaptureTime:

    def test_exponential_relaxation(self):
        assert theory.capture_time(10.0, 10.0 / math.e, 2.0) == pytest.approx(0.5)
        assert theory.capture_time(11.0, 2.0, 1.0, e_eq=1.0) == pytest.approx(math.log(10.0))

    def test_invalid_ranges(self):
        with pytest.raises(InsufficientRangeError):
            theory.capture_time(1.0, 2.0, 1.0)
        with pytest.raises(InsufficientRangeError):
            theory.capture_time(2.0, 1.0, 0.0)
        with pytest.raises(InsufficientRangeError):
            theory.capture_time(3.0, 1.0, 1.0, e_eq=1.0)
