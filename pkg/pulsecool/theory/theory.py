"""Closed-form results for cooling a trapped ion with sech^2 pulses.

Convention: `v_beam` is the velocity component along the direction the
beam propagates, so the detuning seen by the ion is delta - k*v_beam and
friction (beta < 0) needs a red detuning, delta < 0.

Functions accept numpy arrays for the scalar physics arguments and
return floats for scalar input.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from pulsecool.model.config_types import AtomSpecies, PulsedLaserConfig, TrapConfig
from pulsecool.model.constants import HBAR, K_B, SECH2_FWHM_FACTOR, TWO_PI
from pulsecool.model.errors import InsufficientRangeError, NoEquilibriumError

logger = logging.getLogger(__name__)

SQRT3 = math.sqrt(3.0)


def _result(value):
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


def sech2(x):
    """sech^2 without overflow for large |x|."""
    e = np.exp(-2.0 * np.abs(np.asarray(x, dtype=float)))
    return _result(4.0 * e / (1.0 + e) ** 2)


@dataclass(frozen=True)
class LinearizedForce:
    """Scattering force expanded to first order in v_beam, per trap axis."""
    f0: float
    beta: float
    mass: float
    equilibrium_shift: tuple

    @property
    def beta_over_m(self) -> float:
        return self.beta / self.mass

    @property
    def cools(self) -> bool:
        return self.beta < 0


def excitation_probability(theta, tau, delta_eff):
    return _result(np.sin(0.5 * np.asarray(theta)) ** 2 * sech2(0.5 * tau * np.asarray(delta_eff)))


def atom_frame_detuning(delta, k, v_beam):
    return _result(np.asarray(delta, dtype=float) - k * np.asarray(v_beam, dtype=float))


def scattering_force(atom: AtomSpecies, laser: PulsedLaserConfig, v_beam=0.0):
    """Mean force along one principal axis, for a beam with equal axis components."""
    delta_eff = atom_frame_detuning(laser.detuning, atom.k, v_beam)
    p_exc = excitation_probability(laser.rabi_angle, laser.tau, delta_eff)
    return _result(atom.recoil_momentum / SQRT3 * laser.rep_rate * np.asarray(p_exc))


def _friction(atom: AtomSpecies, laser: PulsedLaserConfig):
    half = 0.5 * laser.tau * laser.detuning
    drive = atom.recoil_momentum / SQRT3 * laser.rep_rate * laser.resonant_probability * sech2(half)
    return drive, drive * atom.k * laser.tau * math.tanh(half)


def linearize_force(atom: AtomSpecies, trap: TrapConfig, laser: PulsedLaserConfig) -> LinearizedForce:
    f0, beta = _friction(atom, laser)
    shift = tuple(float(f0 / (atom.mass * w ** 2)) for w in trap.omega)
    return LinearizedForce(f0=float(f0), beta=float(beta), mass=atom.mass, equilibrium_shift=shift)


def cooling_rate(atom: AtomSpecies, laser: PulsedLaserConfig) -> float:
    """beta/m in 1/s; negative when the laser cools."""
    return float(_friction(atom, laser)[1] / atom.mass)


def diffusion_power(atom: AtomSpecies, laser: PulsedLaserConfig, p_exc):
    return _result(2.0 * atom.recoil_energy * laser.rep_rate * np.asarray(p_exc, dtype=float) / 3.0)


def temperature_floor(tau):
    return _result(HBAR / (SQRT3 * np.asarray(tau, dtype=float) * K_B))


def equilibrium_temperature(tau, delta):
    delta = np.asarray(delta, dtype=float)
    if np.any(delta >= 0):
        raise NoEquilibriumError(_result(delta[delta >= 0]) if delta.ndim else float(delta))
    return _result(temperature_floor(tau) / np.abs(np.tanh(0.5 * tau * delta)))


def optimal_detuning(tau: float) -> float:
    """Detuning of strongest friction, tanh^2(tau*delta/2) = 1/3."""
    return -2.0 * math.atanh(1.0 / SQRT3) / tau


def scatter_rate(atom: AtomSpecies, laser: PulsedLaserConfig, v_beam=0.0):
    delta_eff = atom_frame_detuning(laser.detuning, atom.k, v_beam)
    return _result(laser.rep_rate * np.asarray(excitation_probability(laser.rabi_angle, laser.tau, delta_eff)))


def thermal_scatter_rate(atom: AtomSpecies, laser: PulsedLaserConfig, temperature: float, order: int = 64) -> float:
    """Scatter rate averaged over a thermal v_beam distribution (Gauss-Hermite)."""
    if temperature <= 0:
        return float(scatter_rate(atom, laser, 0.0))
    nodes, weights = np.polynomial.hermite_e.hermegauss(order)
    sigma_v = math.sqrt(K_B * temperature / atom.mass)
    rates = scatter_rate(atom, laser, sigma_v * nodes)
    return float(np.dot(weights, rates) / math.sqrt(TWO_PI))


def lineshape_fwhm(tau):
    return _result(SECH2_FWHM_FACTOR / np.asarray(tau, dtype=float))


def lineshape_fwhm_numeric(tau: float) -> float:
    half_width = brentq(lambda u: sech2(u) - 0.5, 0.0, 10.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return 4.0 * half_width / tau


def doppler_shift(atom: AtomSpecies, v):
    return _result(atom.k * np.asarray(v, dtype=float))


def doppler_shift_hz(atom: AtomSpecies, v):
    return _result(np.asarray(doppler_shift(atom, v)) / TWO_PI)


def speed_from_energy(atom: AtomSpecies, energy):
    return _result(np.sqrt(2.0 * np.asarray(energy, dtype=float) / atom.mass))


def power_broadening_intensity(delta_d, gamma, i_sat):
    if np.any(np.asarray(gamma) <= 0):
        raise ValueError("gamma must be positive")
    return _result(i_sat * (2.0 * np.asarray(delta_d, dtype=float) / gamma) ** 2)


def power_broadening_as_quoted(doppler_ghz: float = 36.0, gamma_mhz: float = 50.0,
                               i_sat: float = 5000.0) -> float:
    """Estimate taking a quoted Doppler shift in GHz and linewidth in MHz as like quantities."""
    return power_broadening_intensity(TWO_PI * doppler_ghz * 1e9, TWO_PI * gamma_mhz * 1e6, i_sat)


def micromotion_ratio(trap: TrapConfig, axis: int) -> float:
    return math.sqrt(2.0) * trap.omega[axis] / trap.omega_rf


def temperature_from_rms(x_rms, omega, mass):
    return _result(mass * np.asarray(omega, dtype=float) ** 2 * np.asarray(x_rms, dtype=float) ** 2 / K_B)


def residual_excitation(lifetime: float, rep_rate: float) -> float:
    if rep_rate <= 0:
        return 0.0
    return math.exp(-1.0 / (rep_rate * lifetime))


# Single beam, isotropic emission, non-degenerate trap: each axis is an
# independent damped oscillator with direction cosine b_i.

def axis_energy_damping_rate(atom: AtomSpecies, laser: PulsedLaserConfig) -> np.ndarray:
    """Per-axis energy decay rate in 1/s (positive when cooling)."""
    b2 = laser.beam_array ** 2
    return -SQRT3 * b2 * cooling_rate(atom, laser)


def axis_equilibrium_temperature(tau: float, delta: float, beam_dir, rabi_angle: float) -> np.ndarray:
    """Per-axis equilibrium temperature of the pulse-resolved model.

    Absorption heats through the spread of its kick, p(1 - p)(hbar k b_i)^2
    per pulse; the mean kick only displaces the trap centre. Emission adds
    p(hbar k)^2/3 per axis.
    """
    if delta >= 0:
        raise NoEquilibriumError(delta)
    p_exc = float(excitation_probability(rabi_angle, tau, delta))
    b2 = np.asarray(beam_dir, dtype=float) ** 2
    with np.errstate(divide="ignore"):
        geometry = 1.0 - p_exc + 1.0 / (3.0 * b2)
    return HBAR * geometry / (2.0 * K_B * tau * abs(math.tanh(0.5 * tau * delta)))


def radiation_pressure_offset(atom: AtomSpecies, trap: TrapConfig, laser: PulsedLaserConfig) -> np.ndarray:
    """Static displacement of the trap centre by the mean scattering force, per axis."""
    p_exc = excitation_probability(laser.rabi_angle, laser.tau, laser.detuning)
    force = atom.recoil_momentum * laser.rep_rate * p_exc * laser.beam_array
    return force / (atom.mass * trap.omega_array ** 2)


def capture_time(e0: float, e_final: float, rate: float, e_eq: float = 0.0) -> float:
    """Time for an exponentially relaxing energy to fall from e0 to e_final."""
    if rate <= 0:
        raise InsufficientRangeError(f"energy does not relax (rate {rate!r} 1/s)")
    if not e0 > e_final > e_eq:
        raise InsufficientRangeError(
            f"need e0 > e_final > e_eq, got {e0!r}, {e_final!r}, {e_eq!r}")
    return math.log((e0 - e_eq) / (e_final - e_eq)) / rate
