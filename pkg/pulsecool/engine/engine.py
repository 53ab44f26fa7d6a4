"""Pulse-by-pulse Monte Carlo of a trapped ion in a modelocked pulse train.

Each pulse step is: stochastic absorption with the sech^2 probability at
the Doppler-shifted detuning, recoil from absorption and isotropic
emission, exact harmonic rotation for 1/R, optional Gaussian heating
kick. The step functions here are the readable reference; `run` drives
the compiled loop in `kernels`.
"""

import logging
import math
import warnings
from dataclasses import replace

import numpy as np

from pulsecool.engine import kernels
from pulsecool.engine.damping import measure_damping_rate
from pulsecool.engine.ion_state import IonState, RunResult, TrajectoryStats
from pulsecool.model.config_types import (
    AtomSpecies,
    EmissionDelayMode,
    PulsedLaserConfig,
    SimConfig,
    TrapConfig,
)
from pulsecool.model.constants import EV, K_B, TWO_PI
from pulsecool.model.errors import InsufficientRangeError, PulseCoolWarning, SimulationError
from pulsecool.theory.theory import (
    axis_energy_damping_rate,
    axis_equilibrium_temperature,
    excitation_probability,
    radiation_pressure_offset,
)

logger = logging.getLogger(__name__)

CHUNK_PULSES = 1 << 20
BURN_IN_EFOLDS = 5.0
BLOCK_CORRELATION_TIMES = 10.0

_NO_NORMALS = np.empty((0, 3))
_NO_DELAYS = np.empty(0)


def harmonic_advance(state: IonState, trap: TrapConfig, dt: float) -> IonState:
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt!r}")
    omega = trap.omega_array
    c, s = np.cos(omega * dt), np.sin(omega * dt)
    x, v = state.position, state.velocity
    return replace(state, position=x * c + v / omega * s, velocity=v * c - x * omega * s,
                   time=state.time + dt)


def isotropic_unit_vector(rng: np.random.Generator, size=None) -> np.ndarray:
    """Uniform direction on the sphere; shape (3,) or (size, 3)."""
    z = 2.0 * rng.random(size) - 1.0
    phi = TWO_PI * rng.random(size)
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)


def _emit(state: IonState, atom: AtomSpecies, rng) -> IonState:
    return replace(state, velocity=state.velocity + atom.recoil_velocity * isotropic_unit_vector(rng))


def pulse_interaction(state: IonState, atom: AtomSpecies, laser: PulsedLaserConfig, rng,
                      emission: bool = True):
    """One pulse; returns (state, absorbed). With emission=False only the absorption kick is applied."""
    beam = laser.beam_array
    v_beam = float(state.velocity @ beam)
    p_exc = excitation_probability(laser.rabi_angle, laser.tau, laser.detuning - atom.k * v_beam)
    if not rng.random() < p_exc:
        return state, False
    state = replace(state, velocity=state.velocity + atom.recoil_velocity * beam,
                    scatter_count=state.scatter_count + 1)
    if emission:
        state = _emit(state, atom, rng)
    return state, True


def background_heating_kick(state: IonState, rate: float, dt: float, rng, *, mass: float) -> IonState:
    """Gaussian velocity kick of variance k_B*rate*dt/m per component."""
    if rate < 0:
        raise ValueError(f"heating rate must be >= 0, got {rate!r}")
    if rate == 0:
        return state
    sigma = math.sqrt(K_B * rate * dt / mass)
    return replace(state, velocity=state.velocity + sigma * rng.standard_normal(3))


def pulse_step(state: IonState, atom: AtomSpecies, trap: TrapConfig, laser: PulsedLaserConfig,
               sim: SimConfig, rng):
    period = laser.period
    start_time = state.time
    if sim.emission_delay_mode is EmissionDelayMode.SAMPLED:
        state, absorbed = pulse_interaction(state, atom, laser, rng, emission=False)
        if absorbed:
            delay = min(rng.exponential(atom.lifetime), period)
            state = harmonic_advance(state, trap, delay)
            state = _emit(state, atom, rng)
            state = harmonic_advance(state, trap, period - delay)
        else:
            state = harmonic_advance(state, trap, period)
    else:
        state, absorbed = pulse_interaction(state, atom, laser, rng)
        state = harmonic_advance(state, trap, period)
    state = background_heating_kick(state, sim.background_heating, period, rng, mass=atom.mass)
    return replace(state, time=start_time + period), absorbed


def auto_burn_in(atom: AtomSpecies, laser: PulsedLaserConfig, n_pulses: int) -> int:
    """Pulses covering BURN_IN_EFOLDS energy e-folds of the slowest cooled axis."""
    rates = axis_energy_damping_rate(atom, laser)
    cooled = rates[rates > 0]
    if cooled.size == 0:
        return 0
    pulses = math.ceil(BURN_IN_EFOLDS / float(cooled.min()) * laser.rep_rate)
    cap = n_pulses // 2
    if pulses > cap:
        message = (f"automatic burn-in of {pulses} pulses exceeds half the run; "
                   f"using {cap}, equilibrium statistics may be biased")
        logger.warning(message)
        warnings.warn(message, PulseCoolWarning, stacklevel=2)
        return cap
    return pulses


def initial_state(atom: AtomSpecies, trap: TrapConfig, sim: SimConfig, rng, center=None) -> IonState:
    center = np.zeros(3) if center is None else np.asarray(center, dtype=float)
    if sim.initial_energy_ev is not None:
        speed = math.sqrt(2.0 * sim.initial_energy_ev * EV / atom.mass)
        return IonState(center.copy(), speed * isotropic_unit_vector(rng))
    sigma_v = math.sqrt(K_B * sim.initial_temperature / atom.mass)
    position = center + rng.normal(0.0, 1.0, 3) * sigma_v / trap.omega_array
    velocity = rng.normal(0.0, 1.0, 3) * sigma_v
    return IonState(position, velocity)


def block_count_for(atom: AtomSpecies, laser: PulsedLaserConfig, n_post: int, max_blocks: int) -> int:
    """Number of averaging blocks, each at least BLOCK_CORRELATION_TIMES energy correlation times long."""
    n_blocks = min(max_blocks, n_post)
    rates = axis_energy_damping_rate(atom, laser)
    cooled = rates[rates > 0]
    if cooled.size == 0 or n_post < 2:
        return n_blocks
    min_len = math.ceil(BLOCK_CORRELATION_TIMES / float(cooled.min()) * laser.rep_rate)
    fit = n_post // min_len
    if fit < 2:
        logger.warning("%d sampled pulses hold fewer than two blocks of %d pulses; "
                       "temperature errors are underestimated", n_post, min_len)
    return max(2, min(n_blocks, fit))


def _block_stats(block_sum, block_count, mass, factor):
    used = block_count > 0
    means = block_sum[used] / block_count[used, None]
    value = factor * mass * block_sum.sum(axis=0) / block_count.sum() / K_B
    n = int(used.sum())
    if n < 2:
        return value, np.full(3, np.nan)
    err = factor * mass * means.std(axis=0, ddof=1) / math.sqrt(n) / K_B
    return value, err


def run(atom: AtomSpecies, trap: TrapConfig, laser: PulsedLaserConfig, sim: SimConfig,
        initial: IonState | None = None) -> RunResult:
    rng = np.random.default_rng(sim.seed)
    center = radiation_pressure_offset(atom, trap, laser)
    state = initial if initial is not None else initial_state(atom, trap, sim, rng, center)
    burn_in = sim.burn_in_pulses if sim.burn_in_pulses is not None else auto_burn_in(atom, laser, sim.n_pulses)
    n_pulses = sim.n_pulses
    n_post = n_pulses - burn_in
    n_blocks = block_count_for(atom, laser, n_post, sim.n_blocks)
    block_len = -(-n_post // n_blocks)

    omega = trap.omega_array
    cos_p, sin_p = np.cos(omega * laser.period), np.sin(omega * laser.period)
    norm = np.hypot(cos_p, sin_p)
    cos_p, sin_p = cos_p / norm, sin_p / norm

    heat_sigma = math.sqrt(K_B * sim.background_heating * laser.period / atom.mass)
    sampled = sim.emission_delay_mode is EmissionDelayMode.SAMPLED

    x = np.array(state.position, dtype=float)
    v = np.array(state.velocity, dtype=float)
    block_kin = np.zeros((n_blocks, 3))
    block_pot = np.zeros((n_blocks, 3))
    block_count = np.zeros(n_blocks, dtype=np.int64)
    impulse_abs = np.zeros(3)
    impulse_emit = np.zeros(3)
    counters = np.array([state.scatter_count], dtype=np.int64)
    energy_stride = sim.energy_stride
    trace = np.zeros(((n_pulses - 1) // energy_stride + 1 if energy_stride else 0, 3))
    trajectory_stride = sim.trajectory_stride
    trajectory = np.zeros(((n_pulses - 1) // trajectory_stride + 1 if trajectory_stride else 0, 9))

    logger.info("run: %d pulses (burn-in %d), seed %d, detuning/2pi %.6g Hz",
                n_pulses, burn_in, sim.seed, laser.detuning / TWO_PI)

    for start in range(0, n_pulses, CHUNK_PULSES):
        size = min(CHUNK_PULSES, n_pulses - start)
        u_abs = rng.random(size)
        u_z = rng.random(size)
        u_phi = rng.random(size)
        normals = rng.standard_normal((size, 3)) if heat_sigma > 0 else _NO_NORMALS
        delays = rng.exponential(atom.lifetime, size) if sampled else _NO_DELAYS
        bad = kernels.advance_chunk(
            x, v, omega, cos_p, sin_p, center, laser.beam_array,
            laser.resonant_probability, 0.5 * laser.tau, laser.detuning, atom.k, atom.recoil_velocity,
            heat_sigma, sampled, laser.period,
            u_abs, u_z, u_phi, normals, delays,
            start, burn_in, block_len, n_blocks,
            block_kin, block_pot, block_count,
            impulse_abs, impulse_emit, counters,
            energy_stride, trace, trajectory_stride, trajectory,
        )
        if bad >= 0:
            raise SimulationError(
                "ion state became non-finite", pulse_index=int(bad),
                state=IonState(x.copy(), v.copy(), int(counters[0]), bad / laser.rep_rate),
            )
        logger.debug("pulses %d..%d done, %d scatters", start, start + size, counters[0])

    kin_t, kin_err = _block_stats(block_kin, block_count, atom.mass, 2.0)
    pot_t, pot_err = _block_stats(block_pot, block_count, atom.mass, 2.0)
    temperature, temperature_err = _block_stats(block_kin + block_pot, block_count, atom.mass, 1.0)

    energy_times = np.arange(trace.shape[0]) * energy_stride / laser.rep_rate
    energy_trace = trace * atom.mass
    if trajectory.shape[0]:
        trajectory[:, 1] = trajectory[:, 0] / laser.rep_rate

    damping = None
    if trace.shape[0] >= 3:
        try:
            e_eq = None
            if laser.detuning < 0:
                t_axis = axis_equilibrium_temperature(laser.tau, laser.detuning, laser.beam_dir, laser.rabi_angle)
                e_eq = float(np.sum(K_B * t_axis))
                e_eq = e_eq if math.isfinite(e_eq) else None
            damping = measure_damping_rate(energy_times, energy_trace, e_eq=e_eq)
        except InsufficientRangeError as e:
            logger.debug("no damping fit: %s", e)

    stats = TrajectoryStats(
        mean_energy=temperature * K_B,
        temperature=temperature,
        temperature_err=temperature_err,
        kinetic_temperature=kin_t,
        kinetic_temperature_err=kin_err,
        potential_temperature=pot_t,
        potential_temperature_err=pot_err,
        total_scatters=int(counters[0]),
        n_samples=int(block_count.sum()),
        n_blocks=int((block_count > 0).sum()),
        burn_in_pulses=int(burn_in),
        damping=damping,
    )
    final_state = IonState(x, v, int(counters[0]), state.time + n_pulses / laser.rep_rate)
    logger.info("run done: T = %s K, %d scatters", np.array2string(temperature, precision=4), stats.total_scatters)
    return RunResult(
        stats=stats,
        final_state=final_state,
        impulse_absorption=impulse_abs * atom.mass,
        impulse_emission=impulse_emit * atom.mass,
        center=center,
        energy_times=energy_times,
        energy_trace=energy_trace,
        trajectory=trajectory,
    )
