"""Configuration types shared by every module.

All frequency-typed fields hold angular values (rad/s). Conversion from
Hz happens once, at the config-file boundary. Instances are frozen;
vector fields are tuples so a validated config can be shared freely
between workers.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from pulsecool.model.constants import AMU, HBAR, TWO_PI


class EmissionDelayMode(str, Enum):
    IMMEDIATE = "immediate"
    SAMPLED = "sampled"


class CrossectionMode(str, Enum):
    SLICE = "slice"
    MARGINAL = "marginal"


class WaistMode(str, Enum):
    CLOSED_FORM = "closed_form"
    SELF_CONSISTENT = "self_consistent"
    FORWARD = "forward"


@dataclass(frozen=True)
class AtomSpecies:
    mass: float
    wavelength: float
    gamma: float
    lifetime: float
    saturation_intensity: float

    @property
    def k(self) -> float:
        return TWO_PI / self.wavelength

    @property
    def recoil_momentum(self) -> float:
        return HBAR * self.k

    @property
    def recoil_velocity(self) -> float:
        return HBAR * self.k / self.mass

    @property
    def recoil_energy(self) -> float:
        return (HBAR * self.k) ** 2 / (2.0 * self.mass)


@dataclass(frozen=True)
class TrapConfig:
    omega: tuple
    omega_rf: float

    @property
    def omega_array(self) -> np.ndarray:
        return np.asarray(self.omega, dtype=float)


@dataclass(frozen=True)
class PulsedLaserConfig:
    tau: float
    rep_rate: float
    detuning: float
    rabi_angle: float
    beam_dir: tuple
    waist_rms: float
    pulse_energy: float | None = None

    @property
    def beam_array(self) -> np.ndarray:
        return np.asarray(self.beam_dir, dtype=float)

    @property
    def period(self) -> float:
        return 1.0 / self.rep_rate

    @property
    def resonant_probability(self) -> float:
        return math.sin(0.5 * self.rabi_angle) ** 2

    def with_detuning(self, detuning: float) -> "PulsedLaserConfig":
        return replace(self, detuning=float(detuning))


@dataclass(frozen=True)
class SimConfig:
    seed: int = 1
    n_pulses: int = 100_000_000
    burn_in_pulses: int | None = None
    background_heating: float = 0.0
    emission_delay_mode: EmissionDelayMode = EmissionDelayMode.IMMEDIATE
    initial_temperature: float = 10.0
    initial_energy_ev: float | None = None
    n_blocks: int = 32
    energy_stride: int = 0
    trajectory_stride: int = 0


@dataclass(frozen=True)
class ImagingConfig:
    psf_rms: float = 1.15e-6
    waist_rms: float = 3.35e-6
    beam_angle_in_image: float = math.pi / 4
    pixel_size: float = 0.4e-6
    image_size: tuple = (160, 160)
    total_counts: float = 1e5
    crossection_mode: CrossectionMode = CrossectionMode.MARGINAL
    slice_halfwidth: int = 3
    psf_rms_err: float = 0.01e-6
    waist_rms_err: float = 0.15e-6
    image_axes: tuple = (0, 1)
    waist_mode: WaistMode = WaistMode.FORWARD

    @property
    def phi(self) -> float:
        """Angle between the beam and the (vertical) crossection direction."""
        return 0.5 * math.pi - self.beam_angle_in_image


@dataclass(frozen=True)
class ScanSpec:
    detunings: tuple = ()
    trials: int = 4
    pulses_per_trial: int = 60_000_000
    burn_in_pulses: int | None = None
    line_temperature: float = 1.0
    axes: tuple = (0, 1)
    temperature_csv: str | None = None
    lineshape_csv: str | None = None
    timeout_s: float | None = None


# Cd+ 5s 2S1/2 - 5p 2P1/2 at 226.5 nm; isotope mass 114 u.
CD114 = AtomSpecies(
    mass=114.0 * AMU,
    wavelength=226.5e-9,
    gamma=TWO_PI * 50.5e6,
    lifetime=3.146e-9,
    saturation_intensity=5000.0,
)

DEFAULT_TRAP = TrapConfig(
    omega=(TWO_PI * 0.84e6, TWO_PI * 0.85e6, TWO_PI * 0.86e6),
    omega_rf=TWO_PI * 35.8e6,
)

DEFAULT_BEAM_DIR = tuple(float(c) for c in np.ones(3) / math.sqrt(3.0))

DEFAULT_LASER = PulsedLaserConfig(
    tau=1.3e-12,
    rep_rate=80e6,
    detuning=-TWO_PI * 200e9,
    rabi_angle=math.pi,
    beam_dir=DEFAULT_BEAM_DIR,
    waist_rms=3.35e-6,
    pulse_energy=12.5e-12,
)

# tau*delta/2 = -0.5, -0.8168, -1.5 for tau = 1.3 ps
DEFAULT_SCAN = ScanSpec(
    detunings=tuple(-2.0 * a / 1.3e-12 for a in (0.5, 0.8168, 1.5)),
)


@dataclass(frozen=True)
class ConfigBundle:
    atom: AtomSpecies = CD114
    trap: TrapConfig = DEFAULT_TRAP
    laser: PulsedLaserConfig = DEFAULT_LASER
    sim: SimConfig = field(default_factory=SimConfig)
    imaging: ImagingConfig = field(default_factory=ImagingConfig)
    scan: ScanSpec = DEFAULT_SCAN

    def replace(self, **changes) -> "ConfigBundle":
        return replace(self, **changes)
