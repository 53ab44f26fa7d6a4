from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class IonState:
    position: np.ndarray
    velocity: np.ndarray
    scatter_count: int = 0
    time: float = 0.0

    @classmethod
    def at_rest(cls, position=(0.0, 0.0, 0.0)):
        return cls(np.array(position, dtype=float), np.zeros(3))

    def energies(self, mass, omega, center=0.0) -> np.ndarray:
        """Per-axis oscillator energy in J, measured about `center`."""
        displacement = self.position - center
        return 0.5 * mass * (self.velocity ** 2 + (np.asarray(omega) * displacement) ** 2)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.position)) and np.all(np.isfinite(self.velocity)))


@dataclass(frozen=True)
class DampingFit:
    energy_rate: float
    energy_rate_ci: tuple
    beta_over_m: float
    beta_over_m_ci: tuple
    n_points: int
    dynamic_range: float


@dataclass(frozen=True)
class TrajectoryStats:
    """Equilibrium estimators of one run; per-axis arrays are in trap-axis order."""
    mean_energy: np.ndarray
    temperature: np.ndarray
    temperature_err: np.ndarray
    kinetic_temperature: np.ndarray
    kinetic_temperature_err: np.ndarray
    potential_temperature: np.ndarray
    potential_temperature_err: np.ndarray
    total_scatters: int
    n_samples: int
    n_blocks: int
    burn_in_pulses: int
    damping: DampingFit | None = None

    def axes_temperature(self, axes=(0, 1, 2)):
        """Mean temperature over `axes` and its standard error."""
        axes = list(axes)
        value = float(np.mean(self.temperature[axes]))
        err = float(np.sqrt(np.sum(self.temperature_err[axes] ** 2)) / len(axes))
        return value, err


@dataclass(frozen=True)
class RunResult:
    stats: TrajectoryStats
    final_state: IonState
    impulse_absorption: np.ndarray
    impulse_emission: np.ndarray
    center: np.ndarray
    energy_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    energy_trace: np.ndarray = field(default_factory=lambda: np.empty((0, 3)))
    trajectory: np.ndarray = field(default_factory=lambda: np.empty((0, 9)))

    @property
    def scatter_rate(self) -> float:
        return self.stats.total_scatters / self.final_state.time if self.final_state.time > 0 else 0.0
