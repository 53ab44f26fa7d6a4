"""Invariant checks for the configuration types.

`check()` collects every violation of a config object; `validate()`
returns the object unchanged when the list is empty and raises a
`ValidationError` carrying the full list otherwise.
"""

import logging
import math
import warnings
from functools import singledispatch

import numpy as np

from pulsecool.model.config_types import (
    AtomSpecies,
    ConfigBundle,
    CrossectionMode,
    EmissionDelayMode,
    ImagingConfig,
    PulsedLaserConfig,
    ScanSpec,
    SimConfig,
    TrapConfig,
    WaistMode,
)
from pulsecool.model.errors import PulseCoolWarning, ValidationError, Violation

logger = logging.getLogger(__name__)

GAMMA_LIFETIME_TOLERANCE = 0.05
BEAM_NORM_TOLERANCE = 1e-12
MEMORY_WARNING_THRESHOLD = 0.05


def _positive(violations, name, value):
    if not _is_number(value) or not value > 0:
        violations.append(Violation(name, value, "must be > 0"))


def _non_negative(violations, name, value):
    if not _is_number(value) or not value >= 0:
        violations.append(Violation(name, value, "must be >= 0"))


def _is_number(value):
    return isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, bool)


@singledispatch
def check(config) -> list:
    raise TypeError(f"no invariants registered for {type(config).__name__}")


@check.register
def _(config: AtomSpecies) -> list:
    violations = []
    for name in ("mass", "wavelength", "gamma", "lifetime"):
        _positive(violations, name, getattr(config, name))
    _non_negative(violations, "saturation_intensity", config.saturation_intensity)
    if not violations:
        product = config.gamma * config.lifetime
        if abs(product - 1.0) > GAMMA_LIFETIME_TOLERANCE:
            violations.append(Violation(
                "gamma/lifetime", (config.gamma, config.lifetime),
                f"gamma*lifetime = {product:.4f} deviates from 1 by more than "
                f"{GAMMA_LIFETIME_TOLERANCE:.0%}",
            ))
    return violations


@check.register
def _(config: TrapConfig) -> list:
    violations = []
    if len(config.omega) != 3:
        violations.append(Violation("omega", config.omega, "needs exactly three secular frequencies"))
        return violations
    for axis, value in zip("xyz", config.omega):
        _positive(violations, f"omega_{axis}", value)
    _positive(violations, "omega_rf", config.omega_rf)
    if not violations and not config.omega_rf > max(config.omega):
        violations.append(Violation(
            "omega_rf", config.omega_rf,
            "must exceed every secular frequency (secular approximation)",
        ))
    return violations


@check.register
def _(config: PulsedLaserConfig) -> list:
    violations = []
    _positive(violations, "tau", config.tau)
    _positive(violations, "rep_rate", config.rep_rate)
    _positive(violations, "waist_rms", config.waist_rms)
    if not _is_number(config.detuning) or not math.isfinite(config.detuning):
        violations.append(Violation("detuning", config.detuning, "must be finite"))
    if not _is_number(config.rabi_angle) or not 0.0 <= config.rabi_angle <= math.pi:
        violations.append(Violation("rabi_angle", config.rabi_angle, "must lie in [0, pi]"))
    if len(config.beam_dir) != 3:
        violations.append(Violation("beam_dir", config.beam_dir, "needs three components"))
    else:
        norm = float(np.linalg.norm(np.asarray(config.beam_dir, dtype=float)))
        if not abs(norm - 1.0) <= BEAM_NORM_TOLERANCE:
            violations.append(Violation("beam_dir", config.beam_dir, f"norm {norm!r} is not 1"))
    if config.pulse_energy is not None:
        _non_negative(violations, "pulse_energy", config.pulse_energy)
    return violations


@check.register
def _(config: SimConfig) -> list:
    violations = []
    if not isinstance(config.n_pulses, (int, np.integer)) or config.n_pulses < 1:
        violations.append(Violation("n_pulses", config.n_pulses, "must be a positive integer"))
    elif config.burn_in_pulses is not None:
        if not 0 <= config.burn_in_pulses < config.n_pulses:
            violations.append(Violation(
                "burn_in_pulses", config.burn_in_pulses, "must satisfy 0 <= burn_in_pulses < n_pulses",
            ))
    _non_negative(violations, "background_heating", config.background_heating)
    _non_negative(violations, "initial_temperature", config.initial_temperature)
    if config.initial_energy_ev is not None:
        _positive(violations, "initial_energy_ev", config.initial_energy_ev)
    if not isinstance(config.emission_delay_mode, EmissionDelayMode):
        violations.append(Violation("emission_delay_mode", config.emission_delay_mode, "unknown mode"))
    if config.n_blocks < 2:
        violations.append(Violation("n_blocks", config.n_blocks, "must be >= 2"))
    for name in ("energy_stride", "trajectory_stride"):
        if getattr(config, name) < 0:
            violations.append(Violation(name, getattr(config, name), "must be >= 0"))
    if not 0 <= config.seed < 2 ** 64:
        violations.append(Violation("seed", config.seed, "must fit in an unsigned 64-bit integer"))
    return violations


@check.register
def _(config: ImagingConfig) -> list:
    violations = []
    for name in ("psf_rms", "waist_rms", "pixel_size", "total_counts"):
        _positive(violations, name, getattr(config, name))
    for name in ("psf_rms_err", "waist_rms_err"):
        _non_negative(violations, name, getattr(config, name))
    if len(config.image_size) != 2 or min(config.image_size) < 5:
        violations.append(Violation("image_size", config.image_size, "needs two sizes of at least 5 pixels"))
    if config.slice_halfwidth < 0:
        violations.append(Violation("slice_halfwidth", config.slice_halfwidth, "must be >= 0"))
    if not isinstance(config.crossection_mode, CrossectionMode):
        violations.append(Violation("crossection_mode", config.crossection_mode, "unknown mode"))
    if not isinstance(config.waist_mode, WaistMode):
        violations.append(Violation("waist_mode", config.waist_mode, "unknown mode"))
    if len(config.image_axes) != 2 or len(set(config.image_axes)) != 2 \
            or not all(a in (0, 1, 2) for a in config.image_axes):
        violations.append(Violation("image_axes", config.image_axes, "needs two distinct trap axes"))
    return violations


@check.register
def _(config: ScanSpec) -> list:
    violations = []
    if len(config.detunings) == 0:
        violations.append(Violation("detunings", config.detunings, "grid is empty"))
    elif not all(math.isfinite(d) for d in config.detunings):
        violations.append(Violation("detunings", config.detunings, "must be finite"))
    if config.trials < 1:
        violations.append(Violation("trials", config.trials, "must be >= 1"))
    if config.pulses_per_trial < 1:
        violations.append(Violation("pulses_per_trial", config.pulses_per_trial, "must be >= 1"))
    elif config.burn_in_pulses is not None and not 0 <= config.burn_in_pulses < config.pulses_per_trial:
        violations.append(Violation("burn_in_pulses", config.burn_in_pulses,
                                    "must satisfy 0 <= burn_in_pulses < pulses_per_trial"))
    _non_negative(violations, "line_temperature", config.line_temperature)
    if len(config.axes) == 0 or not all(a in (0, 1, 2) for a in config.axes):
        violations.append(Violation("axes", config.axes, "must name trap axes 0, 1 or 2"))
    return violations


def validate(config):
    violations = check(config)
    if violations:
        raise ValidationError(violations, context=type(config).__name__)
    return config


def check_temperature_grid(scan: ScanSpec) -> list:
    violations = check(scan)
    positive = [d for d in scan.detunings if not d < 0]
    if positive:
        violations.append(Violation(
            "detunings", positive, "temperature scans need red (negative) detunings only",
        ))
    return violations


def memory_between_pulses(atom: AtomSpecies, laser: PulsedLaserConfig) -> float:
    """Excited population left when the next pulse arrives."""
    return math.exp(-1.0 / (laser.rep_rate * atom.lifetime))


def warn_memory(atom: AtomSpecies, laser: PulsedLaserConfig) -> bool:
    residual = memory_between_pulses(atom, laser)
    if residual > MEMORY_WARNING_THRESHOLD:
        message = (f"excited population {residual:.3f} remains at the next pulse; "
                   f"the independent-pulse model degrades")
        logger.warning(message)
        warnings.warn(message, PulseCoolWarning, stacklevel=2)
        return True
    return False


def validate_bundle(bundle: ConfigBundle) -> ConfigBundle:
    violations = []
    for part in (bundle.atom, bundle.trap, bundle.laser, bundle.sim, bundle.imaging, bundle.scan):
        violations.extend(check(part))
    if violations:
        raise ValidationError(violations, context="configuration")
    warn_memory(bundle.atom, bundle.laser)
    return bundle
