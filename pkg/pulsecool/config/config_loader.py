"""Load, check and write configuration files.

Files hold the sections [atom] [trap] [laser] [sim] [imaging] [scan].
Angular quantities take an explicit unit suffix: `_hz` values are
multiplied by 2*pi here, `_rad` values are taken as rad/s. Missing keys
keep the Cd+ defaults; unknown keys are errors. Every problem found in a
file is reported in a single ConfigError.
"""

import json
import logging
import math
from dataclasses import replace
from pathlib import Path

from pulsecool.config.config_parser import ConfigParser
from pulsecool.model.config_types import (
    ConfigBundle,
    CrossectionMode,
    EmissionDelayMode,
    WaistMode,
)
from pulsecool.model.constants import AMU, angular_to_hz, hz_to_angular
from pulsecool.model.errors import ConfigError, Violation
from pulsecool.model.validation import check, warn_memory

logger = logging.getLogger(__name__)

_parser = ConfigParser()


def _real(value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError("expected a number")
    return float(value)


def _count(value):
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError("expected an integer")
    return value


def _mass_u(value):
    return _real(value) * AMU


def _burn_in(value):
    if value == "auto":
        return None
    return _count(value)


def _text(value):
    if not isinstance(value, str):
        raise ValueError("expected a quoted string")
    return value


def _reals(size=None):
    def convert(value):
        values = value if isinstance(value, tuple) else (value,)
        result = tuple(_real(v) for v in values)
        if size is not None and len(result) != size:
            raise ValueError(f"expected {size} values, got {len(result)}")
        return result
    return convert


def _counts(size=None):
    def convert(value):
        values = value if isinstance(value, tuple) else (value,)
        result = tuple(_count(v) for v in values)
        if size is not None and len(result) != size:
            raise ValueError(f"expected {size} values, got {len(result)}")
        return result
    return convert


def _choice(enum):
    def convert(value):
        try:
            return enum(value)
        except ValueError:
            options = ", ".join(e.value for e in enum)
            raise ValueError(f"expected one of {options}") from None
    return convert


def _beam(value):
    vector = _reals(3)(value)
    norm = math.sqrt(sum(c * c for c in vector))
    if norm == 0.0:
        raise ValueError("beam direction has zero length")
    return tuple(c / norm for c in vector)


# key -> (field, converter). Keys listed in ANGULAR take _hz/_rad suffixes.
FIELDS = {
    "atom": {
        "mass": ("mass", _real),
        "mass_u": ("mass", _mass_u),
        "wavelength": ("wavelength", _real),
        "gamma": ("gamma", _real),
        "lifetime": ("lifetime", _real),
        "saturation_intensity": ("saturation_intensity", _real),
    },
    "trap": {
        "omega_x": ("omega_x", _real),
        "omega_y": ("omega_y", _real),
        "omega_z": ("omega_z", _real),
        "omega_rf": ("omega_rf", _real),
    },
    "laser": {
        "tau": ("tau", _real),
        "rep_rate": ("rep_rate", _real),
        "detuning": ("detuning", _real),
        "rabi_angle": ("rabi_angle", _real),
        "beam_dir": ("beam_dir", _beam),
        "waist_rms": ("waist_rms", _real),
        "pulse_energy": ("pulse_energy", _real),
    },
    "sim": {
        "seed": ("seed", _count),
        "n_pulses": ("n_pulses", _count),
        "burn_in_pulses": ("burn_in_pulses", _burn_in),
        "background_heating": ("background_heating", _real),
        "emission_delay_mode": ("emission_delay_mode", _choice(EmissionDelayMode)),
        "initial_temperature": ("initial_temperature", _real),
        "initial_energy_ev": ("initial_energy_ev", _real),
        "n_blocks": ("n_blocks", _count),
        "energy_stride": ("energy_stride", _count),
        "trajectory_stride": ("trajectory_stride", _count),
    },
    "imaging": {
        "psf_rms": ("psf_rms", _real),
        "psf_rms_err": ("psf_rms_err", _real),
        "waist_rms": ("waist_rms", _real),
        "waist_rms_err": ("waist_rms_err", _real),
        "beam_angle_in_image": ("beam_angle_in_image", _real),
        "pixel_size": ("pixel_size", _real),
        "image_size": ("image_size", _counts(2)),
        "total_counts": ("total_counts", _real),
        "crossection_mode": ("crossection_mode", _choice(CrossectionMode)),
        "slice_halfwidth": ("slice_halfwidth", _count),
        "waist_mode": ("waist_mode", _choice(WaistMode)),
        "image_axes": ("image_axes", _counts(2)),
    },
    "scan": {
        "detunings": ("detunings", _reals()),
        "trials": ("trials", _count),
        "pulses_per_trial": ("pulses_per_trial", _count),
        "burn_in_pulses": ("burn_in_pulses", _burn_in),
        "line_temperature": ("line_temperature", _real),
        "axes": ("axes", _counts()),
        "temperature_csv": ("temperature_csv", _text),
        "lineshape_csv": ("lineshape_csv", _text),
        "timeout_s": ("timeout_s", _real),
    },
}

ANGULAR = {
    ("atom", "gamma"),
    ("trap", "omega_x"), ("trap", "omega_y"), ("trap", "omega_z"), ("trap", "omega_rf"),
    ("laser", "detuning"),
    ("scan", "detunings"),
}


def _resolve_key(section, key):
    """Map a file key to (FIELDS key, angular scale) or None if unknown."""
    for suffix, scale in (("_hz", hz_to_angular), ("_rad", None)):
        if key.endswith(suffix):
            base = key[: -len(suffix)]
            if (section, base) in ANGULAR:
                return base, scale
    if (section, key) in ANGULAR:
        return None
    if key in FIELDS[section]:
        return key, None
    return None


def _scaled(value, scale):
    if scale is None:
        return value
    if isinstance(value, tuple):
        return tuple(scale(v) for v in value)
    return scale(value)


def _section_values(section, entries, violations):
    values = {}
    for key, raw in entries.items():
        resolved = _resolve_key(section, key)
        if resolved is None:
            if (section, key) in ANGULAR:
                message = f"needs a unit suffix: {key}_hz or {key}_rad"
            else:
                message = "unknown key"
            violations.append(Violation(f"{section}.{key}", raw, message))
            continue
        base, scale = resolved
        field, convert = FIELDS[section][base]
        if field in values:
            violations.append(Violation(f"{section}.{key}", raw, f"{field} given more than once"))
            continue
        try:
            values[field] = _scaled(convert(raw), scale)
        except (TypeError, ValueError) as e:
            violations.append(Violation(f"{section}.{key}", raw, str(e)))
    return values


def _build_bundle(sections, violations) -> ConfigBundle:
    defaults = ConfigBundle()
    parsed = {name: _section_values(name, sections.get(name, {}), violations) for name in FIELDS}

    atom_values = parsed["atom"]
    if "gamma" in atom_values and "lifetime" not in atom_values:
        atom_values["lifetime"] = 1.0 / atom_values["gamma"] if atom_values["gamma"] else math.inf
    elif "lifetime" in atom_values and "gamma" not in atom_values:
        atom_values["gamma"] = 1.0 / atom_values["lifetime"] if atom_values["lifetime"] else math.inf
    atom = replace(defaults.atom, **atom_values)

    trap_values = parsed["trap"]
    omega = list(defaults.trap.omega)
    for i, axis in enumerate("xyz"):
        if f"omega_{axis}" in trap_values:
            omega[i] = trap_values.pop(f"omega_{axis}")
    trap = replace(defaults.trap, omega=tuple(omega), **trap_values)

    return ConfigBundle(
        atom=atom,
        trap=trap,
        laser=replace(defaults.laser, **parsed["laser"]),
        sim=replace(defaults.sim, **parsed["sim"]),
        imaging=replace(defaults.imaging, **parsed["imaging"]),
        scan=replace(defaults.scan, **parsed["scan"]),
    )


def parse_config_text(text: str, source: str = "<string>") -> ConfigBundle:
    parsed = _parser.parse(text)
    if "error" in parsed:
        raise ConfigError([Violation("syntax", source, parsed["error"].strip())], context=source)

    violations = [Violation(name, None, "given more than once") for name in parsed["duplicates"]]
    for name, entries in parsed["sections"].items():
        if name not in FIELDS:
            violations.append(Violation(f"[{name}]", None, "unknown section"))
    sections = {k: v for k, v in parsed["sections"].items() if k in FIELDS}

    bundle = _build_bundle(sections, violations)
    for part in (bundle.atom, bundle.trap, bundle.laser, bundle.sim, bundle.imaging, bundle.scan):
        violations.extend(check(part))
    if violations:
        raise ConfigError(violations, context=source)

    warn_memory(bundle.atom, bundle.laser)
    logger.debug("loaded configuration from %s", source)
    return bundle


def load_config(path) -> ConfigBundle:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError([Violation("path", str(path), str(e))], context=str(path)) from e
    return parse_config_text(text, source=str(path))


def _number(value) -> str:
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    return repr(float(value))


def _format_value(value) -> str:
    if isinstance(value, (EmissionDelayMode, CrossectionMode, WaistMode)):
        return value.value
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, tuple):
        return ", ".join(_number(v) for v in value)
    return _number(value)


def _hz(value) -> str:
    return f"{angular_to_hz(value):.17g}"


def format_config(bundle: ConfigBundle) -> str:
    """Write a bundle back in the file format; angular values as _hz."""
    atom, trap, laser, sim = bundle.atom, bundle.trap, bundle.laser, bundle.sim
    lines = [
        "# angular frequencies are written as f = omega/2pi in Hz",
        "[atom]",
        f"mass = {_number(atom.mass)}",
        f"wavelength = {_number(atom.wavelength)}",
        f"gamma_hz = {_hz(atom.gamma)}",
        f"lifetime = {_number(atom.lifetime)}",
        f"saturation_intensity = {_number(atom.saturation_intensity)}",
        "",
        "[trap]",
    ]
    for axis, value in zip("xyz", trap.omega):
        lines.append(f"omega_{axis}_hz = {_hz(value)}")
    lines += [
        f"omega_rf_hz = {_hz(trap.omega_rf)}",
        "",
        "[laser]",
        f"tau = {_number(laser.tau)}",
        f"rep_rate = {_number(laser.rep_rate)}",
        f"detuning_hz = {_hz(laser.detuning)}",
        f"rabi_angle = {_number(laser.rabi_angle)}",
        f"beam_dir = {_format_value(laser.beam_dir)}",
        f"waist_rms = {_number(laser.waist_rms)}",
    ]
    if laser.pulse_energy is not None:
        lines.append(f"pulse_energy = {_number(laser.pulse_energy)}")

    lines += ["", "[sim]"]
    for name, value in vars(sim).items():
        if name == "burn_in_pulses" and value is None:
            lines.append("burn_in_pulses = auto")
        elif value is not None:
            lines.append(f"{name} = {_format_value(value)}")

    lines += ["", "[imaging]"]
    lines += [f"{name} = {_format_value(value)}" for name, value in vars(bundle.imaging).items()]

    lines += ["", "[scan]"]
    for name, value in vars(bundle.scan).items():
        if name == "detunings":
            if value:
                lines.append("detunings_hz = " + ", ".join(_hz(v) for v in value))
        elif name == "burn_in_pulses" and value is None:
            lines.append("burn_in_pulses = auto")
        elif value is not None:
            lines.append(f"{name} = {_format_value(value)}")
    return "\n".join(lines) + "\n"
