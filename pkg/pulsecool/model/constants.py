import math

import scipy.constants as const

# CODATA values as shipped by scipy
HBAR = const.hbar
K_B = const.k
AMU = const.atomic_mass
EV = const.electron_volt

TWO_PI = 2.0 * math.pi

# FWHM of sech^2(tau*delta/2) in angular frequency is this factor over tau.
SECH2_FWHM_FACTOR = 4.0 * math.acosh(math.sqrt(2.0))


def hz_to_angular(value_hz):
    """Cycles per second to rad/s."""
    return TWO_PI * value_hz


def angular_to_hz(value_rad):
    """rad/s to cycles per second."""
    return value_rad / TWO_PI


def format_frequency(value_rad: float) -> str:
    """Human-readable label for an angular frequency, shown as f = omega/2pi."""
    hz = angular_to_hz(value_rad)
    magnitude = abs(hz)
    if magnitude >= 1e9:
        return f"{hz / 1e9:.6g} GHz"
    if magnitude >= 1e6:
        return f"{hz / 1e6:.6g} MHz"
    if magnitude >= 1e3:
        return f"{hz / 1e3:.6g} kHz"
    return f"{hz:.6g} Hz"
