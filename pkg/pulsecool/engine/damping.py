import logging
import math

import numpy as np
from scipy import stats

from pulsecool.engine.ion_state import DampingFit
from pulsecool.model.errors import InsufficientRangeError

logger = logging.getLogger(__name__)

MIN_EFOLDS = 3.0


def measure_damping_rate(times, energies, e_eq=None, floor_factor=3.0, confidence=0.95) -> DampingFit:
    """Fit log(E - E_eq) against time over the initial decay.

    `energies` is a 1-D series or an (n, axes) array, summed over axes.
    Without `e_eq` the floor is the median of the last quarter of the
    series. Points are used up to the first one whose excess over the
    floor drops below `floor_factor * e_eq`.
    """
    times = np.asarray(times, dtype=float)
    energies = np.asarray(energies, dtype=float)
    if energies.ndim == 2:
        energies = energies.sum(axis=1)
    if times.shape != energies.shape:
        raise ValueError(f"times {times.shape} and energies {energies.shape} differ in shape")
    if e_eq is None:
        tail = energies[-max(1, len(energies) // 4):]
        e_eq = float(np.median(tail)) if len(tail) else 0.0

    excess = energies - e_eq
    threshold = floor_factor * e_eq if e_eq > 0 else 0.0
    below = np.nonzero(excess <= threshold)[0]
    end = int(below[0]) if below.size else len(excess)
    if end < 3:
        raise InsufficientRangeError(f"only {end} points above the equilibrium floor")

    dynamic_range = float(excess[0] / excess[end - 1])
    if not dynamic_range > math.exp(MIN_EFOLDS):
        raise InsufficientRangeError(
            f"energy falls by {dynamic_range:.3g}x, need {math.exp(MIN_EFOLDS):.3g}x "
            f"({MIN_EFOLDS:g} e-folds) above the floor")

    fit = stats.linregress(times[:end], np.log(excess[:end]))
    rate = -fit.slope
    half = stats.t.ppf(0.5 + 0.5 * confidence, end - 2) * fit.stderr if end > 2 else math.inf
    logger.debug("damping fit over %d points: rate %.6g 1/s +- %.3g", end, rate, half)
    return DampingFit(
        energy_rate=float(rate),
        energy_rate_ci=(float(rate - half), float(rate + half)),
        beta_over_m=float(rate / 2.0),
        beta_over_m_ci=(float((rate - half) / 2.0), float((rate + half) / 2.0)),
        n_points=end,
        dynamic_range=dynamic_range,
    )
