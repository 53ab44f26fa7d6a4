import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from pulsecool.model.constants import SECH2_FWHM_FACTOR
from pulsecool.model.errors import FitError, ValidationError, Violation
from pulsecool.theory.theory import sech2

logger = logging.getLogger(__name__)

MIN_POINTS = 4


@dataclass(frozen=True)
class LineshapeFit:
    amplitude: float
    tau: float
    center_offset: float
    residual_norm: float
    fwhm: float
    tau_err: float = math.nan


def sech2_line(delta, amplitude, tau, center):
    return amplitude * np.asarray(sech2(0.5 * tau * (np.asarray(delta) - center)))


def _half_max_edges(x, y, peak):
    """Half-maximum crossings left and right of the peak by linear interpolation; None where the data never drop below half."""
    half = 0.5 * y[peak]
    left_edge = right_edge = None
    left = np.nonzero(y[:peak] < half)[0]
    if left.size:
        i = left[-1]
        left_edge = x[i] + (half - y[i]) * (x[i + 1] - x[i]) / (y[i + 1] - y[i])
    right = np.nonzero(y[peak:] < half)[0]
    if right.size:
        j = peak + right[0]
        right_edge = x[j - 1] + (half - y[j - 1]) * (x[j] - x[j - 1]) / (y[j] - y[j - 1])
    return left_edge, right_edge


def fit_sech2(points) -> LineshapeFit:
    """Fit A*sech^2(tau*(delta - delta0)/2) to (detuning, rate) points.

    Starts from the maximum, its position and the half-maximum width,
    then refines to 1e-10 relative parameter change or 200 evaluations.
    """
    points = sorted((float(d), float(r)) for d, r in points)
    if len(points) < MIN_POINTS:
        raise ValidationError([Violation("points", len(points), f"need at least {MIN_POINTS}")],
                              context="fit_sech2")
    x = np.array([p[0] for p in points])
    y = np.array([p[1] for p in points])

    peak = int(np.argmax(y))
    amplitude0 = float(y[peak])
    if not amplitude0 > 0:
        raise FitError("no positive rates to fit")
    left_edge, right_edge = _half_max_edges(x, y, peak)
    missing = [side for side, edge in (("left", left_edge), ("right", right_edge)) if edge is None]
    if missing:
        raise ValidationError([Violation("points", float(x[-1] - x[0]),
                                         f"rates never fall below half maximum on the {' and '.join(missing)} side")],
                              context="fit_sech2")
    fwhm0 = float(right_edge - left_edge)
    tau0 = SECH2_FWHM_FACTOR / fwhm0
    initial = {"amplitude": amplitude0, "tau": tau0, "center": float(x[peak])}

    xs = (x - x[peak]) / fwhm0
    ys = y / amplitude0

    def residuals(p):
        a, q, c = p
        return a * sech2(q * (xs - c)) - ys

    def jacobian(p):
        a, q, c = p
        u = q * (xs - c)
        s = sech2(u)
        dt = -2.0 * a * s * np.tanh(u)
        return np.column_stack([s, dt * (xs - c), -dt * q])

    p0 = np.array([1.0, 0.5 * tau0 * fwhm0, 0.0])
    result = least_squares(residuals, p0, jac=jacobian, bounds=([0.0, 1e-6, -np.inf], np.inf),
                           method="trf", xtol=1e-10, ftol=1e-12, gtol=1e-14, max_nfev=200)
    if result.status <= 0:
        raise FitError(f"sech^2 fit did not converge: {result.message}", initial=initial)

    a, q, c = result.x
    tau = 2.0 * q / fwhm0
    tau_err = math.nan
    dof = xs.size - 3
    if dof > 0:
        try:
            cov = np.linalg.inv(result.jac.T @ result.jac) * 2.0 * result.cost / dof
            tau_err = 2.0 * math.sqrt(abs(cov[1, 1])) / fwhm0
        except np.linalg.LinAlgError:
            pass
    fit = LineshapeFit(
        amplitude=float(a * amplitude0),
        tau=float(tau),
        center_offset=float(x[peak] + c * fwhm0),
        residual_norm=float(np.linalg.norm(result.fun) * amplitude0),
        fwhm=float(SECH2_FWHM_FACTOR / tau),
        tau_err=float(tau_err),
    )
    logger.info("sech^2 fit: tau %.6g s, FWHM/2pi %.6g Hz", fit.tau, fit.fwhm / (2.0 * math.pi))
    return fit
