import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

logger = logging.getLogger(__name__)

MAX_EVALUATIONS = 200
PARAMETER_TOLERANCE = 1e-10


@dataclass(frozen=True)
class GaussianFitResult:
    amplitude: float
    center: float
    rms_width: float
    baseline: float
    residual_norm: float
    converged: bool
    amplitude_err: float = math.nan
    center_err: float = math.nan
    rms_width_err: float = math.nan
    baseline_err: float = math.nan
    message: str = ""


def gaussian(x, amplitude, center, rms_width, baseline):
    return baseline + amplitude * np.exp(-0.5 * ((x - center) / rms_width) ** 2)


def _failed(message, residual_norm=math.nan):
    logger.debug("gaussian fit failed: %s", message)
    return GaussianFitResult(math.nan, math.nan, math.nan, math.nan, residual_norm, False, message=message)


def initial_moments(xs, ys):
    """Baseline from the profile ends, then amplitude, centre and rms from moments of the excess."""
    n_edge = max(1, len(ys) // 10)
    baseline = float(np.median(np.concatenate([ys[:n_edge], ys[-n_edge:]])))
    excess = np.clip(ys - baseline, 0.0, None)
    total = excess.sum()
    if not total > 0:
        return None
    center = float(np.dot(excess, xs) / total)
    rms = math.sqrt(float(np.dot(excess, (xs - center) ** 2) / total))
    return np.array([float(excess.max()), center, rms, baseline])


def fit_gaussian_1d(x, y) -> GaussianFitResult:
    """Least squares of baseline + amplitude*exp(-(x-x0)^2/(2 sigma^2)).

    Coordinates are centred and scaled to the profile span, counts to the
    profile maximum. Stops when the relative parameter change falls below
    1e-10 or after 200 evaluations. A degenerate profile or a width at
    its bounds comes back with converged=False instead of raising.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 5:
        raise ValueError(f"need at least 5 matching points, got {x.size}")
    if not np.all(np.isfinite(y)):
        return _failed("non-finite profile values")

    x_mid = 0.5 * (x[0] + x[-1])
    span = float(x.max() - x.min())
    y_scale = float(np.max(np.abs(y)))
    if span <= 0 or y_scale == 0:
        return _failed("profile has no extent")
    xs = (x - x_mid) / span
    ys = y / y_scale

    p0 = initial_moments(xs, ys)
    if p0 is None or p0[2] == 0:
        return _failed("flat profile")

    step = float(np.min(np.abs(np.diff(xs))))
    width_bounds = (0.05 * step, 2.0)
    p0[2] = min(max(p0[2], 1.01 * width_bounds[0]), 0.99 * width_bounds[1])

    def residuals(p):
        return gaussian(xs, *p) - ys

    def jacobian(p):
        amplitude, center, width, _ = p
        u = (xs - center) / width
        g = np.exp(-0.5 * u * u)
        return np.column_stack([g, amplitude * g * u / width, amplitude * g * u * u / width, np.ones_like(xs)])

    lower = [-np.inf, xs.min() - 1.0, width_bounds[0], -np.inf]
    upper = [np.inf, xs.max() + 1.0, width_bounds[1], np.inf]
    try:
        result = least_squares(residuals, p0, jac=jacobian, bounds=(lower, upper), method="trf",
                               xtol=PARAMETER_TOLERANCE, ftol=1e-12, gtol=1e-14, max_nfev=MAX_EVALUATIONS)
    except (ValueError, np.linalg.LinAlgError) as e:
        return _failed(str(e))

    amplitude, center, width, baseline = result.x
    residual_norm = float(np.linalg.norm(result.fun) * y_scale)
    message = result.message
    converged = result.status > 0
    at_bound = any(abs(width - b) <= 1e-6 * b for b in width_bounds)
    if at_bound:
        converged = False
        message = f"rms width at its bound ({width * span:.4g})"
    if not amplitude > 0:
        converged = False
        message = "no peak above the baseline"

    errors = np.full(4, math.nan)
    dof = xs.size - 4
    if dof > 0:
        try:
            jtj_inv = np.linalg.inv(result.jac.T @ result.jac)
            errors = np.sqrt(np.abs(np.diag(jtj_inv)) * 2.0 * result.cost / dof)
        except np.linalg.LinAlgError:
            pass

    return GaussianFitResult(
        amplitude=float(amplitude * y_scale),
        center=float(x_mid + center * span),
        rms_width=float(abs(width) * span),
        baseline=float(baseline * y_scale),
        residual_norm=residual_norm,
        converged=bool(converged),
        amplitude_err=float(errors[0] * y_scale),
        center_err=float(errors[1] * span),
        rms_width_err=float(errors[2] * span),
        baseline_err=float(errors[3] * y_scale),
        message=message,
    )
