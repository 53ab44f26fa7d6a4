import logging
import math
from dataclasses import dataclass

from pulsecool.imaging.corrections import invert_crossection_width, psf_correct, waist_correct
from pulsecool.imaging.crossection import crossection
from pulsecool.imaging.gaussian_fit import GaussianFitResult, fit_gaussian_1d
from pulsecool.imaging.synth import SyntheticImage
from pulsecool.model.config_types import CD114, ImagingConfig, TrapConfig, WaistMode
from pulsecool.model.errors import FitError, PulseCoolError, UnresolvableError
from pulsecool.theory.theory import temperature_from_rms

logger = logging.getLogger(__name__)

RESOLUTION_SIGMAS = 2.0
STEP = 1e-4


@dataclass(frozen=True)
class ImageTemperature:
    """Temperature of the trap axis shown vertically in the image."""
    axis: int
    temperature: float
    temperature_err: float
    x_rms: float
    x_im: float
    x_im_err: float
    waist_mode: WaistMode
    closed_form_temperature: float
    closed_form_temperature_err: float
    fit: GaussianFitResult


def _x_rms(x_im, x_r, x_w, trap, imaging, mode):
    axis_h, axis_v = imaging.image_axes
    if mode is WaistMode.FORWARD:
        return invert_crossection_width(
            x_im, x_r, x_w, imaging.beam_angle_in_image,
            aspect=trap.omega[axis_v] / trap.omega[axis_h],
            mode=imaging.crossection_mode, pixel_size=imaging.pixel_size,
            slice_halfwidth=imaging.slice_halfwidth)
    x_corr = psf_correct(x_im, x_r)
    return waist_correct(x_corr, x_im, x_w, imaging.phi, mode)


def _propagate(temperature_of, values, errors):
    """First-order error from central differences in each input."""
    total = 0.0
    for i, (value, err) in enumerate(zip(values, errors)):
        if not err > 0 or not math.isfinite(err):
            continue
        h = STEP * value
        up, down = list(values), list(values)
        up[i] += h
        down[i] -= h
        derivative = (temperature_of(*up) - temperature_of(*down)) / (2.0 * h)
        total += (derivative * err) ** 2
    return math.sqrt(total)


def _chain(x_im, x_im_err, trap, imaging, mass, mode):
    omega = trap.omega[imaging.image_axes[1]]

    def temperature_of(x_im_, x_r_, x_w_):
        return temperature_from_rms(_x_rms(x_im_, x_r_, x_w_, trap, imaging, mode), omega, mass)

    values = (x_im, imaging.psf_rms, imaging.waist_rms)
    x_rms = _x_rms(*values, trap, imaging, mode)
    temperature = temperature_from_rms(x_rms, omega, mass)
    try:
        err = _propagate(temperature_of, values, (x_im_err, imaging.psf_rms_err, imaging.waist_rms_err))
    except PulseCoolError as e:
        logger.warning("uncertainty propagation stepped out of the valid range: %s", e)
        err = math.nan
    return x_rms, temperature, err


def temperature_from_image(image: SyntheticImage, trap: TrapConfig, imaging: ImagingConfig,
                           mass: float = CD114.mass) -> ImageTemperature:
    """Crossection, Gaussian fit, width corrections, then k_B T = m (omega x_rms)^2.

    The correction step follows `imaging.waist_mode`; the closed-form
    chain with the uncorrected width in the waist term is always
    reported next to it.
    """
    profile = crossection(image, imaging.crossection_mode, imaging.slice_halfwidth)
    fit = fit_gaussian_1d(profile.positions, profile.values)
    if not fit.converged:
        raise FitError(f"crossection fit did not converge: {fit.message}")

    x_im, x_im_err = fit.rms_width, fit.rms_width_err
    margin = RESOLUTION_SIGMAS * math.hypot(x_im_err if math.isfinite(x_im_err) else 0.0, imaging.psf_rms_err)
    if x_im - imaging.psf_rms <= margin:
        raise UnresolvableError(
            f"imaged width {x_im:.4g} m is within {RESOLUTION_SIGMAS:g} sigma of the PSF rms "
            f"{imaging.psf_rms:.4g} m; the ion is not resolved")

    mode = WaistMode(imaging.waist_mode)
    x_rms, temperature, err = _chain(x_im, x_im_err, trap, imaging, mass, mode)
    if mode is WaistMode.CLOSED_FORM:
        closed_temperature, closed_err = temperature, err
    else:
        try:
            _, closed_temperature, closed_err = _chain(x_im, x_im_err, trap, imaging, mass, WaistMode.CLOSED_FORM)
        except PulseCoolError as e:
            logger.info("closed-form chain not applicable: %s", e)
            closed_temperature, closed_err = math.nan, math.nan

    logger.info("image temperature %.4g +- %.2g K (%s), closed form %.4g K",
                temperature, err, mode.value, closed_temperature)
    return ImageTemperature(
        axis=imaging.image_axes[1],
        temperature=float(temperature),
        temperature_err=float(err),
        x_rms=float(x_rms),
        x_im=float(x_im),
        x_im_err=float(x_im_err),
        waist_mode=mode,
        closed_form_temperature=float(closed_temperature),
        closed_form_temperature_err=float(closed_err),
        fit=fit,
    )
