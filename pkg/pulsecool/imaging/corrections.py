"""Width corrections from a fitted crossection back to the rms ion motion.

`psf_correct` and `waist_correct` are the closed-form chain: subtract the
PSF in quadrature, then undo the beam-profile narrowing. The forward
model (`predicted_crossection_variance`) describes the fitted width
exactly for a Gaussian object; `invert_crossection_width` solves it for
the vertical rms motion.
"""

import math

import numpy as np
from scipy.optimize import brentq

from pulsecool.imaging.synth import object_covariance
from pulsecool.model.config_types import CrossectionMode, WaistMode
from pulsecool.model.errors import GeometryError, UnresolvableError


def psf_correct(x_im: float, x_r: float) -> float:
    if not x_im > x_r:
        raise UnresolvableError(f"imaged width {x_im!r} m does not exceed the PSF rms {x_r!r} m")
    return math.sqrt(x_im ** 2 - x_r ** 2)


def waist_correct(x_corr: float, x_im: float, x_w: float, phi: float, mode=WaistMode.CLOSED_FORM) -> float:
    """Undo the brightness weighting of the beam for a crossection at angle phi to the beam.

    CLOSED_FORM puts the uncorrected width inside the radical, SELF_CONSISTENT the
    PSF-corrected one.
    """
    if math.isinf(x_w):
        return x_corr
    mode = WaistMode(mode)
    inner = x_corr if mode is WaistMode.SELF_CONSISTENT else x_im
    radicand = x_w ** 2 - (inner * math.sin(phi)) ** 2
    if not radicand > 0:
        raise GeometryError(
            f"width {inner!r} m at phi={phi!r} rad is too large for a beam of rms {x_w!r} m")
    return x_w * x_corr / math.sqrt(radicand)


def predicted_crossection_variance(sigma_h, sigma_v, psf_rms, waist_rms, beam_angle_in_image,
                                   mode=CrossectionMode.MARGINAL, pixel_size=None,
                                   slice_halfwidth=0) -> float:
    cov = object_covariance(sigma_h, sigma_v, waist_rms, beam_angle_in_image) + psf_rms ** 2 * np.eye(2)
    b_hh, b_hv, b_vv = cov[0, 0], cov[0, 1], cov[1, 1]
    if CrossectionMode(mode) is CrossectionMode.MARGINAL:
        return float(b_vv)

    # columns at offsets j*pixel from the centroid: a mixture of the
    # conditional profiles, each shifted by its regression on h
    conditional = b_vv - b_hv ** 2 / b_hh
    offsets = np.arange(-slice_halfwidth, slice_halfwidth + 1) * (pixel_size or 0.0)
    weights = np.exp(-0.5 * offsets ** 2 / b_hh)
    weights /= weights.sum()
    means = b_hv / b_hh * offsets
    spread = float(np.dot(weights, means ** 2) - np.dot(weights, means) ** 2)
    return float(conditional + spread)


def invert_crossection_width(x_im, psf_rms, waist_rms, beam_angle_in_image, aspect=1.0,
                             mode=CrossectionMode.MARGINAL, pixel_size=None, slice_halfwidth=0) -> float:
    """Vertical rms motion whose predicted crossection width equals x_im.

    `aspect` is sigma_h / sigma_v (omega_v / omega_h for a thermal ion).
    """
    target = x_im ** 2

    def mismatch(sigma_v):
        return predicted_crossection_variance(aspect * sigma_v, sigma_v, psf_rms, waist_rms,
                                              beam_angle_in_image, mode, pixel_size,
                                              slice_halfwidth) - target

    if not mismatch(0.0) < 0:
        raise UnresolvableError(f"imaged width {x_im!r} m is not wider than a point source")
    hi = max(x_im, waist_rms if math.isfinite(waist_rms) else x_im)
    for _ in range(60):
        if mismatch(hi) > 0:
            break
        hi *= 2.0
    else:
        raise GeometryError(f"no ion size reproduces an imaged width of {x_im!r} m in this beam geometry")
    return brentq(mismatch, 0.0, hi, xtol=1e-16, rtol=1e-13)
