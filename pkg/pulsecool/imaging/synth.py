"""Synthetic time-averaged fluorescence images of a thermal ion.

Image frame: columns run along the horizontal image axis, rows along the
vertical one, and the trap centre sits on the centre of pixel
(width // 2, height // 2). The beam crosses the image plane at
`beam_angle_in_image` from the horizontal; brightness falls off as a
Gaussian of rms `waist_rms` transverse to it.
"""

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from pulsecool.model.config_types import CD114, ImagingConfig, TrapConfig
from pulsecool.model.constants import K_B

logger = logging.getLogger(__name__)

IMAGE_SIGMAS = 4.0


def thermal_sigma(temperature, omega, mass):
    value = np.sqrt(K_B * np.asarray(temperature, dtype=float) / (mass * np.asarray(omega, dtype=float) ** 2))
    return float(value) if value.ndim == 0 else value


def beam_transverse(beam_angle_in_image: float) -> np.ndarray:
    return np.array([-math.sin(beam_angle_in_image), math.cos(beam_angle_in_image)])


def object_covariance(sigma_h, sigma_v, waist_rms, beam_angle_in_image) -> np.ndarray:
    """Covariance of the thermal Gaussian weighted by the beam profile (h, v frame)."""
    s = np.diag([sigma_h ** 2, sigma_v ** 2])
    if math.isinf(waist_rms):
        return s
    p = beam_transverse(beam_angle_in_image)
    sp = s @ p
    return s - np.outer(sp, sp) / (waist_rms ** 2 + p @ sp)


def image_covariance(sigma_h, sigma_v, imaging: ImagingConfig) -> np.ndarray:
    return object_covariance(sigma_h, sigma_v, imaging.waist_rms, imaging.beam_angle_in_image) \
        + imaging.psf_rms ** 2 * np.eye(2)


@dataclass(frozen=True)
class SyntheticImage:
    counts: np.ndarray
    pixel_size: float
    origin: tuple
    metadata: dict = field(default_factory=dict)

    @property
    def width(self) -> int:
        return self.counts.shape[1]

    @property
    def height(self) -> int:
        return self.counts.shape[0]

    def horizontal_positions(self) -> np.ndarray:
        return (np.arange(self.width) - self.origin[0]) * self.pixel_size

    def vertical_positions(self) -> np.ndarray:
        return (np.arange(self.height) - self.origin[1]) * self.pixel_size


def expected_counts(sigma_h, sigma_v, imaging: ImagingConfig) -> np.ndarray:
    width, height = imaging.image_size
    cov = image_covariance(sigma_h, sigma_v, imaging)
    h = (np.arange(width) - width // 2) * imaging.pixel_size
    v = (np.arange(height) - height // 2) * imaging.pixel_size
    hh, vv = np.meshgrid(h, v)
    r = np.stack([hh, vv], axis=-1)
    precision = np.linalg.inv(cov)
    exponent = -0.5 * np.einsum("...i,ij,...j->...", r, precision, r)
    density = np.exp(exponent) / (2.0 * math.pi * math.sqrt(np.linalg.det(cov)))
    return imaging.total_counts * density * imaging.pixel_size ** 2


def fitted_image_size(sigma_h, sigma_v, imaging: ImagingConfig) -> tuple:
    """Configured frame, grown where IMAGE_SIGMAS imaged rms would not fit on each side of the centre."""
    cov = image_covariance(sigma_h, sigma_v, imaging)
    needed = (2 * math.ceil(IMAGE_SIGMAS * math.sqrt(cov[i, i]) / imaging.pixel_size) + 1 for i in (0, 1))
    return tuple(max(int(size), n) for size, n in zip(imaging.image_size, needed))


def synthesize_image(trap: TrapConfig, imaging: ImagingConfig, rng: np.random.Generator,
                     temperature: float | None = None, sigmas: tuple | None = None,
                     mass: float = CD114.mass) -> SyntheticImage:
    """Poisson image of an ion at `temperature`, or with explicit (horizontal, vertical) sigmas."""
    axis_h, axis_v = imaging.image_axes
    if sigmas is None:
        if temperature is None:
            raise ValueError("give a temperature or per-axis sigmas")
        sigmas = (thermal_sigma(temperature, trap.omega[axis_h], mass),
                  thermal_sigma(temperature, trap.omega[axis_v], mass))
    sigma_h, sigma_v = (float(s) for s in sigmas)
    size = fitted_image_size(sigma_h, sigma_v, imaging)
    if size != tuple(imaging.image_size):
        logger.warning("image grown from %dx%d to %dx%d pixels so the ion is not clipped",
                       *imaging.image_size, *size)
        imaging = replace(imaging, image_size=size)
    counts = rng.poisson(expected_counts(sigma_h, sigma_v, imaging))
    width, height = imaging.image_size
    logger.debug("synthesized %dx%d image, sigmas (%.4g, %.4g) m, %d counts",
                 width, height, sigma_h, sigma_v, counts.sum())
    return SyntheticImage(
        counts=counts.astype(np.int64),
        pixel_size=imaging.pixel_size,
        origin=(width // 2, height // 2),
        metadata={
            "temperature": temperature,
            "sigma_h": sigma_h,
            "sigma_v": sigma_v,
            "psf_rms": imaging.psf_rms,
            "waist_rms": imaging.waist_rms,
            "beam_angle_in_image": imaging.beam_angle_in_image,
            "total_counts": imaging.total_counts,
        },
    )
