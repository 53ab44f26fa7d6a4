import logging
from dataclasses import dataclass

import numpy as np

from pulsecool.imaging.gaussian_fit import fit_gaussian_1d, initial_moments
from pulsecool.imaging.synth import SyntheticImage
from pulsecool.model.config_types import CrossectionMode
from pulsecool.model.errors import CrossectionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CrossectionProfile:
    positions: np.ndarray
    values: np.ndarray
    mode: CrossectionMode
    column: int | None = None


def centroid_column(image: SyntheticImage) -> int:
    """Nearest column to the fitted centre of the horizontal marginal."""
    marginal = image.counts.sum(axis=0).astype(float)
    positions = image.horizontal_positions()
    fit = fit_gaussian_1d(positions, marginal)
    if fit.converged:
        center = fit.center
    else:
        moments = initial_moments(positions, marginal)
        if moments is None:
            raise CrossectionError("image has no signal to locate a centroid")
        center = moments[1]
    column = int(round(center / image.pixel_size)) + image.origin[0]
    if not 0 <= column < image.width:
        raise CrossectionError(f"centroid column {column} lies outside the {image.width}-pixel image")
    return column


def crossection(image: SyntheticImage, mode=CrossectionMode.SLICE, slice_halfwidth: int = 3) -> CrossectionProfile:
    """Vertical profile: mean of the band of columns through the centroid, or the full row sums."""
    if image.counts.size == 0:
        raise CrossectionError("empty image")
    mode = CrossectionMode(mode)
    positions = image.vertical_positions()
    counts = image.counts.astype(float)
    if mode is CrossectionMode.MARGINAL:
        return CrossectionProfile(positions, counts.sum(axis=1), mode)

    column = centroid_column(image)
    lo = max(0, column - slice_halfwidth)
    hi = min(image.width, column + slice_halfwidth + 1)
    if hi - lo < 2 * slice_halfwidth + 1:
        logger.warning("slice band clipped to columns %d..%d at the image edge", lo, hi - 1)
    return CrossectionProfile(positions, counts[:, lo:hi].mean(axis=1), mode, column)
