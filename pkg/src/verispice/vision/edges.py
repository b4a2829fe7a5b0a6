"""Gaussian smoothing and Canny edge extraction.

The constants mirror the detection recipe: 5x5 blur whose sigma follows the
0.3*((ksize-1)/2 - 1) + 0.8 rule for an unspecified sigma, and hysteresis
thresholds 50/150 on the Sobel gradient magnitude.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

BLUR_KSIZE = 5
CANNY_LOW = 50.0
CANNY_HIGH = 150.0


def auto_sigma(ksize: int) -> float:
    """Sigma implied by a kernel size when none is given."""
    return 0.3 * ((ksize - 1) / 2 - 1) + 0.8


def gaussian_blur(gray: np.ndarray, ksize: int = BLUR_KSIZE, sigma: float | None = None
                  ) -> np.ndarray:
    """Separable Gaussian blur with a truncated, normalized kernel."""
    if sigma is None:
        sigma = auto_sigma(ksize)
    half = (ksize - 1) / 2
    x = np.arange(ksize) - half
    kernel = np.exp(-(x * x) / (2 * sigma * sigma))
    kernel /= kernel.sum()
    out = gray.astype(np.float64)
    out = ndimage.correlate1d(out, kernel, axis=0, mode="mirror")
    out = ndimage.correlate1d(out, kernel, axis=1, mode="mirror")
    return out


def canny(gray: np.ndarray, low: float = CANNY_LOW, high: float = CANNY_HIGH) -> np.ndarray:
    """Edge map: blur, Sobel, non-maximum suppression, hysteresis.

    Returns a bool array. Input is the raw grayscale image; blurring is
    part of this step so callers pass the unsmoothed picture.
    """
    smooth = gaussian_blur(gray)
    gx = ndimage.sobel(smooth, axis=1, mode="mirror")
    gy = ndimage.sobel(smooth, axis=0, mode="mirror")
    # L1 magnitude: the 50/150 defaults are calibrated against |gx|+|gy|.
    mag = np.abs(gx) + np.abs(gy)

    # Quantize gradient direction into 4 sectors and keep local maxima
    # along the gradient. Neighbor lookups go through a zero padded copy.
    angle = np.mod(np.arctan2(gy, gx), np.pi)
    sector = np.zeros(angle.shape, dtype=np.uint8)
    sector[(angle >= np.pi / 8) & (angle < 3 * np.pi / 8)] = 1
    sector[(angle >= 3 * np.pi / 8) & (angle < 5 * np.pi / 8)] = 2
    sector[(angle >= 5 * np.pi / 8) & (angle < 7 * np.pi / 8)] = 3

    padded = np.pad(mag, 1)
    center = padded[1:-1, 1:-1]

    def shifted(dy: int, dx: int) -> np.ndarray:
        return padded[1 + dy : padded.shape[0] - 1 + dy, 1 + dx : padded.shape[1] - 1 + dx]

    # Offsets along the gradient for each sector: horizontal gradient
    # compares east/west, then the diagonals, then north/south.
    pairs = {
        0: ((0, 1), (0, -1)),
        1: ((1, 1), (-1, -1)),
        2: ((1, 0), (-1, 0)),
        3: ((1, -1), (-1, 1)),
    }
    keep = np.zeros(mag.shape, dtype=bool)
    for s, ((dy1, dx1), (dy2, dx2)) in pairs.items():
        mask = sector == s
        keep |= mask & (center >= shifted(dy1, dx1)) & (center >= shifted(dy2, dx2))

    strong = keep & (mag >= high)
    candidate = keep & (mag >= low)
    eight = np.ones((3, 3), dtype=bool)
    return ndimage.binary_propagation(strong, structure=eight, mask=candidate)
