"""Comparison detectors: hard-thresholded level-1 Haar (HTHW) and Canny.

HTHW labels a pixel as edge candidate when the largest of its three
level-1 undecimated Haar coefficient magnitudes exceeds a threshold, then
optionally suppresses candidates that are not local maxima perpendicular
to the winning orientation. Canny is the standard pipeline implemented
natively so the benchmark has no external detector dependency.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .udwt import udwt_forward


@dataclass
class HthwConfig:
    threshold: float
    nms: bool = True


def _padded_neighbors(m: np.ndarray):
    """Eight neighbor views of m; outside pixels read as -1 (< any |coef|)."""
    mp = np.pad(m, 1, constant_values=-1.0)
    return {
        "left": mp[1:-1, :-2],
        "right": mp[1:-1, 2:],
        "up": mp[:-2, 1:-1],
        "down": mp[2:, 1:-1],
        "ul": mp[:-2, :-2],
        "ur": mp[:-2, 2:],
        "dl": mp[2:, :-2],
        "dr": mp[2:, 2:],
    }


def hthw_detect(img, cfg: HthwConfig) -> np.ndarray:
    """Hard-thresholding Haar wavelet detector on the level-1 bands.

    Per pixel, m = max(|H|, |V|, |D|) with the orientation of the largest
    coefficient (ties resolve H, then V, then D); a pixel is a candidate iff
    m > threshold. With NMS enabled, a candidate survives only if m is >=
    its two neighbors across the winning orientation: left/right for H,
    up/down for V, and all four diagonal neighbors for D.
    """
    if cfg.threshold <= 0:
        raise ValueError(f"threshold must be positive, got {cfg.threshold}")
    pyr = udwt_forward(img, 1)
    mags = np.stack([np.abs(pyr.horizontal[0]), np.abs(pyr.vertical[0]), np.abs(pyr.diagonal[0])])
    m = mags.max(axis=0)
    mask = m > cfg.threshold
    if not cfg.nms:
        return mask

    orient = mags.argmax(axis=0)  # 0=H, 1=V, 2=D; first max wins the tie
    nb = _padded_neighbors(m)
    keep_h = (m >= nb["left"]) & (m >= nb["right"])
    keep_v = (m >= nb["up"]) & (m >= nb["down"])
    keep_d = (m >= nb["ul"]) & (m >= nb["dr"]) & (m >= nb["ur"]) & (m >= nb["dl"])
    keep = np.where(orient == 0, keep_h, np.where(orient == 1, keep_v, keep_d))
    return mask & keep


def _gradients(img: np.ndarray):
    """Central-difference gradients with symmetric boundary extension."""
    p = np.pad(img, 1, mode="symmetric")
    gx = 0.5 * (p[1:-1, 2:] - p[1:-1, :-2])
    gy = 0.5 * (p[2:, 1:-1] - p[:-2, 1:-1])
    return gx, gy


def gradient_magnitude(img, smooth_sigma: float = 0.0) -> np.ndarray:
    """Smoothed gradient magnitude, exactly as canny_detect computes it."""
    img = np.asarray(img, dtype=np.float64)
    if smooth_sigma > 0:
        img = ndimage.gaussian_filter(img, smooth_sigma, mode="reflect")
    gx, gy = _gradients(img)
    return np.hypot(gx, gy)


def _sectors(gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Gradient direction quantized to 4 sectors: 0=E/W, 1=45deg (down-right),
    2=N/S, 3=135deg (up-right). Rows grow downward."""
    ang = np.degrees(np.arctan2(gy, gx))
    ang[ang < 0] += 180.0
    sector = np.zeros(ang.shape, dtype=np.int8)
    sector[(ang >= 22.5) & (ang < 67.5)] = 1
    sector[(ang >= 67.5) & (ang < 112.5)] = 2
    sector[(ang >= 112.5) & (ang < 157.5)] = 3
    return sector


def canny_detect(img, low: float, high: float, smooth_sigma: float = 1.0) -> np.ndarray:
    """Canny edge detection: Gaussian smoothing, central-difference
    gradients, magnitude NMS over 4 quantized directions, double-threshold
    hysteresis with 8-connectivity linking."""
    if not (0 <= low <= high):
        raise ValueError(f"need 0 <= low <= high, got low={low}, high={high}")
    if smooth_sigma < 0:
        raise ValueError(f"smooth_sigma must be >= 0, got {smooth_sigma}")
    img = np.asarray(img, dtype=np.float64)
    if smooth_sigma > 0:
        img = ndimage.gaussian_filter(img, smooth_sigma, mode="reflect")
    gx, gy = _gradients(img)
    mag = np.hypot(gx, gy)
    sector = _sectors(gx, gy)

    nb = _padded_neighbors(mag)
    pairs = (
        (nb["left"], nb["right"]),  # sector 0: gradient along x
        (nb["ul"], nb["dr"]),       # sector 1
        (nb["up"], nb["down"]),     # sector 2
        (nb["dl"], nb["ur"]),       # sector 3
    )
    keep = np.zeros(mag.shape, dtype=bool)
    for s, (n1, n2) in enumerate(pairs):
        keep |= (sector == s) & (mag >= n1) & (mag >= n2)

    weak = keep & (mag > low)
    strong = keep & (mag > high)
    if not strong.any():
        return np.zeros(mag.shape, dtype=bool)
    labels, _ = ndimage.label(weak, structure=np.ones((3, 3), dtype=np.int8))
    linked = np.unique(labels[strong])
    return weak & np.isin(labels, linked)
