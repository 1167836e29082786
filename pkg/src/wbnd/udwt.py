"""Undecimated (a trous) Haar wavelet transform.

Every decomposition level keeps the full image size. Level t (1 = finest)
uses the base averaging pair h = [1/2, 1/2] and differencing pair
g = [1/2, -1/2] with 2^(t-1) - 1 zeros inserted between the taps, so the
two taps of a level-t filter sit at offsets 0 and 2^(t-1). The bands of
one level are separable products of h/g across columns and rows of the
previous approximation:

    approximation  h across columns, h across rows
    horizontal     g across columns, h across rows   (responds to vertical steps)
    vertical       h across columns, g across rows
    diagonal       g across columns, g across rows

With this normalization h + g is the identity, so synthesis is the plain
per-level sum ``approx + H + V + D`` and reconstruction is exact to
rounding error. Coefficients stay in the intensity units of the input at
every level, which is what lets one emission model tie across scales.
"""

import os
from dataclasses import dataclass, field

import numpy as np

BAND_NAMES = ("horizontal", "vertical", "diagonal")
EXTENSIONS = ("symmetric", "periodic")


@dataclass
class UdwtPyramid:
    """T detail levels per direction plus the level-T approximation.

    Band arrays have shape (T, H, W) with index 0 holding the finest level;
    the approximation is (H, W).
    """

    horizontal: np.ndarray
    vertical: np.ndarray
    diagonal: np.ndarray
    approximation: np.ndarray
    extension: str = field(default="symmetric")

    @property
    def levels(self) -> int:
        return self.horizontal.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.approximation.shape


def _shifted_index(n: int, step: int, extension: str) -> np.ndarray:
    """Indices of position + step under the requested boundary extension."""
    idx = np.arange(n) + step
    if extension == "periodic":
        return idx % n
    over = idx >= n
    idx[over] = 2 * n - 1 - idx[over]
    return idx


def _check_extension(extension: str) -> None:
    if extension not in EXTENSIONS:
        raise ValueError(f"extension must be one of {EXTENSIONS}, got {extension!r}")


def udwt_forward(img, levels: int, extension: str = "symmetric") -> UdwtPyramid:
    """Separable a trous Haar analysis of ``img`` over ``levels`` scales.

    Boundary handling is symmetric mirroring by default; ``periodic`` is the
    test-mode switch under which the transform commutes exactly with
    circular shifts. Requires at least 2**levels pixels per dimension.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {img.shape}")
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    _check_extension(extension)
    h, w = img.shape
    if min(h, w) < 2**levels:
        raise ValueError(
            f"image {h}x{w} too small for {levels} levels (needs >= {2 ** levels} per side)"
        )

    horizontal = np.empty((levels, h, w))
    vertical = np.empty((levels, h, w))
    diagonal = np.empty((levels, h, w))
    approx = img
    for t in range(levels):
        step = 1 << t
        rows = _shifted_index(h, step, extension)
        cols = _shifted_index(w, step, extension)
        shifted = approx[rows, :]
        low_y = 0.5 * (approx + shifted)
        high_y = 0.5 * (approx - shifted)
        horizontal[t] = 0.5 * (low_y - low_y[:, cols])
        vertical[t] = 0.5 * (high_y + high_y[:, cols])
        diagonal[t] = 0.5 * (high_y - high_y[:, cols])
        approx = 0.5 * (low_y + low_y[:, cols])

    return UdwtPyramid(horizontal, vertical, diagonal, approx, extension)


def udwt_inverse(pyr: UdwtPyramid) -> np.ndarray:
    """Synthesis dual of :func:`udwt_forward`; exact reconstruction."""
    shape = pyr.approximation.shape
    for name in BAND_NAMES:
        band = getattr(pyr, name)
        if band.ndim != 3 or band.shape[1:] != shape:
            raise ValueError(
                f"{name} band shape {band.shape} does not match approximation {shape}"
            )
    if not (pyr.horizontal.shape[0] == pyr.vertical.shape[0] == pyr.diagonal.shape[0]):
        raise ValueError("detail bands disagree on the number of levels")

    img = pyr.approximation
    for t in range(pyr.levels - 1, -1, -1):
        img = ((img + pyr.horizontal[t]) + pyr.vertical[t]) + pyr.diagonal[t]
    return img


def extract_chain(pyr: UdwtPyramid, band: str, x: int, y: int) -> np.ndarray:
    """Coefficient chain (W_1, ..., W_T) of one pixel in one directional band.

    ``x`` is the column, ``y`` the row; index 0 of the result is the finest
    level.
    """
    if band not in ("horizontal", "vertical"):
        raise ValueError(f"band must be 'horizontal' or 'vertical', got {band!r}")
    h, w = pyr.shape
    if not (0 <= x < w and 0 <= y < h):
        raise IndexError(f"pixel (x={x}, y={y}) outside {w}x{h} grid")
    return getattr(pyr, band)[:, y, x].copy()


def dump_bands(pyr: UdwtPyramid, directory) -> list[str]:
    """Debug dump: one PGM per band per level plus the approximation, each
    affinely rescaled to 0..255. The rescaling parameters are recorded in a
    ``scales.txt`` sidecar (one ``name offset scale`` line per file)."""
    from .raster import save_image

    directory = os.fspath(directory)
    os.makedirs(directory, exist_ok=True)
    entries = []
    written = []

    def _dump(name: str, grid: np.ndarray) -> None:
        lo = float(grid.min())
        hi = float(grid.max())
        scale = 255.0 / (hi - lo) if hi > lo else 1.0
        save_image((grid - lo) * scale, os.path.join(directory, name))
        entries.append(f"{name} {lo!r} {scale!r}")
        written.append(name)

    for t in range(pyr.levels):
        for short, band in (("h", "horizontal"), ("v", "vertical"), ("d", "diagonal")):
            _dump(f"{short}{t + 1}.pgm", getattr(pyr, band)[t])
    _dump("approx.pgm", pyr.approximation)

    with open(os.path.join(directory, "scales.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(entries) + "\n")
    return written
