"""Raster containers, grayscale file I/O and pixel-domain preprocessing.

Conventions used across the package: an image is a 2-D float64 array
indexed ``[row, col]`` (row 0 at the top), a binary map is a 2-D bool
array of the same layout with True marking edge pixels. Supported file
formats are binary PGM (P5, maxval 255 or 65535) and grayscale PNG;
nothing else.
"""

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage


class UnsupportedFormatError(ValueError):
    """File is readable but not an accepted grayscale format."""


class CorruptHeaderError(ValueError):
    """File claims an accepted format but its header or payload is broken."""


@dataclass(frozen=True)
class NoiseSpec:
    """Additive Gaussian noise: standard deviation in intensity units plus
    the 64-bit seed of the generator. The canonical benchmark sweep uses
    sigma in {0, 5, 10, 20, 30, 40, 50}; any non-negative value is valid."""

    sigma: float
    seed: int = 0


def as_image(data) -> np.ndarray:
    """Coerce to a 2-D float64 image array."""
    img = np.asarray(data, dtype=np.float64)
    if img.ndim != 2 or img.size == 0:
        raise ValueError(f"expected a non-empty 2-D image, got shape {img.shape}")
    return img


# ---------------------------------------------------------------------------
# file I/O


def _read_pgm(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        raw = fh.read()

    magic = raw[:2]
    if magic != b"P5":
        if len(magic) == 2 and magic[:1] == b"P":
            raise UnsupportedFormatError(
                f"{path}: unsupported format (only binary PGM 'P5' is accepted)"
            )
        raise CorruptHeaderError(f"{path}: not a PGM file (bad magic {magic!r})")

    # Header: three ASCII integers separated by whitespace; '#' starts a
    # comment running to end of line. A single whitespace byte separates the
    # maxval from the raster.
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            eol = raw.find(b"\n", pos)
            pos = len(raw) if eol < 0 else eol + 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        token = raw[start:pos]
        if not token.isdigit():
            raise CorruptHeaderError(f"{path}: corrupt PGM header near byte {start}")
        fields.append(int(token))
    pos += 1  # the single whitespace after maxval

    width, height, maxval = fields
    if width <= 0 or height <= 0:
        raise CorruptHeaderError(f"{path}: non-positive PGM dimensions {width}x{height}")
    if maxval == 255:
        dtype = ">u1"
    elif maxval == 65535:
        dtype = ">u2"
    else:
        raise UnsupportedFormatError(f"{path}: unsupported PGM maxval {maxval}")

    itemsize = np.dtype(dtype).itemsize
    expected = width * height * itemsize
    data = raw[pos : pos + expected]
    if len(data) != expected:
        raise CorruptHeaderError(
            f"{path}: truncated PGM payload ({len(data)} of {expected} bytes)"
        )
    pixels = np.frombuffer(data, dtype=dtype).reshape(height, width)
    return pixels.astype(np.float64)


_GRAY_PNG_MODES = {"L", "I", "I;16", "I;16B", "I;16L", "I;16N"}


def _read_png(path: str) -> np.ndarray:
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode == "1":
                im = im.convert("L")
            if im.mode not in _GRAY_PNG_MODES:
                raise UnsupportedFormatError(
                    f"{path}: unsupported format (mode {im.mode}; grayscale PNG required)"
                )
            return np.asarray(im, dtype=np.float64)
    except UnidentifiedImageError as exc:
        raise CorruptHeaderError(f"{path}: not a valid PNG file") from exc


def load_image(path) -> np.ndarray:
    """Load an 8- or 16-bit grayscale PGM or PNG, preserving integer pixel
    values exactly as float64. Color inputs are rejected."""
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise FileNotFoundError(f"{path}: no such file")
    suffix = os.path.splitext(path)[1].lower()
    if suffix in (".pgm", ".pnm"):
        return _read_pgm(path)
    if suffix == ".png":
        return _read_png(path)
    raise UnsupportedFormatError(f"{path}: unsupported format (expected .pgm or .png)")


def save_binary_map(labels, path) -> None:
    """Write a binary map as an 8-bit PGM with edge=255, non-edge=0."""
    labels = np.asarray(labels, dtype=bool)
    if labels.ndim != 2:
        raise ValueError(f"expected a 2-D binary map, got shape {labels.shape}")
    _write_pgm(np.where(labels, 255, 0).astype(np.uint8), path)


def save_image(img, path) -> None:
    """Write an image as an 8-bit PGM, rounding and clipping to [0, 255]."""
    img = as_image(img)
    _write_pgm(np.clip(np.rint(img), 0, 255).astype(np.uint8), path)


def _write_pgm(pixels: np.ndarray, path) -> None:
    height, width = pixels.shape
    with open(os.fspath(path), "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())


def load_binary_map(path, threshold: float = 128.0) -> np.ndarray:
    """Load a raster and threshold it into a binary map (value >= threshold)."""
    return load_image(path) >= threshold


# ---------------------------------------------------------------------------
# preprocessing


def log_transform(img) -> np.ndarray:
    """Map every pixel v to ln(1 + v); monotone and finite, 0 maps to 0."""
    img = as_image(img)
    if np.any(img < 0):
        y, x = np.argwhere(img < 0)[0]
        raise ValueError(f"negative pixel value {img[y, x]} at (row={y}, col={x})")
    return np.log1p(img)


def add_gaussian_noise(img, spec: NoiseSpec) -> np.ndarray:
    """Add i.i.d. zero-mean Gaussian noise with std ``spec.sigma`` drawn from
    a generator seeded by ``spec.seed``. Values are kept as reals (no
    clipping); identical inputs always yield identical outputs."""
    img = as_image(img)
    if spec.sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {spec.sigma}")
    if spec.sigma == 0:
        return img.copy()
    rng = np.random.default_rng(spec.seed)
    return img + rng.normal(0.0, spec.sigma, img.shape)


def _check_window(window: int) -> None:
    if window < 3 or window % 2 == 0:
        raise ValueError(f"window must be an odd integer >= 3, got {window}")


def wiener_filter(img, window: int = 3, noise_var: float | None = None) -> np.ndarray:
    """Local adaptive (Wiener) filter.

    Per pixel, with local mean ``mu`` and variance ``s2`` over a
    ``window x window`` neighborhood (symmetric boundary extension), the
    output is ``mu + max(s2 - nu, 0) / max(s2, tiny) * (v - mu)`` where the
    noise variance ``nu`` defaults to the mean of all local variances.
    """
    img = as_image(img)
    _check_window(window)
    mu = ndimage.uniform_filter(img, size=window, mode="reflect")
    s2 = ndimage.uniform_filter(img * img, size=window, mode="reflect") - mu * mu
    np.clip(s2, 0.0, None, out=s2)
    nu = float(np.mean(s2)) if noise_var is None else float(noise_var)
    gain = np.maximum(s2 - nu, 0.0) / np.maximum(s2, np.finfo(np.float64).tiny)
    return mu + gain * (img - mu)


def median_filter(img, window: int = 3) -> np.ndarray:
    """Per-pixel window median with symmetric boundary extension."""
    img = as_image(img)
    _check_window(window)
    return ndimage.median_filter(img, size=window, mode="reflect")
