"""Edge-strength detection pipeline (WBND).

Decompose the image with the undecimated Haar transform, fit one tied
two-state HMM per directional band across the T scales, Viterbi-decode the
per-pixel coefficient chains, reduce each band's T state maps by majority
vote and join the two band votes. The diagonal band is computed by the
transform but never enters detection; its information is redundant with
the horizontal and vertical bands. The output is an over-complete edge
candidate mask meant for downstream contour refinement, so the even-T
majority tie resolves toward edge.
"""

from dataclasses import dataclass, field

import numpy as np

from .hmm import (
    EDGE,
    FitReport,
    HmmParams,
    _emission_logb,
    _viterbi_batch,
    em_fit,
    init_from_histogram,
)
from .raster import log_transform, median_filter, wiener_filter
from .udwt import UdwtPyramid, udwt_forward

DETECTION_BANDS = ("horizontal", "vertical")
PREPROCESS_MODES = ("none", "log", "log+wiener", "median")


@dataclass
class DetectorConfig:
    levels: int = 3
    init_pi: tuple[float, float] = (0.5, 0.5)
    init_a: tuple[tuple[float, float], tuple[float, float]] = ((0.95, 0.05), (0.2, 0.8))
    em_tol: float = 1e-6
    em_max_iter: int = 100
    preprocess: str = "none"
    wiener_window: int = 3
    median_window: int = 3
    combine: str = "or"
    extension: str = "symmetric"  # "periodic" is the boundary test mode


@dataclass
class StateStack:
    """Decoded Viterbi states of one band: maps[t] holds, for every pixel,
    whether the state at chain position t is "edge"."""

    band: str
    maps: np.ndarray  # (T, H, W) bool
    levels: int = field(init=False)

    def __post_init__(self):
        self.levels = self.maps.shape[0]


def _preprocess(img: np.ndarray, cfg: DetectorConfig) -> np.ndarray:
    if cfg.preprocess == "none":
        return img
    if cfg.preprocess == "log":
        return log_transform(img)
    if cfg.preprocess == "log+wiener":
        return wiener_filter(log_transform(img), cfg.wiener_window)
    if cfg.preprocess == "median":
        return median_filter(img, cfg.median_window)
    raise ValueError(f"preprocess must be one of {PREPROCESS_MODES}, got {cfg.preprocess!r}")


def decode_band(pyr: UdwtPyramid, band: str, params: HmmParams) -> StateStack:
    """Viterbi-decode every pixel's coefficient chain of one band."""
    if band not in DETECTION_BANDS:
        raise ValueError(f"band must be one of {DETECTION_BANDS}, got {band!r}")
    coeffs = getattr(pyr, band)  # (T, H, W)
    t_len, h, w = coeffs.shape
    chains = coeffs.reshape(t_len, h * w).T
    states = _viterbi_batch(_emission_logb(chains, params), params.pi, params.a)
    return StateStack(band=band, maps=(states.T.reshape(t_len, h, w) == EDGE))


def majority_vote(stack: StateStack) -> np.ndarray:
    """Pixel is edge iff edge states hold a majority of the T positions;
    an exact tie (even T) counts as edge."""
    counts = stack.maps.sum(axis=0, dtype=np.int64)
    return 2 * counts >= stack.levels


def or_combine(h: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Pixel-wise logical OR of two equally sized binary maps."""
    h = np.asarray(h, dtype=bool)
    v = np.asarray(v, dtype=bool)
    if h.shape != v.shape:
        raise ValueError(f"dimension mismatch: {h.shape} vs {v.shape}")
    return h | v


def wbnd_detect(
    img, cfg: DetectorConfig | None = None, n_workers: int = 1
) -> tuple[np.ndarray, tuple[FitReport, FitReport]]:
    """Run the full detection pipeline on one image.

    Returns the combined edge-strength mask together with the two fit
    reports (horizontal band first). Deterministic for fixed inputs and
    configuration, for any ``n_workers``.
    """
    cfg = cfg or DetectorConfig()
    if cfg.combine not in ("or", "and"):
        raise ValueError(f"combine must be 'or' or 'and', got {cfg.combine!r}")
    img = _preprocess(np.asarray(img, dtype=np.float64), cfg)
    pyr = udwt_forward(img, cfg.levels, cfg.extension)

    votes = {}
    reports = {}
    for band in DETECTION_BANDS:
        coeffs = getattr(pyr, band)
        chains = coeffs.reshape(cfg.levels, -1).T
        sigma0, phi0 = init_from_histogram(chains)
        init = HmmParams(pi=cfg.init_pi, a=cfg.init_a, sigma=sigma0, phi=phi0)
        report = em_fit(
            chains, init, tol=cfg.em_tol, max_iter=cfg.em_max_iter, n_workers=n_workers
        )
        reports[band] = report
        votes[band] = majority_vote(decode_band(pyr, band, report.params))

    if cfg.combine == "or":
        mask = or_combine(votes["horizontal"], votes["vertical"])
    else:
        mask = votes["horizontal"] & votes["vertical"]
    return mask, (reports["horizontal"], reports["vertical"])
