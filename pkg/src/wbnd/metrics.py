"""Supervised edge-map quality measures.

All three measures compare a candidate binary map against a ground-truth
map of equal size: the Pratt figure of merit (localization-weighted match
score in [0, 1]), the Baddeley error (a pseudo-metric built from
cutoff-transformed exact Euclidean distance fields) and Cohen's kappa
(chance-corrected pixel-wise agreement).
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

PRATT_ALPHA = 1.0 / 9.0
BADDELEY_CUTOFF = 5.0


@dataclass
class QualityReport:
    pratt: float
    baddeley: float
    kappa: float
    counts: tuple[int, int, int, int]  # (tp, fp, fn, tn)


def _as_map(m) -> np.ndarray:
    m = np.asarray(m, dtype=bool)
    if m.ndim != 2 or m.size == 0:
        raise ValueError(f"expected a non-empty 2-D binary map, got shape {m.shape}")
    return m


def _check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def distance_transform(labels) -> np.ndarray:
    """Exact Euclidean distance from every pixel to the nearest true pixel.

    An empty map yields the sentinel width + height everywhere (farther than
    any in-grid distance).
    """
    labels = _as_map(labels)
    if not labels.any():
        h, w = labels.shape
        return np.full((h, w), float(w + h))
    return ndimage.distance_transform_edt(~labels)


def pratt_fom(candidate, truth) -> float:
    """Pratt figure of merit of ``candidate`` against ``truth``.

    P = (1 / max(#truth, #candidate)) * sum over candidate pixels of
    1 / (1 + alpha * rho^2) with alpha = 1/9 and rho the Euclidean distance
    to the nearest truth pixel. Empty candidate scores 0; empty truth is an
    error.
    """
    candidate = _as_map(candidate)
    truth = _as_map(truth)
    _check_same_shape(candidate, truth)
    n_truth = int(truth.sum())
    if n_truth == 0:
        raise ValueError("ground truth map has no edge pixels")
    n_cand = int(candidate.sum())
    if n_cand == 0:
        return 0.0
    rho = distance_transform(truth)[candidate]
    return float(np.sum(1.0 / (1.0 + PRATT_ALPHA * rho * rho)) / max(n_truth, n_cand))


def _cutoff_field(labels: np.ndarray) -> np.ndarray:
    if not labels.any():
        # Empty-map distances use the cutoff value itself so the measure
        # stays finite and grid-size independent.
        return np.full(labels.shape, BADDELEY_CUTOFF)
    return np.minimum(distance_transform(labels), BADDELEY_CUTOFF)


def baddeley_error(truth, candidate, literal_truth_domain: bool = False) -> float:
    """Baddeley error between two maps with cutoff omega(t) = min(t, 5).

    Delta = sqrt( (1/(n m)) * sum over all pixels s of
    |omega(rho(s, truth)) - omega(rho(s, candidate))|^2 ). The sum runs over
    the full raster; ``literal_truth_domain`` restricts it to the truth edge
    pixels instead (audit variant, same normalization).
    """
    truth = _as_map(truth)
    candidate = _as_map(candidate)
    _check_same_shape(truth, candidate)
    diff = _cutoff_field(truth) - _cutoff_field(candidate)
    if literal_truth_domain:
        diff = diff[truth]
    return float(np.sqrt(np.sum(diff * diff) / truth.size))


def confusion_counts(candidate, truth) -> tuple[int, int, int, int]:
    """Pixel-wise (tp, fp, fn, tn) of candidate against truth."""
    candidate = _as_map(candidate)
    truth = _as_map(truth)
    _check_same_shape(candidate, truth)
    tp = int(np.sum(candidate & truth))
    fp = int(np.sum(candidate & ~truth))
    fn = int(np.sum(~candidate & truth))
    tn = int(np.sum(~candidate & ~truth))
    return tp, fp, fn, tn


def kappa_index(candidate, truth) -> float:
    """Cohen's kappa on the pixel-wise 2x2 confusion matrix.

    kappa = (P_o - P_e) / (1 - P_e) with the observed agreement P_o =
    (TP+TN)/N and the chance agreement P_e = [(TP+FP)(TP+FN) +
    (FN+TN)(FP+TN)] / N^2. When P_e = 1 the result is 1 if the maps agree
    everywhere and 0 otherwise.
    """
    tp, fp, fn, tn = confusion_counts(candidate, truth)
    n = tp + fp + fn + tn
    p_o = (tp + tn) / n
    p_e = ((tp + fp) * (tp + fn) + (fn + tn) * (fp + tn)) / (n * n)
    if p_e >= 1.0:
        return 1.0 if p_o == 1.0 else 0.0
    return float((p_o - p_e) / (1.0 - p_e))


def evaluate(candidate, truth) -> QualityReport:
    """All three measures plus the confusion counts for one map pair."""
    return QualityReport(
        pratt=pratt_fom(candidate, truth),
        baddeley=baddeley_error(truth, candidate),
        kappa=kappa_index(candidate, truth),
        counts=confusion_counts(candidate, truth),
    )
