"""Wavelet-domain Bayesian edge-strength detection.

Undecimated Haar decomposition, per-pixel hidden Markov chains across
scales fitted by EM and decoded by Viterbi, deterministic map combination,
two baseline detectors, supervised quality metrics and a reproducible
noise-sweep benchmark.
"""

from .baselines import HthwConfig, canny_detect, hthw_detect
from .bench import (
    BENCH_NOISE_SIGMAS,
    BenchConfig,
    BenchReport,
    QualityCurve,
    load_bench_config,
    quality_curve,
    run_benchmark,
    tile_detect,
)
from .detector import (
    DetectorConfig,
    StateStack,
    decode_band,
    majority_vote,
    or_combine,
    wbnd_detect,
)
from .hmm import (
    EDGE,
    NO_EDGE,
    ChainStats,
    FitReport,
    HmmParams,
    em_fit,
    emission_logpdf,
    fit_report_from_text,
    fit_report_to_text,
    forward_backward,
    init_from_histogram,
    scale_floors,
    viterbi,
)
from .metrics import (
    QualityReport,
    baddeley_error,
    distance_transform,
    evaluate,
    kappa_index,
    pratt_fom,
)
from .raster import (
    CorruptHeaderError,
    NoiseSpec,
    UnsupportedFormatError,
    add_gaussian_noise,
    load_binary_map,
    load_image,
    log_transform,
    median_filter,
    save_binary_map,
    save_image,
    wiener_filter,
)
from .udwt import UdwtPyramid, dump_bands, extract_chain, udwt_forward, udwt_inverse

__version__ = "0.1.0"
