"""Two-state hidden Markov chains over the wavelet scales of one band.

State 0 ("no-edge") emits a zero-mean Gaussian with std ``sigma``; state 1
("edge") emits a zero-mean Laplacian parameterized by its std ``phi``:

    f(w | no-edge) = exp(-w^2 / (2 sigma^2)) / (sqrt(2 pi) sigma)
    f(w | edge)    = exp(-sqrt(2) |w| / phi) / (sqrt(2) phi)

The forward-backward recursions are run with per-step normalization (the
scaling constants are kept, so the log-likelihood is their log-sum and the
returned posteriors equal the unscaled ratios exactly up to rounding);
additionally each step's emission row is shifted by its maximum in the log
domain, which makes the scaled pass immune to underflow for any finite
parameters. All chains of one band are treated as independent observations
of a single tied model, so EM accumulates sufficient statistics across
chains. Accumulation is chunked with a fixed chunk size and the partial
sums are combined in chunk order, which makes the fitted parameters
bit-identical for any worker count.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

NO_EDGE = 0
EDGE = 1

_LN_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)
_SQRT2 = np.sqrt(2.0)
_CHUNK = 1 << 16


@dataclass
class HmmParams:
    """theta = {a_ij, pi_i, phi, sigma}.

    ``pi`` is the length-2 initial distribution (index 0 = no-edge), ``a``
    the 2x2 row-stochastic transition matrix with a[i, j] = P(S_{t+1}=j |
    S_t=i), ``sigma`` the Gaussian std of the no-edge emission and ``phi``
    the Laplacian scale (std) of the edge emission.
    """

    pi: np.ndarray
    a: np.ndarray
    sigma: float
    phi: float

    def __post_init__(self):
        self.pi = np.asarray(self.pi, dtype=np.float64).reshape(2)
        self.a = np.asarray(self.a, dtype=np.float64).reshape(2, 2)


@dataclass
class ChainStats:
    """Posterior state/transition probabilities of one chain.

    ``gamma[t, i]`` is the state posterior L_i(t) for t = 0..T-1 and
    ``xi[t, i, j]`` the transition posterior H_ij(t) for t = 0..T-2;
    ``loglik`` is ln P(chain | theta).
    """

    gamma: np.ndarray
    xi: np.ndarray
    loglik: float


@dataclass
class FitReport:
    params: HmmParams
    loglik_trace: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


def _check_params(params: HmmParams) -> None:
    if not np.isfinite(params.pi).all() or abs(params.pi.sum() - 1.0) > 1e-6:
        raise ValueError(f"pi must be a probability vector, got {params.pi}")
    if np.any(params.pi < 0) or np.any(params.a < 0) or np.any(params.a > 1):
        raise ValueError("probabilities must lie in [0, 1]")
    if np.max(np.abs(params.a.sum(axis=1) - 1.0)) > 1e-6:
        raise ValueError(f"transition rows must sum to 1, got {params.a}")
    if not (params.sigma > 0 and params.phi > 0):
        raise ValueError(f"sigma and phi must be positive, got {params.sigma}, {params.phi}")


_STATE_ALIASES = {NO_EDGE: NO_EDGE, EDGE: EDGE, "no-edge": NO_EDGE, "edge": EDGE}


def emission_logpdf(w, state, params: HmmParams):
    """Log-density of coefficient value(s) ``w`` under one emission state."""
    try:
        state = _STATE_ALIASES[state]
    except (KeyError, TypeError):
        raise ValueError(f"state must be 0/'no-edge' or 1/'edge', got {state!r}") from None
    w = np.asarray(w, dtype=np.float64)
    if state == NO_EDGE:
        out = -_LN_SQRT_2PI - np.log(params.sigma) - w * w / (2.0 * params.sigma**2)
    else:
        out = -np.log(_SQRT2 * params.phi) - (_SQRT2 / params.phi) * np.abs(w)
    return out if out.ndim else float(out)


def _emission_logb(chains, params, absw=None, sq=None):
    """Emission log-densities for a (n, T) chain batch; shape (n, T, 2)."""
    if absw is None:
        absw = np.abs(chains)
    if sq is None:
        sq = chains * chains
    logb = np.empty(chains.shape + (2,))
    logb[..., NO_EDGE] = (-_LN_SQRT_2PI - np.log(params.sigma)) - sq * (
        0.5 / (params.sigma * params.sigma)
    )
    logb[..., EDGE] = -np.log(_SQRT2 * params.phi) - absw * (_SQRT2 / params.phi)
    return logb


def _forward_backward_batch(logb, pi, a):
    """Scaled forward-backward over a batch of chains.

    ``logb`` has shape (n, T, 2). Returns (gamma, xi, loglik) with shapes
    (n, T, 2), (n, T-1, 2, 2) and (n,).
    """
    n, t_len, _ = logb.shape
    bmax = logb.max(axis=2)
    b = np.exp(logb - bmax[..., None])

    alpha = np.empty((n, t_len, 2))
    c = np.empty((n, t_len))
    tmp = pi[None, :] * b[:, 0, :]
    c[:, 0] = tmp.sum(axis=1)
    np.maximum(c[:, 0], np.finfo(np.float64).tiny, out=c[:, 0])
    alpha[:, 0] = tmp / c[:, 0, None]
    for t in range(1, t_len):
        tmp = (alpha[:, t - 1] @ a) * b[:, t]
        c[:, t] = tmp.sum(axis=1)
        np.maximum(c[:, t], np.finfo(np.float64).tiny, out=c[:, t])
        alpha[:, t] = tmp / c[:, t, None]

    gamma = np.empty((n, t_len, 2))
    xi = np.empty((n, t_len - 1, 2, 2))
    gamma[:, t_len - 1] = alpha[:, t_len - 1]
    beta = np.ones((n, 2))
    for t in range(t_len - 2, -1, -1):
        # w_j = b_j(t+1) * beta_j(t+1) / c_{t+1}
        w = b[:, t + 1] * beta / c[:, t + 1, None]
        xi[:, t] = alpha[:, t, :, None] * a[None, :, :] * w[:, None, :]
        beta = w @ a.T
        gamma[:, t] = alpha[:, t] * beta

    loglik = (np.log(c) + bmax).sum(axis=1)
    return gamma, xi, loglik


def forward_backward(chain, params: HmmParams) -> ChainStats:
    """Posterior state and transition probabilities of one chain."""
    _check_params(params)
    chain = np.atleast_1d(np.asarray(chain, dtype=np.float64))
    if chain.ndim != 1 or chain.size == 0:
        raise ValueError(f"expected a non-empty 1-D chain, got shape {chain.shape}")
    logb = _emission_logb(chain[None, :], params)
    gamma, xi, loglik = _forward_backward_batch(logb, params.pi, params.a)
    return ChainStats(gamma=gamma[0], xi=xi[0], loglik=float(loglik[0]))


def _viterbi_batch(logb, pi, a):
    """Log-domain Viterbi over a batch; ties prefer the no-edge state."""
    n, t_len, _ = logb.shape
    with np.errstate(divide="ignore"):
        logpi = np.log(pi)
        loga = np.log(a)
    delta = logpi[None, :] + logb[:, 0, :]
    back = np.empty((n, t_len, 2), dtype=np.int8)
    for t in range(1, t_len):
        cand = delta[:, :, None] + loga[None, :, :]
        best = cand.argmax(axis=1)  # first max: ties resolve toward state 0
        delta = np.take_along_axis(cand, best[:, None, :], axis=1)[:, 0, :] + logb[:, t, :]
        back[:, t] = best.astype(np.int8)
    states = np.empty((n, t_len), dtype=np.int8)
    states[:, t_len - 1] = delta.argmax(axis=1)
    rows = np.arange(n)
    for t in range(t_len - 2, -1, -1):
        states[:, t] = back[rows, t + 1, states[:, t + 1]]
    return states


def viterbi(chain, params: HmmParams) -> np.ndarray:
    """Most probable state sequence of one chain (argmax_s P(s | w, theta)).

    Computed in the log domain; exactly equal to exhaustive maximization
    over all 2^T paths. On exactly tied path scores the no-edge state is
    preferred at every decision point (final state and each backpointer).
    """
    _check_params(params)
    chain = np.atleast_1d(np.asarray(chain, dtype=np.float64))
    if chain.ndim != 1 or chain.size == 0:
        raise ValueError(f"expected a non-empty 1-D chain, got shape {chain.shape}")
    logb = _emission_logb(chain[None, :], params)
    return _viterbi_batch(logb, params.pi, params.a)[0]


# ---------------------------------------------------------------------------
# initialization and fitting


def scale_floors(coeffs) -> tuple[float, float]:
    """Lower bounds for (sigma, phi), derived from the band's magnitudes.

    sigma_floor = 1e-4 x 99th percentile of |w| (absolute minimum 1e-8);
    phi_floor is twice that, so that on identically-zero data the no-edge
    emission keeps the higher density at w = 0 and blank regions decode as
    no-edge rather than edge.
    """
    mags = np.abs(np.asarray(coeffs, dtype=np.float64).ravel())
    sigma_floor = max(1e-4 * float(np.percentile(mags, 99)), 1e-8)
    return sigma_floor, 2.0 * sigma_floor


def init_from_histogram(band_coeffs) -> tuple[float, float]:
    """Starting (sigma0, phi0) from the coefficient histogram.

    sigma0 is the robust std of the central mass, 1.4826 x MAD; phi0 is
    mean(|w|) / sqrt(2) over the coefficients above the 90th percentile of
    |w|. Both are floored by :func:`scale_floors`.
    """
    w = np.asarray(band_coeffs, dtype=np.float64).ravel()
    if w.size < 100:
        raise ValueError(f"need at least 100 coefficients, got {w.size}")
    med = np.median(w)
    sigma0 = 1.4826 * float(np.median(np.abs(w - med)))
    mags = np.abs(w)
    tail = mags[mags > np.percentile(mags, 90)]
    phi0 = float(tail.mean()) / _SQRT2 if tail.size else 0.0
    sigma_floor, phi_floor = scale_floors(w)
    return max(sigma0, sigma_floor), max(phi0, phi_floor)


def _swap_states(params: HmmParams) -> HmmParams:
    """Relabel so the edge state owns the larger emission scale. The
    emission family is tied to the label, so this exchanges the scales and
    mirrors pi and the transition matrix."""
    return HmmParams(
        pi=params.pi[::-1].copy(),
        a=params.a[::-1, ::-1].copy(),
        sigma=params.phi,
        phi=params.sigma,
    )


def _chunk_stats(chains, absw, sq, params, lo, hi):
    """Sufficient statistics of one chunk, packed as a flat vector:
    [pi(2), xi_sum(4), gamma_den(2), phi_num, phi_den, sig_num, sig_den, ll].
    """
    logb = _emission_logb(chains[lo:hi], params, absw[lo:hi], sq[lo:hi])
    gamma, xi, loglik = _forward_backward_batch(logb, params.pi, params.a)
    g_edge = gamma[..., EDGE]
    g_no = gamma[..., NO_EDGE]
    out = np.empty(13)
    out[0:2] = gamma[:, 0, :].sum(axis=0)
    out[2:6] = xi.sum(axis=(0, 1)).ravel()
    out[6:8] = gamma[:, :-1, :].sum(axis=(0, 1))
    out[8] = (g_edge * absw[lo:hi]).sum()
    out[9] = g_edge.sum()
    out[10] = (g_no * sq[lo:hi]).sum()
    out[11] = g_no.sum()
    out[12] = loglik.sum()
    return out


def _e_step(chains, absw, sq, params, executor):
    bounds = [(lo, min(lo + _CHUNK, chains.shape[0])) for lo in range(0, chains.shape[0], _CHUNK)]
    if executor is None:
        partials = [_chunk_stats(chains, absw, sq, params, lo, hi) for lo, hi in bounds]
    else:
        futures = [executor.submit(_chunk_stats, chains, absw, sq, params, lo, hi) for lo, hi in bounds]
        partials = [f.result() for f in futures]
    stats = partials[0].copy()
    for part in partials[1:]:  # fixed combination order: worker count never matters
        stats += part
    return stats


def _m_step(stats, prev: HmmParams, floors, n_chains, t_len) -> HmmParams:
    pi = stats[0:2] / n_chains
    a = prev.a.copy()
    if t_len > 1:
        xi_sum = stats[2:6].reshape(2, 2)
        den = stats[6:8]
        for i in range(2):
            if den[i] > 0:
                a[i] = xi_sum[i] / den[i]
    phi = _SQRT2 * stats[8] / stats[9] if stats[9] > 0 else prev.phi
    # The update formula yields the variance of the no-edge emission; the
    # stored parameter is its square root.
    sigma = float(np.sqrt(stats[10] / stats[11])) if stats[11] > 0 else prev.sigma
    return HmmParams(pi=pi, a=a, sigma=max(sigma, floors[0]), phi=max(phi, floors[1]))


def em_fit(chains, init: HmmParams, tol: float = 1e-6, max_iter: int = 100, n_workers: int = 1) -> FitReport:
    """Fit one tied model to a collection of equal-length chains by EM.

    Every iteration runs the scaled forward-backward pass over all chains
    (E) and applies the closed-form updates (M): pi from the mean first-step
    posterior, transitions from the xi/gamma ratios over t = 1..T-1, phi
    from the edge-weighted mean magnitude and sigma as the square root of
    the no-edge-weighted mean square. sigma and phi are projected onto
    data-derived floors after each M-step. Iteration stops once the
    relative improvement of the total log-likelihood drops below ``tol`` or
    after ``max_iter`` iterations. If the fit ends with phi < sigma the two
    state labels are swapped so that "edge" owns the larger scale.
    """
    chains = np.asarray(chains, dtype=np.float64)
    if chains.ndim != 2 or chains.shape[0] == 0 or chains.shape[1] == 0:
        raise ValueError(
            f"chains must be a non-empty (n_chains, T) array, got shape {chains.shape}"
        )
    _check_params(init)
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    n_chains, t_len = chains.shape
    absw = np.abs(chains)
    sq = chains * chains
    floors = scale_floors(absw)
    params = HmmParams(
        pi=init.pi.copy(),
        a=init.a.copy(),
        sigma=max(init.sigma, floors[0]),
        phi=max(init.phi, floors[1]),
    )

    executor = ThreadPoolExecutor(max_workers=n_workers) if n_workers > 1 else None
    trace: list[float] = []
    converged = False
    try:
        for _ in range(max_iter):
            stats = _e_step(chains, absw, sq, params, executor)
            trace.append(float(stats[12]))
            params = _m_step(stats, params, floors, n_chains, t_len)
            if len(trace) >= 2 and abs(trace[-1] - trace[-2]) <= tol * abs(trace[-2]):
                converged = True
                break
    finally:
        if executor is not None:
            executor.shutdown()

    if params.phi < params.sigma:
        params = _swap_states(params)
    return FitReport(params=params, loglik_trace=trace, iterations=len(trace), converged=converged)


# ---------------------------------------------------------------------------
# fit report serialization (plain-text key-value, full precision)


def fit_report_to_text(report: FitReport) -> str:
    p = report.params
    pi = [float(v) for v in p.pi]
    a = [float(v) for v in p.a.ravel()]
    lines = [
        f"sigma = {float(p.sigma)!r}",
        f"phi = {float(p.phi)!r}",
        f"pi = {pi[0]!r} {pi[1]!r}",
        f"a = {a[0]!r} {a[1]!r} {a[2]!r} {a[3]!r}",
        f"iterations = {report.iterations}",
        f"converged = {'true' if report.converged else 'false'}",
        "loglik_trace = " + " ".join(repr(float(v)) for v in report.loglik_trace),
    ]
    return "\n".join(lines) + "\n"


def fit_report_from_text(text: str) -> FitReport:
    fields = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    try:
        a = [float(v) for v in fields["a"].split()]
        params = HmmParams(
            pi=[float(v) for v in fields["pi"].split()],
            a=[a[0:2], a[2:4]],
            sigma=float(fields["sigma"]),
            phi=float(fields["phi"]),
        )
        trace = [float(v) for v in fields["loglik_trace"].split()] if fields["loglik_trace"] else []
        return FitReport(
            params=params,
            loglik_trace=trace,
            iterations=int(fields["iterations"]),
            converged=fields["converged"] == "true",
        )
    except (KeyError, IndexError, ValueError) as exc:
        raise ValueError(f"malformed fit report: {exc}") from exc
