"""Weighted sum-rate objectives and the sandwich bound between them.

Two quantities compete: the expected weighted sum rate (expectation
outside the log-det) and its large-array surrogate (expectation moved
inside). Their per-user difference is a Gamma gap from `gap`, bounded
by its infinite-SNR limit, which yields computable lower/upper bounds
on the true expected rate from the surrogate alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .channel import (
    IbcScenario,
    PrecoderSet,
    StackedUserView,
    check_precoders,
    expected_gram,
    sample_stacked_batch,
    stack_user,
)
from .errors import DimensionMismatch, DomainError, UnsupportedCase
from .gap import (
    EigenSpectrum,
    GapSpec,
    gamma_inf_mimo_iid,
    gamma_inf_miso_corr,
    gamma_rho,
    taylor_gamma2_inf_zero_mean,
)
from .mc import MonteCarloEstimate, vector_stats

# Numerical stand-in for infinite SNR in Monte-Carlo gap estimation;
# the remaining O(1/rho) bias sits far below statistical error.
RHO_HIGH_SNR = 1.0e6

_METHOD_RANK = {"closed-form": 0, "taylor": 1, "monte-carlo-high-snr": 2}


@dataclass
class SandwichBound:
    """Bounds tying the expected rate to its surrogate.

    lower = esei_value - sum_k u_k gamma_k and
    upper = esei_value + sum_k u_k gamma_kbar, where gamma_k bounds the
    signal-term gap and gamma_kbar the interference-term gap of user k.
    method_per_user records how each user's gamma limits were obtained
    (the least exact method used for that user).
    """

    lower: float
    upper: float
    esei_value: float
    per_user_gamma_k: np.ndarray
    per_user_gamma_kbar: np.ndarray
    method_per_user: list

    def __post_init__(self):
        if not (self.lower <= self.esei_value <= self.upper):
            raise DomainError("sandwich bounds must bracket the surrogate value")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def _batch_rate(G: np.ndarray) -> np.ndarray:
    """ln det(I + G) per sample for a PSD batch G of shape (n, N, N)."""
    if G.shape[1] == 1:
        return np.log1p(np.clip(G[:, 0, 0].real, 0.0, None))
    eig = np.clip(np.linalg.eigvalsh(G), 0.0, None)
    return np.log1p(eig).sum(axis=1)


def wsr_realization(scenario: IbcScenario, precoders: PrecoderSet, channels) -> float:
    """Weighted sum rate for one set of sampled stacked channels.

    channels[k] is user k's stacked matrix (rx_antennas_k x total
    width). Always nonnegative for nonnegative weights, since each
    user's bracket is a valid rate.
    """
    check_precoders(scenario, precoders)
    total = 0.0
    for k, u in enumerate(scenario.users):
        view = stack_user(scenario, precoders, k)
        H = np.asarray(channels[k], dtype=complex)
        if H.shape != view.mean.shape:
            raise DimensionMismatch(
                f"channel {k} has shape {H.shape}, expected {view.mean.shape}"
            )
        N = H.shape[0]
        eye = np.eye(N)
        sig = linalg.logdet_hpd(eye + H @ view.Q @ H.conj().T)
        intf = linalg.logdet_hpd(eye + H @ view.Q_kbar @ H.conj().T)
        total += u.rate_weight * (sig - intf)
    return total


def _term_evaluator(views):
    """Per-sample statistic matrix for all users' rate terms.

    Column 0 is the weighted sum rate; columns 1..K are the signal
    terms ln|I + H Q H^H|; columns K+1..2K the interference terms.
    Per-chunk draw order is fixed (user 0 first), so any consumer of
    the same seed sees the same channels.
    """
    K = len(views)

    def evaluate(rng, count):
        out = np.zeros((count, 1 + 2 * K))
        for k, (view, weight) in enumerate(views):
            H = sample_stacked_batch(view, rng, count)
            sig = _batch_rate(H @ view.Q @ np.conj(np.swapaxes(H, 1, 2)))
            intf = _batch_rate(H @ view.Q_kbar @ np.conj(np.swapaxes(H, 1, 2)))
            out[:, 1 + k] = sig
            out[:, 1 + K + k] = intf
            out[:, 0] += weight * (sig - intf)
        return out

    return evaluate


def _stacked_views(scenario, precoders):
    check_precoders(scenario, precoders)
    return [
        (stack_user(scenario, precoders, k), scenario.users[k].rate_weight)
        for k in range(scenario.n_users)
    ]


def _deterministic(scenario) -> bool:
    return all(
        np.trace(link.cov_t).real <= 0.0 for row in scenario.links for link in row
    )


def ewsr_monte_carlo(
    scenario: IbcScenario,
    precoders: PrecoderSet,
    n_samples: int,
    seed: int,
    workers: int = 1,
) -> MonteCarloEstimate:
    """Monte-Carlo estimate of the expected weighted sum rate.

    Deterministic given (seed, n_samples) for any worker count. When
    every link has zero covariance the channel is deterministic and the
    exact value (the realization at the mean) is returned with zero
    standard error.
    """
    if n_samples < 2:
        raise DomainError(f"need at least 2 samples, got {n_samples}")
    if _deterministic(scenario):
        views = _stacked_views(scenario, precoders)
        value = wsr_realization(
            scenario, precoders, [v.mean for v, _ in views]
        )
        return MonteCarloEstimate(value, 0.0, n_samples, seed)
    mean, se, _ = vector_stats(
        n_samples,
        seed,
        _term_evaluator(_stacked_views(scenario, precoders)),
        workers=workers,
    )
    return MonteCarloEstimate(float(mean[0]), float(se[0]), n_samples, seed)


def user_term_estimates(
    scenario: IbcScenario,
    precoders: PrecoderSet,
    n_samples: int,
    seed: int,
    workers: int = 1,
):
    """Per-user Monte-Carlo means of both rate terms, for Jensen checks.

    Returns (wsr_estimate, signal_terms, interference_terms) where the
    term lists hold one MonteCarloEstimate per user, all evaluated on
    the same channel draws as ewsr_monte_carlo with the same seed.
    """
    views = _stacked_views(scenario, precoders)
    K = len(views)
    mean, se, _ = vector_stats(
        n_samples, seed, _term_evaluator(views), workers=workers
    )
    wsr = MonteCarloEstimate(float(mean[0]), float(se[0]), n_samples, seed)
    sig = [
        MonteCarloEstimate(float(mean[1 + k]), float(se[1 + k]), n_samples, seed)
        for k in range(K)
    ]
    intf = [
        MonteCarloEstimate(
            float(mean[1 + K + k]), float(se[1 + K + k]), n_samples, seed
        )
        for k in range(K)
    ]
    return wsr, sig, intf


def esei_terms(scenario: IbcScenario, precoders: PrecoderSet):
    """Per-user (signal, interference) terms with expectations inside.

    ln|I + E H Q H^H| and ln|I + E H Q_kbar H^H| per user, using the
    blockwise expected Gram (mean part plus tr(Q C) identity).
    """
    out = []
    for view, _ in _stacked_views(scenario, precoders):
        dist = view.as_distribution()
        N = view.mean.shape[0]
        eye = np.eye(N)
        sig = linalg.logdet_hpd(eye + expected_gram(dist, view.Q))
        intf = linalg.logdet_hpd(eye + expected_gram(dist, view.Q_kbar))
        out.append((sig, intf))
    return out


def esei_wsr(scenario: IbcScenario, precoders: PrecoderSet) -> float:
    """Surrogate weighted sum rate with expectations moved inside the logs."""
    total = 0.0
    for u, (sig, intf) in zip(scenario.users, esei_terms(scenario, precoders)):
        total += u.rate_weight * (sig - intf)
    return total


def effective_gap_spec(view: StackedUserView, Qm: np.ndarray) -> GapSpec:
    """The (mean, cov) pair whose gap governs one rate term.

    Aggregates the stacked transmit covariance per distinct BS (blocks
    repeating a BS share one physical draw, so per-BS aggregation is
    what makes the perturbation i.i.d.), then absorbs the precoder:
    mean' = mean_BS sqrt(Qagg), cov' = sqrt(Qagg) C_BS sqrt(Qagg).
    The resulting H' satisfies H' H'^H ~ H Q H^H exactly.
    """
    bs_list = sorted(view.bs_sqrt)
    N = view.mean.shape[0]
    widths, means, covs = [], [], []
    for j in bs_list:
        i = view.block_bs.index(j)
        sl = view.block_slices[i]
        means.append(view.mean[:, sl])
        covs.append(view.cov_blocks[i])
        widths.append(sl.stop - sl.start)
    total = sum(widths)
    mean_bs = np.concatenate(means, axis=1) if total else np.zeros((N, 0))
    C_bs = np.zeros((total, total), dtype=complex)
    Qagg = np.zeros((total, total), dtype=complex)
    start = 0
    for j, w, C in zip(bs_list, widths, covs):
        sl_bs = slice(start, start + w)
        C_bs[sl_bs, sl_bs] = C
        block = np.zeros((w, w), dtype=complex)
        for i2, jj in enumerate(view.block_bs):
            if jj == j:
                s2 = view.block_slices[i2]
                block += Qm[s2, s2]
        Qagg[sl_bs, sl_bs] = block
        start += w
    R = linalg.hermitian_sqrt(Qagg)
    return GapSpec(mean=mean_bs @ R, cov=R @ C_bs @ R)


def _gamma_limit(eff: GapSpec, method: str, n_samples: int, seed: int, workers: int):
    """One gap limit for an effective spec, by the requested method.

    Returns (value, tag). "auto" prefers exact closed forms, falls back
    to the second-order limit for zero-mean cases it cannot match, and
    to high-SNR Monte-Carlo only when the mean is nonzero.
    """
    if method not in _METHOD_RANK and method != "auto":
        raise DomainError(
            "gamma_method must be one of auto, closed-form, taylor, monte-carlo-high-snr"
        )
    trc = float(np.trace(eff.cov).real)
    scale = max(1.0, float(np.max(np.abs(eff.mean)) ** 2)) if eff.mean.size else 1.0
    if trc <= 1e-14 * scale:
        return 0.0, "closed-form"
    zero_mean = eff.is_zero_mean()
    N = eff.n_rx

    def closed_form():
        eig = linalg.hermitian_eig(eff.cov).eigenvalues
        lam = eig[eig > 1e-9 * float(eig.max(initial=0.0))]
        if lam.size == 0:
            return None
        if lam.max() / lam.min() - 1.0 <= 1e-9:
            # equal eigenvalues: i.i.d. on the nonzero subspace
            rank = int(lam.size)
            if rank >= N:
                return gamma_inf_mimo_iid(rank, N)
            return None
        if N == 1:
            gaps = np.abs(np.subtract.outer(lam, lam)) / np.maximum.outer(lam, lam)
            np.fill_diagonal(gaps, np.inf)
            if gaps.min() > 1e-6:
                return gamma_inf_miso_corr(EigenSpectrum(lam))
        return None

    if method == "closed-form":
        if not zero_mean:
            raise UnsupportedCase("closed-form gap limits need a zero-mean spec")
        value = closed_form()
        if value is None:
            raise UnsupportedCase(
                "no closed-form gap limit for this spectrum/antenna combination"
            )
        return value, "closed-form"
    if method == "taylor":
        if not zero_mean:
            raise UnsupportedCase("the second-order limit is only derived for zero mean")
        return taylor_gamma2_inf_zero_mean(eff.cov, N), "taylor"
    if method == "monte-carlo-high-snr":
        est = gamma_rho(eff, RHO_HIGH_SNR, n_samples, seed, workers=workers)
        return max(est.value, 0.0), "monte-carlo-high-snr"
    if zero_mean:
        value = closed_form()
        if value is not None:
            return value, "closed-form"
        return taylor_gamma2_inf_zero_mean(eff.cov, N), "taylor"
    est = gamma_rho(eff, RHO_HIGH_SNR, n_samples, seed, workers=workers)
    return max(est.value, 0.0), "monte-carlo-high-snr"


def sandwich_bounds(
    scenario: IbcScenario,
    precoders: PrecoderSet,
    gamma_method: str = "auto",
    *,
    n_samples: int = 100_000,
    seed: int = 0,
    workers: int = 1,
) -> SandwichBound:
    """Lower/upper bounds on the expected weighted sum rate.

    surrogate - sum_k u_k gamma_k <= EWSR <= surrogate + sum_k u_k
    gamma_kbar, with per-user gap limits computed on the effective
    distributions of the signal (Q) and interference (Q_kbar) terms.
    n_samples/seed/workers only matter when a Monte-Carlo gap limit is
    needed (nonzero-mean specs in auto mode, or when requested).
    """
    esei = esei_wsr(scenario, precoders)
    gammas_k, gammas_kbar, methods = [], [], []
    for k, (view, _) in enumerate(_stacked_views(scenario, precoders)):
        g_sig, tag_sig = _gamma_limit(
            effective_gap_spec(view, view.Q),
            gamma_method,
            n_samples,
            seed + 2 * k,
            workers,
        )
        g_int, tag_int = _gamma_limit(
            effective_gap_spec(view, view.Q_kbar),
            gamma_method,
            n_samples,
            seed + 2 * k + 1,
            workers,
        )
        gammas_k.append(g_sig)
        gammas_kbar.append(g_int)
        methods.append(
            tag_sig if _METHOD_RANK[tag_sig] >= _METHOD_RANK[tag_int] else tag_int
        )
    weights = np.array([u.rate_weight for u in scenario.users])
    gk = np.asarray(gammas_k)
    gkbar = np.asarray(gammas_kbar)
    return SandwichBound(
        lower=esei - float(weights @ gk),
        upper=esei + float(weights @ gkbar),
        esei_value=esei,
        per_user_gamma_k=gk,
        per_user_gamma_kbar=gkbar,
        method_per_user=methods,
    )
