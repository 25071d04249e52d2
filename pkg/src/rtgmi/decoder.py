"""Nearest-neighbor decoding with a predicted-fading reference.

The decoder scores a candidate codeword by the average squared distance
between the received block and sqrt(rho) * h_hat * theta[candidate], i.e. it
treats the channel as memoryless Rayleigh fading with Gaussian noise whether
or not that is true.  Because PSK symbols have unit modulus, the quadratic
term of the distance is candidate-independent, so the block score reduces to
a correlation; decode() exploits that identity, metric() keeps the direct
form, and the two are tested against each other.
"""

import math
from dataclasses import dataclass

import numpy as np

from .psk import Codebook, PscBlock, PskConstellation
from .utils import binomial_halfwidth, compensated_mean, complex_normal

FULL_METRICS_LIMIT = 1 << 16
_ROW_CHUNK = 1024


@dataclass
class DecodeOutcome:
    chosen_message: int
    metrics: np.ndarray          # all candidates, or just [winner, runner-up]
    correct: bool                # None when the sent message is unknown
    chosen_metric: float
    runner_up_metric: float


@dataclass(frozen=True)
class UndercutEstimate:
    probability: float
    ci_halfwidth: float
    n_trials: int


def metric(constellation: PskConstellation, codeword: np.ndarray,
           block: PscBlock) -> float:
    """Average squared residual of the block against one candidate codeword.

    Summed with fsum (correctly rounded), so reordering the block's time
    samples cannot change the value by even one ulp.
    """
    codeword = np.asarray(codeword)
    if len(codeword) != block.block_length:
        raise ValueError("codeword length must match the block")
    ref = np.sqrt(block.rho) * block.h_hat * constellation.points[codeword]
    sq = np.abs(block.x - ref) ** 2
    return math.fsum(sq.tolist()) / len(sq)


def _candidate_scores(picked: np.ndarray) -> np.ndarray:
    return np.asarray(compensated_mean(picked, axis=-1))


def decode(codebook: Codebook, block: PscBlock, sent_message=None) -> DecodeOutcome:
    """Exhaustive minimum-metric decoding with lowest-index tie-breaking.

    All candidate metrics are reported up to FULL_METRICS_LIMIT codewords;
    past that only the winner and runner-up values are kept.
    """
    if codebook.block_length != block.block_length:
        raise ValueError("codebook block length must match the block")
    const = codebook.constellation
    n = block.block_length
    m_total = codebook.size
    # |x - sqrt(rho) h theta|^2 = |x|^2 + rho |h|^2 - 2 Re{conj(x) sqrt(rho) h theta}
    base = float(compensated_mean(np.abs(block.x) ** 2)) \
        + block.rho * float(compensated_mean(np.abs(block.h_hat) ** 2))
    u = np.sqrt(block.rho) * np.conj(block.x) * block.h_hat
    corr = np.real(u[:, None] * const.points[None, :])   # (n, J)

    keep_all = m_total <= FULL_METRICS_LIMIT
    all_metrics = np.empty(m_total) if keep_all else None
    best_idx = -1
    best = math.inf
    second = math.inf
    rows = np.arange(n)
    for start in range(0, m_total, _ROW_CHUNK):
        chunk = codebook.symbols[start:start + _ROW_CHUNK]
        picked = corr[rows[None, :], chunk]
        d = np.maximum(base - 2.0 * _candidate_scores(picked), 0.0)
        if keep_all:
            all_metrics[start:start + len(d)] = d
        j = int(np.argmin(d))
        if d[j] < best:
            rest = np.delete(d, j)
            second = min(best, float(rest.min()) if len(rest) else math.inf)
            best = float(d[j])
            best_idx = start + j
        else:
            second = min(second, float(d[j]))
    metrics = all_metrics if keep_all else np.array([best, second])
    correct = None if sent_message is None else bool(best_idx == int(sent_message))
    return DecodeOutcome(chosen_message=best_idx, metrics=metrics, correct=correct,
                         chosen_metric=best, runner_up_metric=second)


def pairwise_undercut_probability(constellation: PskConstellation, rho: float,
                                  block_length: int, n_trials: int,
                                  seed: int) -> UndercutEstimate:
    """P{score of an independent random codeword <= score of the sent one}.

    One memoryless channel realization is drawn from the seed and held fixed;
    the Monte Carlo runs over fresh random wrong codewords, matching the
    codebook-ensemble view in which the channel output is conditioned on.
    Exact score ties (probability zero except in degenerate settings such as
    rho = 0) count one half.
    """
    if rho < 0.0 or block_length < 1 or n_trials < 1:
        raise ValueError("need rho >= 0, positive block length and trial count")
    rng = np.random.default_rng(int(seed))
    s = rng.integers(0, constellation.order, size=block_length)
    h_hat = complex_normal(rng, block_length)
    residual = complex_normal(rng, block_length)
    x = np.sqrt(rho) * h_hat * constellation.points[s] + residual

    u = np.sqrt(rho) * np.conj(x) * h_hat
    corr = np.real(u[:, None] * constellation.points[None, :])
    rows = np.arange(block_length)
    sent_score = float(_candidate_scores(corr[rows, s][None, :])[0])

    hits = 0.0
    left = n_trials
    while left > 0:
        m = min(left, 4096)
        cand = rng.integers(0, constellation.order, size=(m, block_length))
        scores = _candidate_scores(corr[rows[None, :], cand])
        # larger correlation score means smaller distance metric
        hits += np.count_nonzero(scores > sent_score)
        hits += 0.5 * np.count_nonzero(scores == sent_score)
        left -= m
    p_hat = hits / n_trials
    return UndercutEstimate(probability=float(p_hat),
                            ci_halfwidth=binomial_halfwidth(p_hat, n_trials),
                            n_trials=int(n_trials))
