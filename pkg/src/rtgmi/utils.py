"""Shared numerical helpers: stream seeding, complex Gaussian draws, careful sums."""

import math

import numpy as np

# 64-bit golden-ratio increment; distinct stream indices give well-spread seeds
SEED_STRIDE = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

# beyond this length, plain accumulation is replaced by compensated chunk sums
COMPENSATED_THRESHOLD = 10_000
_CHUNK = 4096


def derive_seed(master_seed: int, index: int) -> int:
    """Per-stream seed: master_seed XOR (index * golden-ratio stride), mod 2^64."""
    return (int(master_seed) ^ ((int(index) * SEED_STRIDE) & _MASK64)) & _MASK64


def complex_normal(rng: np.random.Generator, n: int) -> np.ndarray:
    """n i.i.d. CN(0, 1) samples.

    Real and imaginary parts are drawn interleaved, so the first n' samples of
    a length-n draw coincide with a length-n' draw from a same-state generator.
    """
    z = rng.standard_normal((n, 2))
    return (z[:, 0] + 1j * z[:, 1]) / math.sqrt(2.0)


def compensated_mean(values: np.ndarray, axis: int = -1) -> np.ndarray:
    """Mean along `axis`, with Neumaier-compensated combination of chunk sums.

    Short axes fall back to np.mean; long accumulations (> 10^4 terms) sum
    fixed-size chunks pairwise and combine the partial sums with a running
    compensation term, keeping rounding error independent of length.
    """
    v = np.asarray(values, dtype=np.float64)
    v = np.moveaxis(v, axis, -1)
    n = v.shape[-1]
    if n == 0:
        raise ValueError("mean of empty axis")
    if n <= COMPENSATED_THRESHOLD:
        return np.mean(v, axis=-1)
    total = np.zeros(v.shape[:-1])
    comp = np.zeros(v.shape[:-1])
    for start in range(0, n, _CHUNK):
        s = v[..., start:start + _CHUNK].sum(axis=-1)
        t = total + s
        big = np.abs(total) >= np.abs(s)
        comp += np.where(big, (total - t) + s, (s - t) + total)
        total = t
    return (total + comp) / n


def golden_section_maximize(fun, lo: float, hi: float, tol: float = 1e-6):
    """Maximize a unimodal function on [lo, hi] to bracket width <= tol.

    Returns (x_best, f(x_best)) at the best evaluated interior point, so the
    reported value is an actual function evaluation, never an interpolation.
    """
    a, b = float(lo), float(hi)
    if not b > a:
        raise ValueError("need lo < hi")
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, fun(x)
    n_steps = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = b - INV_PHI * h
    d = a + INV_PHI * h
    yc = fun(c)
    yd = fun(d)
    for _ in range(n_steps - 1):
        if yc > yd:
            b, d, yd = d, c, yc
            h = INV_PHI * h
            c = b - INV_PHI * h
            yc = fun(c)
        else:
            a, c, yc = c, d, yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = fun(d)
    if yc > yd:
        return c, yc
    return d, yd


def binomial_halfwidth(p_hat: float, n: int, z: float = 1.96) -> float:
    """Normal-approximation half-width for a binomial proportion.

    The variance is floored at that of one pseudo-count so an empty or full
    tally never reports a zero-width interval.
    """
    if n <= 0:
        raise ValueError("need at least one trial")
    floor = (1.0 / n) * (1.0 - 1.0 / n)
    return z * math.sqrt(max(p_hat * (1.0 - p_hat), floor) / n)
