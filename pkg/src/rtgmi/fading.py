"""Stationary unit-variance complex Gaussian (Rayleigh) fading models.

Every model fixes the marginal variance at one, so SNR enters only through
the channel equation and never through the fading law itself.  Sampling uses
numpy's seeded Generator (PCG64); replay is bit-exact for a fixed package
version, which is all the determinism contract asks for.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.signal import lfilter
from scipy.special import j0

from .utils import complex_normal

# exact Cholesky synthesis above this length is too expensive (O(n^3) time,
# O(n^2) memory); longer Clarke paths switch to a ray-sum approximation
CHOLESKY_MAX_N = 4096
DEFAULT_RAY_COUNT = 128
_PSD_JITTER = 1e-10


class FadingModel:
    """Base class: a wide-sense stationary unit-variance complex fading law."""

    variance = 1.0

    def autocorrelation(self, lag: int) -> complex:
        """E{h[k + lag] * conj(h[k])}; conjugate-symmetric in the lag."""
        raise NotImplementedError

    def autocorrelation_at(self, lags) -> np.ndarray:
        return np.array([self.autocorrelation(int(t)) for t in np.asarray(lags).ravel()],
                        dtype=complex)

    def _sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Ar1Fading(FadingModel):
    """First-order Gauss-Markov fading: h[k] = a*h[k-1] + sqrt(1-a^2)*w[k]."""

    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must be in [0, 1), got {self.alpha}")

    def autocorrelation(self, lag: int) -> complex:
        return complex(self.alpha ** abs(int(lag)))

    def _sample(self, n, rng):
        w = complex_normal(rng, n)
        if self.alpha == 0.0:
            return w
        x = math.sqrt(1.0 - self.alpha ** 2) * w
        x[0] = w[0]  # stationary start: h[0] ~ CN(0, 1)
        return lfilter([1.0], [1.0, -self.alpha], x)


@dataclass(frozen=True)
class ClarkeFading(FadingModel):
    """Isotropic-scattering fading with autocorrelation J0(2*pi*fd*lag).

    `normalized_doppler` is the maximum Doppler shift in cycles per symbol.
    Paths up to CHOLESKY_MAX_N samples are synthesized exactly by a Cholesky
    factor of the Toeplitz autocorrelation matrix (tiny diagonal jitter keeps
    the numerically band-limited matrix factorizable); longer paths use a
    seeded equal-power ray sum with `ray_count` rays, whose autocorrelation
    converges to the same Bessel law as the ray count grows.
    """

    normalized_doppler: float
    ray_count: int = DEFAULT_RAY_COUNT

    def __post_init__(self):
        if not 0.0 < self.normalized_doppler <= 0.5:
            raise ValueError(
                f"normalized_doppler must be in (0, 0.5], got {self.normalized_doppler}")
        if self.ray_count < 64:
            raise ValueError("need at least 64 rays")

    def autocorrelation(self, lag: int) -> complex:
        return complex(float(j0(2.0 * math.pi * self.normalized_doppler * abs(int(lag)))))

    def _sample(self, n, rng):
        if n <= CHOLESKY_MAX_N:
            r = np.array([self.autocorrelation(t).real for t in range(n)])
            cov = scipy.linalg.toeplitz(r) + _PSD_JITTER * np.eye(n)
            factor = scipy.linalg.cholesky(cov, lower=True)
            return factor @ complex_normal(rng, n)
        # equal-power rays: arrival angles uniform => Bessel autocorrelation
        angles = rng.uniform(0.0, 2.0 * math.pi, self.ray_count)
        phases = rng.uniform(0.0, 2.0 * math.pi, self.ray_count)
        dopplers = 2.0 * math.pi * self.normalized_doppler * np.cos(angles)
        out = np.zeros(n, dtype=complex)
        k0 = 0
        while k0 < n:  # chunked so the (chunk, rays) phase table stays small
            k = np.arange(k0, min(k0 + 65536, n))
            out[k] = np.exp(1j * (k[:, None] * dopplers[None, :] + phases)).sum(axis=1)
            k0 += 65536
        return out / math.sqrt(self.ray_count)


@dataclass(frozen=True)
class TabulatedFading(FadingModel):
    """Fading law given by tabulated autocorrelation values at integer lags.

    Lags must start at 0 (value exactly 1) and ascend; negative lags follow by
    conjugate symmetry.  Queries beyond the largest tabulated lag are rejected.
    Path synthesis extends the table by zero correlation beyond the maximum
    lag, which makes the covariance banded; the banded extension is not
    guaranteed positive semidefinite for every table, and synthesis raises a
    ValueError when its factorization fails.
    """

    lags: tuple = field()
    values: tuple = field()

    def __post_init__(self):
        lags = tuple(int(t) for t in self.lags)
        values = tuple(complex(v) for v in self.values)
        object.__setattr__(self, "lags", lags)
        object.__setattr__(self, "values", values)
        if len(lags) != len(values) or not lags:
            raise ValueError("need matching non-empty lag and value tables")
        if lags[0] != 0 or any(b <= a for a, b in zip(lags, lags[1:])):
            raise ValueError("lags must ascend from 0")
        if values[0] != 1.0 + 0.0j:
            raise ValueError("autocorrelation at lag 0 must equal 1 exactly")
        if any(abs(v) > 1.0 + 1e-12 for v in values):
            raise ValueError("autocorrelation magnitudes cannot exceed 1")
        # positive-semidefiniteness up to the max tabulated lag, by Cholesky
        span = lags[-1] + 1
        r = np.zeros(span, dtype=complex)
        for t, v in zip(lags, values):
            r[t] = v
        cov = scipy.linalg.toeplitz(r)
        try:
            np.linalg.cholesky(cov + _PSD_JITTER * np.eye(span))
        except np.linalg.LinAlgError:
            raise ValueError("tabulated autocorrelation is not positive semidefinite")
        object.__setattr__(self, "_dense_row", r)

    @classmethod
    def from_csv(cls, path):
        """Load a `lag,re,im` table (header required, lags ascending from 0)."""
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or [c.strip() for c in rows[0]] != ["lag", "re", "im"]:
            raise ValueError("expected header 'lag,re,im'")
        lags, values = [], []
        for row in rows[1:]:
            if not row:
                continue
            lags.append(int(row[0]))
            values.append(float(row[1]) + 1j * float(row[2]))
        return cls(lags=tuple(lags), values=tuple(values))

    def autocorrelation(self, lag: int) -> complex:
        t = int(lag)
        if abs(t) > self.lags[-1]:
            raise ValueError(f"lag {t} beyond tabulated range {self.lags[-1]}")
        v = self._dense_row[abs(t)]
        return complex(v if t >= 0 else np.conj(v))

    def _sample(self, n, rng):
        band = min(self.lags[-1], n - 1)
        # lower banded storage: ab[d, j] = cov[j + d, j] = r(d), zero beyond table
        ab = np.zeros((band + 1, n), dtype=complex)
        for d in range(band + 1):
            ab[d, :] = self._dense_row[d]
        ab[0, :] += _PSD_JITTER
        try:
            fac = scipy.linalg.cholesky_banded(ab, lower=True)
        except np.linalg.LinAlgError as exc:
            raise ValueError(
                "zero-extended tabulated autocorrelation is not positive "
                "semidefinite at this path length") from exc
        w = complex_normal(rng, n)
        out = np.zeros(n, dtype=complex)
        for d in range(band + 1):  # h = L @ w with L lower-banded
            out[d:] += fac[d, :n - d] * w[:n - d]
        return out


@dataclass(frozen=True)
class FadingPath:
    """A generated realization together with its provenance."""

    samples: np.ndarray
    model: FadingModel
    seed: int

    def __len__(self):
        return len(self.samples)


def generate_path(model: FadingModel, n: int, seed: int) -> FadingPath:
    """Draw n consecutive samples of the fading process.

    Parameters
    ----------
    model : FadingModel
        The stationary law to sample from.
    n : int
        Number of samples; must be positive.
    seed : int
        Seed for the path's private generator.  Same (model, n, seed) gives an
        identical path; for recursion-based models a shorter request with the
        same seed is a prefix of a longer one.
    """
    if n < 1:
        raise ValueError("path length must be positive")
    rng = np.random.default_rng(int(seed))
    samples = model._sample(int(n), rng)
    return FadingPath(samples=samples, model=model, seed=int(seed))
