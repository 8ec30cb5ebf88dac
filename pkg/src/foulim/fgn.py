"""Exact sampling of fractional Gaussian noise and fractional Brownian motion.

The default sampler is circulant embedding (Davies & Harte 1987, in the
form given by Dieker 2004): exact in law and O(n log n).  If the
embedding produces genuinely negative eigenvalues the sampler falls back
to a dense Cholesky factor of the Toeplitz covariance, capped at
n <= 4096.  Exactness matters here because everything downstream reads
rates off exponents.

The fBM is normalised so that B_0 = 0 and Var(B_1) = 1, with covariance
0.5*(t^{2H} + s^{2H} - |t-s|^{2H}).
"""

from __future__ import annotations

import numpy as np
from scipy import integrate, linalg

from .paths import SamplePath, TimeGrid, as_hurst

__all__ = [
    "SamplerInfeasibleError",
    "fbm_covariance",
    "fgn_autocovariance",
    "sample_fgn",
    "sample_fgn_batch",
    "sample_fbm",
    "mvn_normalizer",
]

DENSE_FALLBACK_MAX_N = 4096
# eigenvalues more negative than this (relative to the max) mean the
# embedding genuinely failed rather than accumulated rounding noise
NEGATIVE_EIG_TOL = 1e-10


class SamplerInfeasibleError(RuntimeError):
    """Circulant embedding failed and n is too large for the dense fallback."""


def fbm_covariance(t, s, H) -> np.ndarray | float:
    """Covariance E(B_t B_s) = 0.5*(t^{2H} + s^{2H} - |t-s|^{2H}).

    Accepts scalars or arrays (broadcast).  Times must be non-negative.
    """
    h = as_hurst(H)
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(t < 0) or np.any(s < 0):
        raise ValueError("fBM covariance is defined for non-negative times")
    out = 0.5 * (t ** (2 * h) + s ** (2 * h) - np.abs(t - s) ** (2 * h))
    return out if out.ndim else float(out)


def fgn_autocovariance(lags, H, dt: float = 1.0) -> np.ndarray:
    """gamma(k) = 0.5*(|k+1|^{2H} + |k-1|^{2H} - 2|k|^{2H}) * dt^{2H}."""
    h = as_hurst(H)
    k = np.abs(np.asarray(lags, dtype=float))
    g = 0.5 * ((k + 1) ** (2 * h) + np.abs(k - 1) ** (2 * h) - 2 * k ** (2 * h))
    return g * dt ** (2 * h)


_eig_cache: dict[tuple[float, int], np.ndarray] = {}
_chol_cache: dict[tuple[float, int], np.ndarray] = {}


def _embedding_eigenvalues(H: float, n: int) -> np.ndarray | None:
    """FFT eigenvalues of the circulant embedding, or None if infeasible."""
    key = (H, n)
    if key in _eig_cache:
        return _eig_cache[key]
    g = fgn_autocovariance(np.arange(n + 1), H)
    circ = np.concatenate([g, g[-2:0:-1]])  # length 2n, symmetric
    lam = np.fft.fft(circ).real
    neg = lam.min()
    if neg < -NEGATIVE_EIG_TOL * lam.max():
        return None
    lam = np.clip(lam, 0.0, None)
    _eig_cache[key] = lam
    return lam


def _dense_factor(H: float, n: int) -> np.ndarray:
    key = (H, n)
    if key not in _chol_cache:
        if n > DENSE_FALLBACK_MAX_N:
            raise SamplerInfeasibleError(
                f"circulant embedding failed for H={H}, n={n} and n exceeds "
                f"the dense fallback cap {DENSE_FALLBACK_MAX_N}"
            )
        gamma = fgn_autocovariance(np.arange(n), H)
        _chol_cache[key] = linalg.cholesky(linalg.toeplitz(gamma), lower=True)
    return _chol_cache[key]


def sample_fgn_batch(n: int, dt: float, H, rngs) -> np.ndarray:
    """Sample one fGN vector of length n per generator in ``rngs``.

    Returns an array of shape (len(rngs), n) with the exact joint law of
    fBM increments on spacing dt.  Each row consumes exactly 2n standard
    normals from its own stream, so results are independent of batching.
    """
    h = as_hurst(H)
    if n < 1:
        raise ValueError("need n >= 1 increments")
    if dt <= 0:
        raise ValueError("dt must be positive")
    rngs = list(rngs)
    raw = np.stack([rng.standard_normal(2 * n) for rng in rngs])
    lam = _embedding_eigenvalues(h, n)
    if lam is None:
        L = _dense_factor(h, n)
        return raw[:, :n] @ L.T * dt**h

    m = 2 * n
    W = np.empty((len(rngs), m), dtype=complex)
    W[:, 0] = np.sqrt(lam[0] / m) * raw[:, 0]
    W[:, n] = np.sqrt(lam[n] / m) * raw[:, 1]
    half = np.sqrt(lam[1:n] / (2 * m))
    W[:, 1:n] = half * (raw[:, 2 : n + 1] + 1j * raw[:, n + 1 : 2 * n])
    W[:, n + 1 :] = np.conj(W[:, n - 1 : 0 : -1])
    return np.fft.fft(W, axis=1).real[:, :n] * dt**h


def sample_fgn(n: int, dt: float, H, rng: np.random.Generator) -> np.ndarray:
    """n increments of fBM on spacing dt, exact in law."""
    return sample_fgn_batch(n, dt, H, [rng])[0]


def sample_fbm(grid: TimeGrid, H, rng: np.random.Generator) -> SamplePath:
    """Fractional Brownian motion on the grid, started at 0."""
    incs = sample_fgn(grid.n_steps, grid.dt, H, rng)
    values = np.concatenate([[0.0], np.cumsum(incs)])
    return SamplePath(grid, values)


def mvn_normalizer(H) -> float:
    """Moving-average normalizer c1(H) for the two-sided representation.

    c1(H)^2 = int_{-inf}^0 ((1-s)^{H-1/2} - (-s)^{H-1/2})^2 ds + 1/(2H),
    the L2 norm of the Mandelbrot-Van Ness kernel at t = 1, so that
    B_t = (1/c1) int ((t-s)_+^{H-1/2} - (-s)_+^{H-1/2}) dW_s has unit
    variance at t = 1.
    """
    h = as_hurst(H)
    a = h - 0.5

    def body(x):
        return ((1.0 + x) ** a - x**a) ** 2

    tail, _ = integrate.quad(body, 0.0, np.inf, limit=400)
    return float(np.sqrt(tail + 1.0 / (2.0 * h)))
