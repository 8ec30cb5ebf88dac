"""Hermite processes by discretized multiple Wiener-Ito integrals.

Z^{H,m} is defined by an m-fold Wiener integral, over the off-diagonal
region, of the time-integrated product kernel

    F_t(xi) = int_0^t prod_j (s - xi_j)_+^{(H-1)/m - 1/2} ds,

scaled by K(H,m)/m! with K from the unit-variance normalization
(m = 1 recovers the Mandelbrot-Van Ness fBM, m = 2 the Rosenblatt
process).  The white noise lives on a uniform grid of cells; the kernel
enters through exact per-cell averages, and the off-diagonal sums reduce
to power sums of the per-time projections u_s = sum_i a_s[i] W_i, which
keeps the cost at O(n_s * n_xi) for every m <= 3.

The same noise grid carries the Wiener representation of the fast fOU,
y^eps_t = eps^{-1/2} int ghat((t-s)/eps) dW_s (Taqqu's moving-average
framework), which is what makes L2 (not merely weak) convergence of the
scaled functionals toward the Hermite limits directly measurable on
coupled samples.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import chaos, fgn, fou
from .paths import SamplePath, TimeGrid, as_hurst

__all__ = [
    "HermiteSpec",
    "SharedNoise",
    "sample_shared_noise",
    "hermite_kernel",
    "sample_hermite",
    "hermite_values",
    "hermite_ensemble",
    "ghat",
    "fou_kernel_h_eps",
    "sample_fou_from_kernel",
    "fou_values_from_kernel",
    "fbm_values_from_noise",
    "kernel_l2_distance",
    "truncation_bias_estimate",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)
_GL_Z = 0.5 * (_GL_NODES + 1.0)
_GL_W = 0.5 * _GL_WEIGHTS
_GHAT_ASYMPTOTIC_V = 40.0
_GHAT_SERIES_TERMS = 5
_EVAL_CHUNK = 200_000


@dataclass(frozen=True)
class HermiteSpec:
    """Target Hermite process: exponent H in (1/2,1), order m in {1,2,3}."""

    H: float
    m: int
    xi_window: float
    n_xi: int

    def __post_init__(self):
        if not 0.5 < self.H < 1.0:
            raise ValueError("Hermite process exponent H must lie in (1/2, 1)")
        if self.m < 1:
            raise ValueError("order m must be >= 1")
        if self.m > chaos.MAX_HERMITE_ORDER:
            raise ValueError(
                f"order not supported: m={self.m} exceeds cap {chaos.MAX_HERMITE_ORDER}"
            )
        if self.xi_window <= 0:
            raise ValueError("xi_window must be positive")
        if self.n_xi < 2:
            raise ValueError("n_xi must be at least 2")

    @property
    def kernel_exponent(self) -> float:
        """(H-1)/m - 1/2, the power on each factor (s - xi)_+."""
        return (self.H - 1.0) / self.m - 0.5


@dataclass
class SharedNoise:
    """White-noise increments on a uniform xi grid covering [-xi_window, T].

    increments[i] ~ N(0, dxi) independent, attached to cell
    [edges[i], edges[i+1]).  seed_lineage records how the noise was drawn
    so coupled experiments can be reproduced.
    """

    edges: np.ndarray = field(repr=False)
    increments: np.ndarray = field(repr=False)
    seed_lineage: tuple = ()

    def __post_init__(self):
        if len(self.increments) != len(self.edges) - 1:
            raise ValueError("need one increment per grid cell")

    @property
    def dxi(self) -> float:
        return float(self.edges[1] - self.edges[0])

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])


def sample_shared_noise(
    xi_window: float, horizon: float, n_xi: int, rng: np.random.Generator,
    seed_lineage: tuple = (),
) -> SharedNoise:
    edges = np.linspace(-xi_window, horizon, n_xi + 1)
    dxi = edges[1] - edges[0]
    incs = rng.standard_normal(n_xi) * np.sqrt(dxi)
    return SharedNoise(edges, incs, seed_lineage)


def hermite_kernel(s: float, xi, H: float, m: int) -> float:
    """prod_j (s - xi_j)_+^{(H-1)/m - 1/2}; zero once any xi_j >= s."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.shape[-1] != m:
        raise ValueError(f"expected {m} coordinates, got {xi.shape[-1]}")
    b = (H - 1.0) / m - 0.5
    d = s - xi
    if np.any(d <= 0.0):
        return 0.0
    return float(np.prod(d**b))


def _cell_averaged_kernel(s: np.ndarray, edges: np.ndarray, b: float) -> np.ndarray:
    """Exact cell averages of (s - xi)_+^b, shape (len(s), n_cells).

    Integrating the power analytically per cell keeps the integrable
    singularity at xi -> s- from polluting the quadrature.
    """
    lo = edges[:-1]
    hi = edges[1:]
    dxi = hi - lo
    p = b + 1.0
    top = np.clip(s[:, None] - lo[None, :], 0.0, None) ** p
    bot = np.clip(s[:, None] - hi[None, :], 0.0, None) ** p
    return (top - bot) / (p * dxi[None, :])


def _offdiag_series(A_hat: np.ndarray, m: int, N: np.ndarray) -> np.ndarray:
    """Off-diagonal m-fold sums per time step.

    A_hat[s, i] is the cell-averaged kernel times sqrt(dxi); N holds unit
    normals, shape (..., n_xi).  Row s of the result is the strictly
    off-diagonal contraction sum_{i1 != ... != im} prod A_hat[s, i_j] N_{i_j},
    reduced to power sums of u = A_hat N (elementary symmetric identities),
    which is the discrete multiple Wiener-Ito integral of the rank-one
    kernel at time s.
    """
    u = N @ A_hat.T
    if m == 1:
        return u
    q = (N * N) @ (A_hat * A_hat).T
    if m == 2:
        return u * u - q
    r = (N**3) @ (A_hat**3).T
    return u**3 - 3.0 * q * u + 2.0 * r


def _prefix_diag(P: np.ndarray) -> np.ndarray:
    """D[k] = sum_{s < k, s' < k} P[s, s'] for k = 0..n (symmetric P)."""
    n = P.shape[0]
    D = np.empty(n + 1)
    D[0] = 0.0
    for k in range(n):
        D[k + 1] = D[k] + 2.0 * P[k, :k].sum() + P[k, k]
    return D


def _exact_variances(A_hat: np.ndarray, m: int, ds: float) -> np.ndarray:
    """Exact Var of the cumulative off-diagonal series at every grid point.

    Uses Gram-matrix identities in the (small) time dimension, e.g. for
    m = 2: Var = 2*(sum_{s,s'} ds^2 Gamma^2 - sum_i c[i]^2) with
    Gamma = A_hat A_hat^T and c the running column sums of ds*A_hat^2.
    """
    n_s = A_hat.shape[0]
    G = A_hat @ A_hat.T
    if m == 1:
        return _prefix_diag(ds * ds * G)
    A2 = A_hat * A_hat
    if m == 2:
        full = _prefix_diag(ds * ds * G * G)
        c = np.zeros(A_hat.shape[1])
        diag = np.empty(n_s + 1)
        diag[0] = 0.0
        for k in range(n_s):
            row = A2[k]
            diag[k + 1] = diag[k] + 2.0 * ds * (c @ row) + ds * ds * (row @ row)
            c += ds * row
        return 2.0 * (full - diag)
    # m = 3: subtract the two coincidence patterns (i=j!=k and i=j=k)
    Q = A2 @ A2.T
    full = _prefix_diag(ds * ds * G**3)
    pair = _prefix_diag(ds * ds * Q * G)
    A3 = A2 * A_hat
    d = np.zeros(A_hat.shape[1])
    triple = np.empty(n_s + 1)
    triple[0] = 0.0
    for k in range(n_s):
        row = A3[k]
        triple[k + 1] = triple[k] + 2.0 * ds * (d @ row) + ds * ds * (row @ row)
        d += ds * row
    return 6.0 * (full - 3.0 * pair + 2.0 * triple)


_norm_cache: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}


def _sampler_arrays(grid: TimeGrid, spec: HermiteSpec):
    """Kernel matrix and per-time normalization for a (grid, spec) pair.

    Returns (A_hat, scale) where scale[k] maps the cumulative raw series
    at grid point k to the unit-variance-at-1 Hermite process: the law of
    the multiple integral is matched exactly at second order,
    Var(Z_t) = t^{2H}, absorbing the cell-projection and window losses
    that plain K/m! scaling would leave (those vanish only at impractical
    resolutions for m >= 2).
    """
    key = (spec.H, spec.m, spec.xi_window, spec.n_xi, grid.horizon, grid.n_steps)
    if key in _norm_cache:
        return _norm_cache[key]
    edges = np.linspace(-spec.xi_window, grid.horizon, spec.n_xi + 1)
    dxi = edges[1] - edges[0]
    s_mid = grid.times()[:-1] + 0.5 * grid.dt
    A_hat = _cell_averaged_kernel(s_mid, edges, spec.kernel_exponent) * np.sqrt(dxi)
    V = _exact_variances(A_hat, spec.m, grid.dt)
    t = grid.times()
    scale = np.zeros(grid.n_steps + 1)
    scale[1:] = t[1:] ** spec.H / np.sqrt(V[1:])
    _norm_cache[key] = (A_hat, scale)
    return A_hat, scale


def hermite_values(grid: TimeGrid, spec: HermiteSpec, noise: SharedNoise) -> np.ndarray:
    """Values of Z^{H,m} on the grid for one noise realization."""
    if noise.edges[0] > -spec.xi_window + 1e-12 or noise.edges[-1] < grid.horizon - 1e-12:
        raise ValueError("noise grid does not cover [-xi_window, horizon]")
    if len(noise.increments) != spec.n_xi:
        raise ValueError("noise resolution does not match spec.n_xi")
    bias = truncation_bias_estimate(spec, grid.horizon)
    if bias > 0.25:
        warnings.warn(
            f"xi_window={spec.xi_window} truncates an estimated {bias:.1%} of the "
            "raw kernel mass; the variance is renormalized exactly but the "
            "correlation shape may be distorted",
            stacklevel=2,
        )
    A_hat, scale = _sampler_arrays(grid, spec)
    N = noise.increments / np.sqrt(noise.dxi)
    series = _offdiag_series(A_hat, spec.m, N)
    return np.concatenate([[0.0], np.cumsum(series * grid.dt)]) * scale


def sample_hermite(grid: TimeGrid, spec: HermiteSpec, noise: SharedNoise) -> SamplePath:
    return SamplePath(grid, hermite_values(grid, spec, noise))


def hermite_ensemble(
    grid: TimeGrid,
    spec: HermiteSpec,
    master_seed: int,
    n_replicas: int,
    name: str = "hermite",
    report_idx=None,
    replica_offset: int = 0,
) -> np.ndarray:
    """Replica matrix of Z^{H,m} values (kernel matrices built once).

    Row i is driven by the noise of stream (master_seed, name,
    replica_offset + i); report_idx selects grid indices (default: the
    endpoint only).
    """
    from .streams import stream

    if report_idx is None:
        report_idx = np.array([grid.n_steps])
    report_idx = np.asarray(report_idx, dtype=int)
    A_hat, scale = _sampler_arrays(grid, spec)
    N = np.stack([
        stream(master_seed, name, replica_offset + i).standard_normal(spec.n_xi)
        for i in range(n_replicas)
    ])
    series = _offdiag_series(A_hat, spec.m, N)
    cum = np.concatenate(
        [np.zeros((n_replicas, 1)), np.cumsum(series * grid.dt, axis=1)], axis=1
    )
    return cum[:, report_idx] * scale[report_idx]


def truncation_bias_estimate(spec: HermiteSpec, horizon: float) -> float:
    """Estimated relative variance loss from truncating xi at -xi_window.

    Union bound: m times the one-coordinate tail share of the kernel's
    L2 norm (the tail decays like |xi|^{2b}, b the kernel exponent).
    """
    b = spec.kernel_exponent
    L = spec.xi_window
    T = horizon

    def marginal(xi):
        return (((T - xi) ** (b + 1.0) - (-xi) ** (b + 1.0)) / (b + 1.0)) ** 2

    tail, _ = integrate.quad(marginal, -np.inf, -L, limit=200)
    full = _kernel_marginal_norm_sq(b, T)
    return float(min(1.0, spec.m * tail / full))


def _kernel_marginal_norm_sq(b: float, T: float) -> float:
    # ||int_0^T (s-xi)_+^b ds||^2_{L2(dxi)} = J(b) * T^{2b+3} * 2/((2b+2)(2b+3))
    J = chaos._kernel_pair_integral(b)
    e = 2.0 * b + 1.0
    return J * T ** (e + 2.0) * 2.0 * (1.0 / (e + 1.0) - 1.0 / (e + 2.0))


# ----------------------------------------------------------------- fOU kernel


def _ghat_shape(v: np.ndarray, H: float) -> np.ndarray:
    """I(v) = e^{-v} int_0^v e^u u^{H-3/2} du, stable for all v >= 0.

    Small v: I(v) = v^{H-1/2}/(H-1/2) * int_0^1 exp(-v(1-z^{1/(H-1/2)})) dz
    (Gauss-Legendre; the exponent is <= 0 so there is no cancellation).
    Large v: asymptotic series I(v) = v^{H-3/2}(1 + sum_k prod_j (3/2-H+j)/v^k).
    """
    q = H - 0.5
    out = np.zeros_like(v)
    small = (v > 0.0) & (v < _GHAT_ASYMPTOTIC_V)
    large = v >= _GHAT_ASYMPTOTIC_V
    if np.any(small):
        vs = v[small]
        zpow = _GL_Z ** (1.0 / q)
        expo = np.exp(-vs[:, None] * (1.0 - zpow[None, :]))
        out[small] = vs**q / q * (expo @ _GL_W)
    if np.any(large):
        vl = v[large]
        acc = np.ones_like(vl)
        term = np.ones_like(vl)
        for k in range(1, _GHAT_SERIES_TERMS + 1):
            term = term * (1.5 - H + (k - 1)) / vl
            acc = acc + term
        out[large] = vl ** (H - 1.5) * acc
    return out


def ghat(v, H) -> np.ndarray | float:
    """Moving-average kernel of the unit-rate stationary fOU.

    ghat(v) = sigma (H-1/2)/c1(H) * e^{-v} int_0^v e^u u^{H-3/2} du for
    v > 0, zero otherwise; ghat(v) ~ C(H) v^{H-3/2} at infinity and
    int_0^inf ghat^2 = 1 (unit stationary variance via the Wiener
    isometry).  Requires H > 1/2.
    """
    h = as_hurst(H)
    amp = fou.kernel_amplitude(h)  # raises for H <= 1/2
    v_arr = np.asarray(v, dtype=float)
    flat = np.clip(v_arr.ravel(), 0.0, None)
    out = np.empty_like(flat)
    for a in range(0, len(flat), _EVAL_CHUNK):
        blk = flat[a : a + _EVAL_CHUNK]
        out[a : a + _EVAL_CHUNK] = _ghat_shape(blk, h)
    out = amp * out.reshape(v_arr.shape)
    return float(out) if out.ndim == 0 else out


def fou_kernel_h_eps(t, s, eps: float, H) -> np.ndarray | float:
    """Wiener kernel h_eps(t, s) of the rescaled stationary fOU.

    y^eps_t = int_R h_eps(t, s) dW_s with
    h_eps(t, s) = eps^{-1/2} ghat((t - s)/eps); zero for s >= t.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    return ghat((t - s) / eps, H) / np.sqrt(eps)


def fou_values_from_kernel(
    times: np.ndarray, eps: float, H, noise: SharedNoise
) -> np.ndarray:
    """y^eps at the given times as a discrete convolution of the noise."""
    h = as_hurst(H)
    lags = (times[:, None] - noise.midpoints[None, :]) / eps
    M = ghat(lags, h) / np.sqrt(eps)
    return M @ noise.increments


def sample_fou_from_kernel(grid: TimeGrid, eps: float, H, noise: SharedNoise) -> SamplePath:
    """Stationary fOU path built from shared white noise.

    Coupled to sample_hermite through the same SharedNoise; requires the
    noise resolution to resolve the fast scale (dxi <= eps/10).
    """
    if noise.dxi > eps / fou.MIN_STEPS_PER_EPS * (1 + 1e-12):
        raise ValueError(
            f"under-resolved fast scale: noise dxi={noise.dxi:.3g} > eps/10"
        )
    return SamplePath(grid, fou_values_from_kernel(grid.times(), eps, H, noise))


def fbm_values_from_noise(times: np.ndarray, H, noise: SharedNoise) -> np.ndarray:
    """Mandelbrot-Van Ness fBM on the same noise (exact cell averages)."""
    h = as_hurst(H)
    a = h - 0.5
    edges = noise.edges
    dxi = noise.dxi

    def avg(t):
        top = np.clip(t - edges[:-1], 0.0, None) ** (a + 1.0)
        bot = np.clip(t - edges[1:], 0.0, None) ** (a + 1.0)
        return (top - bot) / ((a + 1.0) * dxi)

    base = avg(0.0)
    c1 = fgn.mvn_normalizer(h)
    rows = np.stack([avg(float(t)) - base for t in times])
    return rows @ noise.increments / c1


def kernel_l2_distance(
    eps: float,
    H,
    m: int,
    t: float = 1.0,
    xi_lo: float = -30.0,
    n_xi: int = 2000,
    n_s: int = 200,
) -> float:
    """Discretized L2(R^m) distance between the scaled fOU kernel and its limit.

    Compares eps^{H*(m)-1} int_0^t prod_i h_eps(s, u_i) ds against
    C(H)^m int_0^t prod_i (s - u_i)_+^{H-3/2} ds on a uniform u lattice.
    The distance must decrease as eps -> 0 (kernel L2 convergence).
    """
    h = as_hurst(H)
    if m not in (1, 2):
        raise ValueError("kernel distance check supports m in {1, 2}")
    hs = chaos.h_star(m, h)
    s_grid = (np.arange(n_s) + 0.5) * (t / n_s)
    ds = t / n_s
    edges = np.linspace(xi_lo, t, n_xi + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    dxi = edges[1] - edges[0]
    Heps = ghat((s_grid[:, None] - mids[None, :]) / eps, h) / np.sqrt(eps)
    P = _cell_averaged_kernel(s_grid, edges, h - 1.5)
    C = fou.kernel_amplitude(h)
    if m == 1:
        diff = eps ** (hs - 1.0) * (Heps.T @ np.full(n_s, ds)) - C * (
            P.T @ np.full(n_s, ds)
        )
        return float(np.sqrt(np.sum(diff**2) * dxi))
    Aeps = eps ** (hs - 1.0) * (Heps.T * ds) @ Heps
    A0 = C**2 * (P.T * ds) @ P
    return float(np.sqrt(np.sum((Aeps - A0) ** 2) * dxi * dxi))
