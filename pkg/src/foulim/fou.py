"""Stationary (rescaled) fractional Ornstein-Uhlenbeck process.

The process is the stationary solution of

    dy_t = -(1/eps) y_t dt + (sigma / eps^H) dB^H_t,

with sigma chosen so the stationary law is N(0, 1).  Its autocorrelation
rho decays only algebraically, rho(s) ~ sigma^2 H(2H-1) s^{2H-2} for
H != 1/2 (Cheridito, Kawaguchi & Maejima 2003), which is what drives all
the scaling-regime behaviour downstream.

rho is evaluated from the spectral representation

    rho(s) = (sin(pi H) / pi) * int_R cos(s x) |x|^{1-2H} / (1 + x^2) dx,

valid on both sides of H = 1/2; the double-integral covariance formula
(valid for H > 1/2 only) is kept in the test suite as a cross-check.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special
from scipy.signal import lfilter

from . import fgn
from .paths import SamplePath, TimeGrid, as_hurst
from .streams import stream

__all__ = [
    "FouConfig",
    "QuadratureError",
    "stationary_sigma",
    "kernel_amplitude",
    "rho",
    "rho_asymptote_constant",
    "rho_power_integral",
    "variance_growth",
    "sample_fou",
    "sample_fou_ensemble",
]

# resolve the relaxation time: dt <= eps / MIN_STEPS_PER_EPS
MIN_STEPS_PER_EPS = 10.0


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


def stationary_sigma(H) -> float:
    """Noise amplitude giving the unit-rate fOU stationary variance 1.

    Var(int_{-inf}^t e^{-(t-s)} dB^H_s) = H*Gamma(2H), so
    sigma = 1/sqrt(H*Gamma(2H)).  (H = 1/2 gives the classical sqrt(2).)
    """
    h = as_hurst(H)
    return float(1.0 / np.sqrt(h * special.gamma(2.0 * h)))


def kernel_amplitude(H) -> float:
    """Amplitude C(H) of the moving-average kernel tail.

    The stationary fOU has the Wiener representation
    y_t = eps^{-1/2} int ghat((t-s)/eps) dW_s with
    ghat(v) ~ C(H) v^{H-3/2} as v -> infinity, where
    C(H) = sigma(H) (H - 1/2) / c1(H).  This constant carries through to
    the Hermite-limit normalization, satisfying
    C^2 = sigma^2 H (2H-1) / Beta(H-1/2, 2-2H).
    """
    h = as_hurst(H)
    if h <= 0.5:
        raise ValueError("the moving-average representation requires H > 1/2")
    return stationary_sigma(h) * (h - 0.5) / fgn.mvn_normalizer(h)


def rho_asymptote_constant(H) -> float:
    """Constant D in rho(s) = D s^{2H-2} + O(s^{2H-4}), D = sigma^2 H(2H-1)."""
    h = as_hurst(H)
    return stationary_sigma(h) ** 2 * h * (2.0 * h - 1.0)


def _rho_scalar(s: float, h: float, epsabs: float, epsrel: float) -> float:
    if s == 0.0:
        return 1.0
    q = 2.0 - 2.0 * h

    # substitution x = u^{1/(2-2H)} absorbs the |x|^{1-2H} power exactly
    def near(u):
        return np.cos(s * u ** (1.0 / q)) / (1.0 + u ** (2.0 / q)) / q

    def far(x):
        return x ** (1.0 - 2.0 * h) / (1.0 + x * x)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        i1, e1 = integrate.quad(near, 0.0, 1.0, epsabs=epsabs, epsrel=epsrel, limit=200)
        if s >= 0.25:
            # oscillatory tail: dedicated Fourier-weight algorithm
            i2, e2 = integrate.quad(
                far, 1.0, np.inf, weight="cos", wvar=s, epsabs=epsabs, limit=400
            )
        else:
            # below a quarter of a cycle over the decay scale, plain quad is fine
            i2, e2 = integrate.quad(
                lambda x: np.cos(s * x) * far(x),
                1.0,
                np.inf,
                epsabs=epsabs,
                epsrel=epsrel,
                limit=800,
            )
    val = (2.0 * np.sin(np.pi * h) / np.pi) * (i1 + i2)
    err = (2.0 / np.pi) * (e1 + e2)
    if err > 1e-6 + 1e-4 * abs(val):
        raise QuadratureError(
            f"rho(s={s}, H={h}) quadrature did not converge: achieved error {err:.2e}"
        )
    return val


def rho(s, H, epsabs: float = 1e-10, epsrel: float = 1e-10):
    """Autocorrelation of the stationary unit-rate fOU at lag |s|.

    Evaluated by adaptive quadrature of the spectral cosine integral;
    even in s, rho(0) = 1.  Scalar or array input.
    """
    h = as_hurst(H)
    s_arr = np.abs(np.asarray(s, dtype=float))
    flat = s_arr.ravel()
    out = np.array([_rho_scalar(float(v), h, epsabs, epsrel) for v in flat])
    out = out.reshape(s_arr.shape)
    return float(out) if out.ndim == 0 else out


def _h_star(m: int, h: float) -> float:
    return m * (h - 1.0) + 1.0


@lru_cache(maxsize=None)
def _rho_grid_integral(h: float, m: int, s_max: float) -> float:
    """int_0^{s_max} rho(s)^m ds on a composite grid, trapezoid rule."""
    dense = np.linspace(0.0, 10.0, 2001)
    if s_max > 10.0:
        tail_grid = np.geomspace(10.0, s_max, 600)[1:]
        grid = np.concatenate([dense, tail_grid])
    else:
        grid = dense[dense <= s_max]
        if grid[-1] != s_max:
            grid = np.append(grid, s_max)
    vals = rho(grid, h) ** m
    return float(np.trapezoid(vals, grid))


def rho_power_integral(m: int, H, s_max: float = 1000.0) -> float:
    """int_0^infinity rho(s)^m ds (finite only when H*(m) < 1/2).

    Quadrature on [0, s_max] plus the closed-form power-law tail from the
    asymptote rho(s) ~ D s^{2H-2}.  Raises for H*(m) >= 1/2, where the
    integral diverges (that regime belongs to the non-Gaussian limit).
    """
    h = as_hurst(H)
    if m < 1:
        raise ValueError("chaos order m must be >= 1")
    if h == 0.5:
        return 1.0 / m  # exponential correlations: int e^{-ms} ds
    hs = _h_star(m, h)
    if hs >= 0.5 - 1e-12:
        raise ValueError(
            f"divergent integral: H*(m) = {hs:.4f} >= 1/2 for m={m}, H={h}"
        )
    head = _rho_grid_integral(h, m, s_max)
    D = rho_asymptote_constant(h)
    tail_exp = m * (2.0 * h - 2.0) + 1.0  # = 2 H*(m) - 1 < 0
    tail = (D**m) * s_max**tail_exp / (-tail_exp)
    return head + tail


def variance_growth(m: int, H, t: float, eps: float) -> float:
    """Predicted order of (int_0^{t/eps} int_0^{t/eps} |rho|^m)^{1/2}.

    sqrt(t/eps * int rho^m), sqrt((t/eps)|ln eps|) or (t/eps)^{H*(m)}
    depending on the regime of H*(m).
    """
    h = as_hurst(H)
    hs = _h_star(m, h)
    tau = t / eps
    if abs(hs - 0.5) <= 1e-12:
        return float(np.sqrt(tau * abs(np.log(eps))))
    if hs < 0.5:
        return float(np.sqrt(tau * rho_power_integral(m, h)))
    return float(tau**hs)


@dataclass(frozen=True)
class FouConfig:
    """Configuration of the rescaled stationary fOU sampler.

    sigma defaults to the value that makes the stationary variance 1;
    burn_in is the pre-horizon relaxation length in units of eps (the
    residual initialization bias is e^{-burn_in}).
    """

    H: float
    eps: float
    sigma: float | None = None
    burn_in: float = 10.0

    def __post_init__(self):
        as_hurst(self.H)
        if not 0.0 < self.eps <= 1.0:
            raise ValueError("eps must lie in (0, 1]")
        if self.burn_in < 0:
            raise ValueError("burn_in must be non-negative")
        if self.sigma is None:
            object.__setattr__(self, "sigma", stationary_sigma(self.H))
        elif self.sigma <= 0:
            raise ValueError("sigma must be positive")


def _check_resolution(dt: float, eps: float):
    if dt > eps / MIN_STEPS_PER_EPS * (1.0 + 1e-12):
        raise ValueError(
            f"under-resolved fast scale: dt={dt:.3g} > eps/{MIN_STEPS_PER_EPS:.0f}"
            f"={eps / MIN_STEPS_PER_EPS:.3g}"
        )


def _fou_from_increments(dB: np.ndarray, dt: float, cfg: FouConfig, n_burn: int) -> np.ndarray:
    """Exponential-Euler recursion y_{k+1} = e^{-dt/eps} y_k + (sigma/eps^H) dB_k."""
    a = np.exp(-dt / cfg.eps)
    coef = cfg.sigma / cfg.eps ** float(cfg.H)
    y = lfilter([coef], [1.0, -a], dB, axis=-1)
    out = y[..., n_burn:]
    # prepend the state at t=0 (end of burn-in); y starts from 0 there if no burn-in
    if n_burn == 0:
        lead = np.zeros(out.shape[:-1] + (1,))
    else:
        lead = y[..., n_burn - 1 : n_burn]
    return np.concatenate([lead, out], axis=-1)


def sample_fou(grid: TimeGrid, cfg: FouConfig, rng: np.random.Generator) -> SamplePath:
    """Stationary fOU path on the grid.

    Runs the exponential-Euler update over burn_in*eps of pre-horizon
    time, driven by exact fGN increments, then returns the segment on
    [0, horizon].  Requires grid.dt <= eps/10.
    """
    dt = grid.dt
    _check_resolution(dt, cfg.eps)
    n_burn = int(np.ceil(cfg.burn_in * cfg.eps / dt))
    n_total = n_burn + grid.n_steps
    dB = fgn.sample_fgn(n_total, dt, cfg.H, rng)
    values = _fou_from_increments(dB, dt, cfg, n_burn)
    return SamplePath(grid, values)


def sample_fou_ensemble(
    grid: TimeGrid,
    cfg: FouConfig,
    master_seed: int,
    n_replicas: int,
    name: str = "fou",
    replica_offset: int = 0,
) -> np.ndarray:
    """Matrix of stationary fOU paths, one replica per row.

    Replica i is driven by the stream (master_seed, name, replica_offset+i),
    so any contiguous block of replicas can be generated independently and
    the result never depends on batching.
    """
    dt = grid.dt
    _check_resolution(dt, cfg.eps)
    n_burn = int(np.ceil(cfg.burn_in * cfg.eps / dt))
    n_total = n_burn + grid.n_steps
    rngs = [stream(master_seed, name, replica_offset + i) for i in range(n_replicas)]
    dB = fgn.sample_fgn_batch(n_total, dt, cfg.H, rngs)
    return _fou_from_increments(dB, dt, cfg, n_burn)
