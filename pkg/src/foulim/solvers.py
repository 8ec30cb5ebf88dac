"""Path-wise solvers for the slow/fast system and its limit equations.

Scalar state only: in one dimension the rough-driver solution obeys the
classical chain rule (the symmetric lift carries no extra information),
so Young/left-point schemes and the Heun-Stratonovich scheme cover every
regime used here.  Vector states with H < 1/2 would need genuine
Levy-area simulation and are out of scope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from . import chaos, fgn, fou
from .chaos import ChaosFunction
from .harness import ScanResult, fit_loglog_slope, fsum_mean, run_replicated
from .paths import SamplePath, TimeGrid, as_hurst
from .streams import stream

__all__ = [
    "MultiscaleConfig",
    "RoughDriver1d",
    "rough_lift_1d",
    "young_integrate",
    "solve_slow_fast",
    "solve_slow_fast_endpoints",
    "solve_limit_young",
    "solve_limit_stratonovich",
    "flow_map_1d",
    "kinetic_error_scan",
]

BLOWUP_GUARD = 1e8


@dataclass(frozen=True)
class MultiscaleConfig:
    """Slow/fast system dx = alpha(eps) f(x) G(y^eps) dt + h(x) g(y^eps) dt.

    f is assumed C^3-bounded, h C^2-bounded, g bounded (not enforced).
    alpha defaults to the scaling of G's regime; alpha_override replaces
    it (e.g. for sanity regimes outside the theory's parameter range).
    """

    f: object
    h: object
    G: ChaosFunction
    g: object
    H: float
    eps: float
    x0: float
    grid: TimeGrid
    seed: int = 0
    alpha_override: float | None = None

    def __post_init__(self):
        as_hurst(self.H)
        if not 0.0 < self.eps <= 1.0:
            raise ValueError("eps must lie in (0, 1]")
        if self.grid.dt > self.eps / fou.MIN_STEPS_PER_EPS * (1 + 1e-12):
            raise ValueError("grid.dt must be <= eps/10 to resolve the fast scale")

    def alpha(self) -> float:
        if self.alpha_override is not None:
            return self.alpha_override
        return chaos.classify_regime(self.G.hermite_rank, self.H).alpha(self.eps)


@dataclass
class RoughDriver1d:
    """A scalar path with its canonical symmetric second-order lift.

    XX(s,t) = 0.5*(X_t - X_s)^2; Chen's relation holds identically, and
    in one dimension the associated RDE solution coincides with the
    chain-rule (Young) solution.
    """

    path: SamplePath

    def lift(self, i: int, j: int) -> float:
        inc = self.path.values[j] - self.path.values[i]
        return 0.5 * inc * inc

    def chen_defect(self, i: int, k: int, j: int) -> float:
        """XX(i,j) - XX(i,k) - XX(k,j) - X(i,k)X(k,j); identically 0."""
        v = self.path.values
        return (
            self.lift(i, j)
            - self.lift(i, k)
            - self.lift(k, j)
            - (v[k] - v[i]) * (v[j] - v[k])
        )


def rough_lift_1d(X: SamplePath) -> RoughDriver1d:
    return RoughDriver1d(X)


def young_integrate(x0, f, Z: SamplePath) -> SamplePath:
    """Left-point scheme for dx = f(x) dZ.

    The compensated-Riemann (Young) solution for drivers of Hoelder
    regularity > 1/2; the grid error is O(dt^{2*gamma-1}) for a
    gamma-Hoelder driver.
    """
    dZ = Z.increments()
    x = np.empty(len(Z))
    x[0] = x0
    for k in range(len(dZ)):
        x[k + 1] = x[k] + f(x[k]) * dZ[k]
    return SamplePath(Z.grid, x)


def _young_batch(x0: np.ndarray, f, dZ: np.ndarray, g_bar: float, h, dt: float) -> np.ndarray:
    """Vectorized left-point step for dx = f(x)dZ + g_bar h(x)dt; returns endpoints."""
    x = np.array(x0, dtype=float)
    for k in range(dZ.shape[1]):
        x = x + f(x) * dZ[:, k] + g_bar * h(x) * dt
    return x


def solve_limit_young(x0, f, h, g_bar: float, Z: SamplePath) -> SamplePath:
    """Left-point scheme for the limit Young equation dx = f(x)dZ + g_bar h(x)dt.

    The homogenization constant c is expected to be folded into Z's
    scaling by the caller.
    """
    dZ = Z.increments()
    dt = Z.grid.dt
    x = np.empty(len(Z))
    x[0] = x0
    for k in range(len(dZ)):
        x[k + 1] = x[k] + f(x[k]) * dZ[k] + g_bar * h(x[k]) * dt
    return SamplePath(Z.grid, x)


def solve_limit_stratonovich(x0, f, h, g_bar: float, c: float, W: SamplePath) -> SamplePath:
    """Heun (midpoint-predictor) scheme for dx = c f(x) o dW + g_bar h(x)dt.

    Strong order 1/2; the predictor-corrector average makes the scheme
    consistent with the Stratonovich integral (no Ito correction).
    """
    dW = W.increments()
    dt = W.grid.dt
    x = np.empty(len(W))
    x[0] = x0
    for k in range(len(dW)):
        drift = lambda u: g_bar * h(u)
        diff = lambda u: c * f(u)
        pred = x[k] + diff(x[k]) * dW[k] + drift(x[k]) * dt
        x[k + 1] = (
            x[k]
            + 0.5 * (diff(x[k]) + diff(pred)) * dW[k]
            + 0.5 * (drift(x[k]) + drift(pred)) * dt
        )
    return SamplePath(W.grid, x)


def flow_map_1d(f, x0: float, u_values) -> np.ndarray:
    """Endpoints of dphi/du = f(phi), phi(0) = x0, evaluated at u_values.

    In one dimension the Young and Stratonovich solutions of
    dx = f(x) dU (no drift) are the flow of f evaluated at the driver
    increment, so this is the exact solution map for driver endpoints.
    """
    from scipy.integrate import solve_ivp

    u = np.asarray(u_values, dtype=float)
    out = np.empty(u.shape)
    for lo, hi, mask in (
        (0.0, float(u.max(initial=0.0)), u >= 0),
        (0.0, float(u.min(initial=0.0)), u < 0),
    ):
        if not np.any(mask):
            continue
        span = (lo, hi if hi != lo else lo + 1e-12)
        sol = solve_ivp(
            lambda _, x: np.atleast_1d(f(x[0])), span, [x0],
            dense_output=True, rtol=1e-10, atol=1e-12,
        )
        out[mask] = sol.sol(u[mask])[0]
    return out


def _rk4_step(x, dt, rhs_now, rhs_half, rhs_next):
    k1 = rhs_now(x)
    k2 = rhs_half(x + 0.5 * dt * k1)
    k3 = rhs_half(x + 0.5 * dt * k2)
    k4 = rhs_next(x + dt * k3)
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _solve_slow_fast_from_y(cfg: MultiscaleConfig, y: np.ndarray) -> np.ndarray:
    """RK4 on the random ODE; y sampled at twice the solver resolution.

    y has shape (..., 2*n_steps + 1): values at every half-step, so the
    classical RK4 stages see the fast variable at t, t + dt/2 and t + dt.
    """
    alpha = cfg.alpha()
    f, h, G, g = cfg.f, cfg.h, cfg.G, cfg.g
    dt = cfg.grid.dt
    n = cfg.grid.n_steps
    x = np.full(y.shape[:-1], float(cfg.x0))
    out = np.empty(y.shape[:-1] + (n + 1,))
    out[..., 0] = x
    for k in range(n):
        y0 = y[..., 2 * k]
        yh = y[..., 2 * k + 1]
        y1 = y[..., 2 * k + 2]

        def rhs(u, yv):
            return alpha * f(u) * G(yv) + h(u) * g(yv)

        x = _rk4_step(
            x, dt,
            lambda u: rhs(u, y0),
            lambda u: rhs(u, yh),
            lambda u: rhs(u, y1),
        )
        if np.any(np.abs(x) > BLOWUP_GUARD):
            raise FloatingPointError(
                f"slow variable exceeded {BLOWUP_GUARD:g} at step {k + 1}; "
                "the system blew up"
            )
        out[..., k + 1] = x
    return out


def solve_slow_fast(cfg: MultiscaleConfig, rng: np.random.Generator) -> SamplePath:
    """One path of the slow variable driven by a fresh stationary fOU."""
    fine = TimeGrid(cfg.grid.horizon, 2 * cfg.grid.n_steps)
    y = fou.sample_fou(fine, fou.FouConfig(cfg.H, cfg.eps), rng).values
    return SamplePath(cfg.grid, _solve_slow_fast_from_y(cfg, y))


def solve_slow_fast_endpoints(cfg: MultiscaleConfig, n_replicas: int,
                              master_seed: int, name: str = "slowfast",
                              threads: int = 1) -> np.ndarray:
    """Replica endpoints x^eps_T for the distributional limit checks."""
    fine = TimeGrid(cfg.grid.horizon, 2 * cfg.grid.n_steps)
    fcfg = fou.FouConfig(cfg.H, cfg.eps)

    def make_chunk(offset, count):
        y = fou.sample_fou_ensemble(fine, fcfg, master_seed, count, name, offset)
        return _solve_slow_fast_from_y(cfg, y)[:, -1]

    return run_replicated(n_replicas, make_chunk, threads)


def kinetic_error_scan(H, eps_list, grid: TimeGrid, n_replicas: int,
                       master_seed: int = 0, dt_ratio: float = 100.0,
                       holder_gamma_factor: float = 0.5,
                       threads: int = 1) -> ScanResult:
    """Convergence rate of X^eps = eps^{H-1} int_0^t y^eps ds toward sigma B^H.

    Couples every eps to the same underlying fBM per replica (increments
    aggregated from one master grid of spacing min(eps)/dt_ratio).  The
    integral uses the exponential left-point rule, under which

        X_{s,t} - sigma B_{s,t} = -eps (v_t - v_s),   v = eps^{H-1} y,

    holds on the grid to floating-point accuracy; the reported statistic
    is the sup over reporting-grid pairs of the replica-L2 error, whose
    log-log slope against log(1/eps) is H.  meta carries the max identity
    defect and the Hoelder-seminorm slope at gamma = holder_gamma_factor*H.
    """
    h = as_hurst(H)
    eps_arr = np.asarray(sorted(set(float(e) for e in eps_list), reverse=True))
    T = grid.horizon
    sigma = fou.stationary_sigma(h)
    # master spacing: finest dt refined until every eps grid sits on it
    dt_min = eps_arr[-1] / dt_ratio
    for k in range(1, 101):
        dt_master = dt_min / k
        ratios = eps_arr / dt_ratio / dt_master
        if np.all(np.abs(ratios - np.round(ratios)) < 1e-9):
            break
    else:
        raise ValueError(
            f"eps values {eps_arr} have no common refinement within 100x of "
            "the finest grid; choose commensurate scales"
        )
    blocks = [int(round(r)) for r in ratios]
    burn = 10.0 * eps_arr[0]
    n_burn_m = int(round(burn / dt_master))
    n_main_m = int(round(T / dt_master))

    # reporting indices on [0, T] per eps grid
    report_times = grid.times()

    def make_chunk(offset, count):
        rngs = [stream(master_seed, "kinetic", offset + k) for k in range(count)]
        dB = fgn.sample_fgn_batch(n_burn_m + n_main_m, dt_master, h, rngs)
        out = np.empty((count, len(eps_arr), 2, len(report_times)))
        for i, (eps, b) in enumerate(zip(eps_arr, blocks)):
            dt = b * dt_master
            agg = dB.reshape(count, -1, b).sum(axis=2)
            n_burn = n_burn_m // b
            a = np.exp(-dt / eps)
            y = lfilter([sigma / eps**h], [1.0, -a], agg, axis=1)
            # states at main-grid points 0..n_main (y_k = state after k-th step)
            y_main = np.concatenate(
                [y[:, n_burn - 1 : n_burn], y[:, n_burn:]], axis=1
            )
            B_main = np.concatenate(
                [np.zeros((count, 1)), np.cumsum(agg[:, n_burn:], axis=1)], axis=1
            )
            # exponential left-point integral of y on [0, t_k]
            X = eps ** (h - 1.0) * eps * (1.0 - a) * np.concatenate(
                [np.zeros((count, 1)), np.cumsum(y_main[:, :-1], axis=1)], axis=1
            )
            idx = np.round(report_times / dt).astype(int)
            out[:, i, 0, :] = (X - sigma * B_main)[:, idx]
            out[:, i, 1, :] = (eps**h * y_main)[:, idx]  # eps * v on the grid
        return out

    data = run_replicated(n_replicas, make_chunk, threads)
    diff = data[:, :, 0, :]   # X - sigma*B at reporting times
    epsv = data[:, :, 1, :]   # eps * v at reporting times

    # identity defect: X_{s,t} - sigma B_{s,t} + eps(v_t - v_s) == 0 on-grid
    defect = np.max(np.abs((diff - diff[:, :, :1]) + (epsv - epsv[:, :, :1])))

    n_rep = len(report_times)
    sup_err = np.empty(len(eps_arr))
    sup_se = np.empty(len(eps_arr))
    holder = np.empty(len(eps_arr))
    gam = holder_gamma_factor * h
    lag = np.abs(report_times[:, None] - report_times[None, :])
    np.fill_diagonal(lag, np.inf)
    for i in range(len(eps_arr)):
        d = diff[:, i, :]
        pair_sq = np.mean(
            (d[:, :, None] - d[:, None, :]) ** 2, axis=0
        )  # (n_rep, n_rep) pairwise second moments
        k_flat = np.argmax(pair_sq)
        sup_err[i] = np.sqrt(pair_sq.ravel()[k_flat])
        worst = (d[:, k_flat // n_rep] - d[:, k_flat % n_rep]) ** 2
        sup_se[i] = 0.5 * np.std(worst, ddof=1) / np.sqrt(len(worst)) / sup_err[i]
        semi = np.max(
            np.abs(d[:, :, None] - d[:, None, :]) / lag[None, :, :] ** gam,
            axis=(1, 2),
        )
        holder[i] = fsum_mean(semi)
    slope, ci = fit_loglog_slope(1.0 / eps_arr, sup_err, sup_se, master_seed)
    h_slope, h_ci = fit_loglog_slope(
        1.0 / eps_arr, holder, np.maximum(1e-3 * holder, 1e-12), master_seed + 1
    )
    return ScanResult(
        eps_arr, sup_err, sup_se, n_replicas, slope, ci,
        meta={
            "identity_defect_max": float(defect),
            "holder_seminorm": holder,
            "holder_gamma": gam,
            "holder_slope": h_slope,
            "holder_slope_ci": h_ci,
            "statistic": "sup_pair_l2_error",
        },
    )
