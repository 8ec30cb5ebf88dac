"""Monte Carlo verification harness for the scaling-limit claims.

Everything here is replica-parallel with a fixed chunking policy:
replica i always draws from stream (master_seed, name, i) and chunks have
a fixed size, so results are bit-identical for any worker count.  Scalar
aggregation goes through math.fsum (compensated), keeping reduction
reassociation out of the reported statistics.

Slopes of log statistic against log(1/eps) are fitted by
inverse-variance-weighted least squares, with a parametric bootstrap
confidence interval; acceptance checks consume the CI, not the point
estimate.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import chaos, fou, hermite
from .chaos import ChaosFunction, Regime
from .paths import SamplePath, TimeGrid, as_hurst
from .streams import stream

__all__ = [
    "Ensemble",
    "ScanResult",
    "run_replicated",
    "fsum_mean",
    "fsum_variance",
    "functional_integral",
    "functional_values",
    "fit_loglog_slope",
    "variance_scan",
    "clt_diagnostics",
    "joint_covariance_check",
    "l2_convergence_hermite",
    "moment_bound_check",
]

CHUNK_SIZE = 250
BOOTSTRAP_DRAWS = 1000


@dataclass(frozen=True)
class Ensemble:
    """A reproducible collection of replicas of one experiment."""

    config: dict
    n_replicas: int
    master_seed: int
    stream_name: str

    def replica_rng(self, i: int) -> np.random.Generator:
        return stream(self.master_seed, self.stream_name, i)


@dataclass
class ScanResult:
    """Statistic vs eps with standard errors and a fitted log-log slope.

    slope is with respect to log(1/eps); slope_ci is the 95% parametric
    bootstrap interval.  meta carries scan-specific extras.
    """

    eps_values: np.ndarray
    values: np.ndarray
    stderrs: np.ndarray
    n_replicas: int
    slope: float | None = None
    slope_ci: tuple[float, float] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.eps_values = np.asarray(self.eps_values, dtype=float)
        if len(self.eps_values) and np.any(np.diff(self.eps_values) >= 0):
            raise ValueError("eps_values must be strictly decreasing")


def run_replicated(n_replicas: int, make_chunk, threads: int = 1,
                   chunk_size: int = CHUNK_SIZE) -> np.ndarray:
    """Concatenate make_chunk(offset, count) over fixed-size replica chunks.

    make_chunk must be a pure function of (offset, count); the chunking is
    independent of the worker count, so the output is too.
    """
    bounds = [(a, min(a + chunk_size, n_replicas)) for a in range(0, n_replicas, chunk_size)]
    parts: list = [None] * len(bounds)
    if threads <= 1:
        for k, (a, b) in enumerate(bounds):
            parts[k] = make_chunk(a, b - a)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {pool.submit(make_chunk, a, b - a): k for k, (a, b) in enumerate(bounds)}
            for fut in futures:
                parts[futures[fut]] = fut.result()
    return np.concatenate(parts, axis=0)


def fsum_mean(x) -> float:
    x = np.asarray(x, dtype=float)
    return math.fsum(x.tolist()) / len(x)


def fsum_variance(x, ddof: int = 1) -> float:
    x = np.asarray(x, dtype=float)
    mu = fsum_mean(x)
    return math.fsum(((x - mu) ** 2).tolist()) / (len(x) - ddof)


def functional_integral(G, y: SamplePath, alpha: float = 1.0) -> SamplePath:
    """Path t -> alpha * int_0^t G(y_s) ds by the cumulative trapezoid rule."""
    gy = np.asarray(G(y.values), dtype=float)
    dt = y.grid.dt
    inner = 0.5 * (gy[1:] + gy[:-1])
    vals = alpha * dt * np.concatenate([[0.0], np.cumsum(inner)])
    return SamplePath(y.grid, vals)


def functional_values(G, y_matrix: np.ndarray, dt: float, alpha: float = 1.0) -> np.ndarray:
    """Endpoint alpha * int_0^T G(y) for each replica row of y_matrix."""
    gy = np.asarray(G(y_matrix), dtype=float)
    inner = 0.5 * (gy[:, 1:] + gy[:, :-1])
    return alpha * dt * inner.sum(axis=1)


def _functional_cumulative(G, y_matrix: np.ndarray, dt: float, alpha: float = 1.0) -> np.ndarray:
    gy = np.asarray(G(y_matrix), dtype=float)
    inner = 0.5 * (gy[:, 1:] + gy[:, :-1])
    out = np.empty_like(gy)
    out[:, 0] = 0.0
    np.cumsum(inner, axis=1, out=out[:, 1:])
    return alpha * dt * out


def fit_loglog_slope(inv_eps: np.ndarray, values: np.ndarray, stderrs: np.ndarray,
                     seed: int = 0) -> tuple[float, tuple[float, float]]:
    """Weighted LSQ slope of log(values) vs log(inv_eps), bootstrap 95% CI.

    Weights are the inverse variances of log(values); the CI comes from a
    parametric bootstrap that redraws each log-point from its normal
    error model.
    """
    x = np.log(np.asarray(inv_eps, dtype=float))
    v = np.asarray(values, dtype=float)
    se = np.asarray(stderrs, dtype=float)
    if np.any(v <= 0):
        raise ValueError("log-log fit requires positive statistics")
    y = np.log(v)
    sig = np.clip(se / v, 1e-12, None)  # delta method
    w = 1.0 / sig**2

    def wls(yy):
        xm = np.average(x, weights=w)
        ym = np.average(yy, weights=w)
        return float(np.sum(w * (x - xm) * (yy - ym)) / np.sum(w * (x - xm) ** 2))

    slope = wls(y)
    rng = stream(seed, "slope-bootstrap")
    draws = np.empty(BOOTSTRAP_DRAWS)
    for b in range(BOOTSTRAP_DRAWS):
        draws[b] = wls(y + sig * rng.standard_normal(len(y)))
    lo, hi = np.percentile(draws, [2.5, 97.5])
    return slope, (float(lo), float(hi))


def _fou_endpoint_samples(G, h: float, t: float, eps: float, n_replicas: int,
                          master_seed: int, name: str, dt_ratio: float,
                          alpha: float, threads: int = 1) -> np.ndarray:
    """Replica samples of alpha * int_0^t G(y^eps) ds."""
    n_steps = max(int(round(t / (eps / dt_ratio))), 1)
    grid = TimeGrid(t, n_steps)
    cfg = fou.FouConfig(h, eps)

    def make_chunk(offset, count):
        y = fou.sample_fou_ensemble(grid, cfg, master_seed, count, name, offset)
        return functional_values(G, y, grid.dt, alpha)

    return run_replicated(n_replicas, make_chunk, threads)


def variance_scan(G: ChaosFunction, H, t: float, eps_list, n_replicas: int,
                  master_seed: int = 0, dt_ratio: float = 50.0,
                  threads: int = 1) -> ScanResult:
    """Variance of the time integral of G(y^eps) across scales.

    For each eps the statistic is Var(int_0^t G(y^eps) ds), reported both
    raw ("unscaled", the slope source: expected log-log slope against
    log(1/eps) is -1 in the short-range regime and 2H*(m)-2 in the
    long-range one) and multiplied by alpha(eps)^2, which must stabilize
    in every regime.
    """
    h = as_hurst(H)
    eps_arr = np.asarray(sorted(set(float(e) for e in eps_list), reverse=True))
    if len(eps_arr) < 3:
        raise ValueError("variance scan needs at least 3 eps values")
    regime = chaos.classify_regime(G.hermite_rank, h)
    var_raw = np.empty(len(eps_arr))
    se_raw = np.empty(len(eps_arr))
    var_scaled = np.empty(len(eps_arr))
    for i, eps in enumerate(eps_arr):
        x = _fou_endpoint_samples(
            G, h, t, eps, n_replicas, master_seed, f"vscan-eps{i}", dt_ratio, 1.0,
            threads,
        )
        v = fsum_variance(x)
        var_raw[i] = v
        se_raw[i] = v * np.sqrt(2.0 / (len(x) - 1))
        var_scaled[i] = v * regime.alpha(eps) ** 2
    slope, ci = fit_loglog_slope(1.0 / eps_arr, var_raw, se_raw, master_seed)
    flatness = float(np.max(np.abs(var_scaled / var_scaled.mean() - 1.0)))
    sd_scaled = np.sqrt(var_scaled)
    sd_flatness = float(np.max(np.abs(sd_scaled / sd_scaled.mean() - 1.0)))
    return ScanResult(
        eps_arr, var_raw, se_raw, n_replicas, slope, ci,
        meta={
            "scaled_variance": var_scaled,
            "scaled_flatness": flatness,
            "scaled_sd_flatness": sd_flatness,
            "regime": regime.kind.value,
            "h_star": regime.h_star,
            "statistic": "var_unscaled_integral",
        },
    )


def excess_kurtosis_with_se(samples) -> tuple[float, float]:
    """Excess kurtosis and its influence-function standard error.

    The normal-theory sqrt(24/n) badly underestimates the estimator
    spread for heavy-tailed inputs (the kurtosis estimator involves
    eighth moments), so the SE comes from the empirical variance of the
    influence function of m4/m2^2.
    """
    x = np.asarray(samples, dtype=float)
    n = len(x)
    xc = x - x.mean()
    m2 = np.mean(xc**2)
    m3 = np.mean(xc**3)
    m4 = np.mean(xc**4)
    kurt = m4 / m2**2 - 3.0
    infl = (xc**4 - m4 - 4.0 * m3 * xc) / m2**2 - 2.0 * (m4 / m2**3) * (xc**2 - m2)
    return float(kurt), float(np.std(infl, ddof=1) / np.sqrt(n))


def clt_diagnostics(samples) -> dict:
    """Moment and distribution diagnostics of Monte Carlo samples.

    Mean, variance, skewness and excess kurtosis with standard errors
    (kurtosis by the influence-function estimate, the rest normal-theory),
    plus the KS statistic against N(0, sample variance).
    """
    x = np.asarray(samples, dtype=float)
    n = len(x)
    if n < 1000:
        raise ValueError("need at least 1e3 samples for stable diagnostics")
    mu = fsum_mean(x)
    var = fsum_variance(x)
    sd = np.sqrt(var)
    z = (x - mu) / sd
    skew = fsum_mean(z**3)
    kurt, kurt_se = excess_kurtosis_with_se(x)
    ks = stats.kstest(x, "norm", args=(0.0, sd))
    return {
        "n": n,
        "mean": mu,
        "se_mean": sd / np.sqrt(n),
        "variance": var,
        "se_variance": var * np.sqrt(2.0 / (n - 1)),
        "skewness": skew,
        "se_skewness": np.sqrt(6.0 / n),
        "excess_kurtosis": kurt,
        "se_excess_kurtosis": kurt_se,
        "ks_statistic": float(ks.statistic),
        "ks_pvalue": float(ks.pvalue),
    }


def joint_covariance_check(G_list, H, t: float, s: float, eps: float,
                           n_replicas: int, master_seed: int = 0,
                           dt_ratio: float = 50.0, threads: int = 1) -> dict:
    """Empirical covariance matrix of (X^{k,eps}_t, X^{k,eps}_s) vs theory.

    Wiener-Wiener pairs must match 2(t^s)A^{ij}; Wiener-Hermite cross
    pairs and Hermite-Hermite pairs of different rank must vanish.  All
    components ride on the same fOU replicas.
    """
    h = as_hurst(H)
    horizon = max(t, s)
    n_steps = max(int(round(horizon / (eps / dt_ratio))), 1)
    grid = TimeGrid(horizon, n_steps)
    cfg = fou.FouConfig(h, eps)
    it = int(round(t / grid.dt))
    i_s = int(round(s / grid.dt))
    regimes = [chaos.classify_regime(G.hermite_rank, h) for G in G_list]
    alphas = [r.alpha(eps) for r in regimes]

    def make_chunk(offset, count):
        y = fou.sample_fou_ensemble(grid, cfg, master_seed, count, "joint-cov", offset)
        cols = []
        for G, a in zip(G_list, alphas):
            X = _functional_cumulative(G, y, grid.dt, a)
            cols.append(X[:, it])
            cols.append(X[:, i_s])
        return np.stack(cols, axis=1)

    data = run_replicated(n_replicas, make_chunk, threads)
    n_g = len(G_list)
    report = {"eps": eps, "t": t, "s": s, "n": n_replicas, "pairs": []}
    for i in range(n_g):
        for j in range(n_g):
            xi = data[:, 2 * i]       # X^i_t
            xj = data[:, 2 * j + 1]   # X^j_s
            prod = xi * xj - xi.mean() * xj.mean()
            emp = float(xi @ xj / len(xi) - xi.mean() * xj.mean())
            se = float(np.std(prod, ddof=1) / np.sqrt(len(xi)))
            ri, rj = regimes[i], regimes[j]
            if ri.kind is not Regime.LONG_RANGE and rj.kind is not Regime.LONG_RANGE:
                if Regime.BOUNDARY in (ri.kind, rj.kind):
                    # the A-series diverges at the boundary; no prediction
                    pred, kind = None, "wiener-wiener-boundary"
                else:
                    A, _ = chaos.limit_covariance_A(G_list[i], G_list[j], h)
                    pred = 2.0 * min(t, s) * A
                    kind = "wiener-wiener"
            elif ri.kind is Regime.LONG_RANGE and rj.kind is Regime.LONG_RANGE:
                if G_list[i].hermite_rank != G_list[j].hermite_rank:
                    pred, kind = 0.0, "hermite-hermite-distinct"
                else:
                    pred, kind = None, "hermite-hermite-same-rank"
            else:
                pred, kind = 0.0, "wiener-hermite-cross"
            entry = {"i": i, "j": j, "kind": kind, "empirical": emp, "stderr": se,
                     "predicted": pred}
            if pred is not None:
                entry["z"] = (emp - pred) / se if se > 0 else np.inf
            report["pairs"].append(entry)
    return report


def l2_convergence_hermite(G: ChaosFunction, H, t: float, eps_list,
                           n_replicas: int, master_seed: int = 0,
                           dt_ratio: float = 20.0, xi_window_factor: float = 30.0,
                           n_limit_steps: int = 400, threads: int = 1) -> ScanResult:
    """Coupled L2 distance between the scaled integral and its Hermite limit.

    Every replica owns one white noise; for each eps the fOU is built
    from that noise through its Wiener kernel, and the limit
    c_m (m!/K) C^m Z^{H*(m),m} is built from the same noise, so the
    distance ||X^eps_t - limit_t||_{L2(Omega)} is measured on coupled
    samples and must decrease as eps -> 0.
    """
    h = as_hurst(H)
    m = G.hermite_rank
    regime = chaos.classify_regime(m, h)
    if regime.kind is not Regime.LONG_RANGE:
        raise ValueError(
            f"coupled Hermite comparison requires the long-range regime; "
            f"H*(m) = {regime.h_star:.3f}"
        )
    eps_arr = np.asarray(sorted(set(float(e) for e in eps_list), reverse=True))
    eps_min = eps_arr[-1]
    dxi = eps_min / dt_ratio
    xi_window = xi_window_factor * t
    n_xi = int(round((xi_window + t) / dxi))
    edges = np.linspace(-xi_window, t, n_xi + 1)
    dxi = edges[1] - edges[0]
    mids = 0.5 * (edges[:-1] + edges[1:])

    hs = regime.h_star
    lam = (G.coefficients[m] * math.factorial(m) / chaos.K_normalizer(hs, m)
           * fou.kernel_amplitude(h) ** m)

    # limit-process machinery on a fixed s grid; the kernel exponent of
    # Z^{H*(m),m} is Hhat - 3/2 with Hhat = (H*(m)-1)/m + 1 = H
    s_mid = (np.arange(n_limit_steps) + 0.5) * (t / n_limit_steps)
    ds = t / n_limit_steps
    A_lim = hermite._cell_averaged_kernel(s_mid, edges, h - 1.5)

    # fOU kernel matrices, one per eps
    M_fou = []
    grids = []
    for eps in eps_arr:
        n_steps = max(int(round(t / (eps / dt_ratio))), 1)
        grid = TimeGrid(t, n_steps)
        M = hermite.ghat((grid.times()[:, None] - mids[None, :]) / eps, h) / np.sqrt(eps)
        M_fou.append(M)
        grids.append(grid)

    sq_dists = np.zeros(len(eps_arr))
    sq_sq = np.zeros(len(eps_arr))

    def make_chunk(offset, count):
        W = np.stack([
            stream(master_seed, "l2-noise", offset + k).standard_normal(n_xi)
            for k in range(count)
        ]) * np.sqrt(dxi)
        u = W @ A_lim.T  # (count, n_s)
        if m == 1:
            series = u * ds
        elif m == 2:
            q = (W * W) @ (A_lim * A_lim).T
            series = (u * u - q) * ds
        else:
            q = (W * W) @ (A_lim * A_lim).T
            r = (W**3) @ (A_lim**3).T
            series = (u**3 - 3 * q * u + 2 * r) * ds
        K = chaos.K_normalizer(hs, m)
        Z_t = series.sum(axis=1) * K / math.factorial(m)
        out = np.empty((count, len(eps_arr)))
        for i, eps in enumerate(eps_arr):
            y = W @ M_fou[i].T
            X = functional_values(G, y, grids[i].dt, eps ** (hs - 1.0))
            out[:, i] = (X - lam * Z_t) ** 2
        return out

    sq = run_replicated(n_replicas, make_chunk, threads)
    dists = np.array([np.sqrt(fsum_mean(sq[:, i])) for i in range(len(eps_arr))])
    se = np.array([
        0.5 * np.std(sq[:, i], ddof=1) / np.sqrt(n_replicas) / dists[i]
        for i in range(len(eps_arr))
    ])
    monotone = bool(np.all(np.diff(dists) < 0))
    return ScanResult(
        eps_arr, dists, se, n_replicas,
        meta={"monotone_decreasing": monotone, "statistic": "coupled_l2_distance",
              "limit_coefficient": lam, "hermite_order": m, "h_star": hs},
    )


def moment_bound_check(G: ChaosFunction, p: float, H, t: float, eps_list,
                       n_replicas: int, master_seed: int = 0,
                       dt_ratio: float = 50.0, threads: int = 1) -> dict:
    """p-th moment of int_0^t G(y^eps) against the regime bound shape.

    The ratio ||int G||_p / bound(eps) must stay bounded across eps, with
    bound sqrt(eps t int|rho|^m), sqrt(eps t |ln eps|) or
    t^{H*} eps^{1-H*} per regime.
    """
    if p <= 2:
        raise ValueError("moment order p must exceed 2")
    h = as_hurst(H)
    m = G.hermite_rank
    regime = chaos.classify_regime(m, h)
    eps_arr = np.asarray(sorted(set(float(e) for e in eps_list), reverse=True))
    ratios = np.empty(len(eps_arr))
    moments = np.empty(len(eps_arr))
    for i, eps in enumerate(eps_arr):
        x = _fou_endpoint_samples(
            G, h, t, eps, n_replicas, master_seed, f"mom-eps{i}", dt_ratio, 1.0,
            threads,
        )
        mom = fsum_mean(np.abs(x) ** p) ** (1.0 / p)
        if regime.kind is Regime.SHORT_RANGE:
            bound = np.sqrt(eps * t * fou.rho_power_integral(m, h))
        elif regime.kind is Regime.BOUNDARY:
            bound = np.sqrt(eps * t * abs(np.log(eps)))
        else:
            bound = t**regime.h_star * eps ** (1.0 - regime.h_star)
        moments[i] = mom
        ratios[i] = mom / bound
    return {
        "eps": eps_arr,
        "p": p,
        "moments": moments,
        "ratios": ratios,
        "ratio_spread": float(ratios.max() / ratios.min()),
        "regime": regime.kind.value,
        "n": n_replicas,
    }
