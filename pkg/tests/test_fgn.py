import numpy as np
import pytest
from scipy import linalg

from foulim import fgn
from foulim.paths import TimeGrid
from foulim.streams import stream


def test_covariance_examples():
    for H in (0.3, 0.5, 0.75):
        assert fgn.fbm_covariance(1.0, 1.0, H) == pytest.approx(1.0)
        assert fgn.fbm_covariance(3.7, 0.0, H) == 0.0
    # direct evaluation of the formula at (2, 1, 0.75)
    assert fgn.fbm_covariance(2.0, 1.0, 0.75) == pytest.approx(np.sqrt(2.0), rel=1e-12)


def test_covariance_rejects_negative_times():
    with pytest.raises(ValueError):
        fgn.fbm_covariance(-1.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        fgn.fbm_covariance(1.0, 1.0, 1.5)


def test_covariance_self_similarity_and_stationary_increments():
    rng = np.random.default_rng(7)
    for _ in range(50):
        H = rng.uniform(0.05, 0.95)
        t, s = rng.uniform(0.01, 5.0, 2)
        lam = rng.uniform(0.1, 10.0)
        c = fgn.fbm_covariance
        assert c(lam * t, lam * s, H) == pytest.approx(
            lam ** (2 * H) * c(t, s, H), rel=1e-12
        )
        var_inc = c(t, t, H) + c(s, s, H) - 2 * c(t, s, H)
        assert var_inc == pytest.approx(abs(t - s) ** (2 * H), rel=1e-12, abs=1e-12)


def test_fgn_autocovariance_lag_values():
    g = fgn.fgn_autocovariance([0, 1], 0.75)
    assert g[0] == pytest.approx(1.0)
    # gamma(1)/gamma(0) = 2^{1.5}/2 - 1
    assert g[1] / g[0] == pytest.approx(2**1.5 / 2 - 1, rel=1e-12)


def test_fgn_lag1_autocorrelation_monte_carlo():
    # single long path, empirical lag-1 autocorrelation
    for H, target in ((0.75, 2**1.5 / 2 - 1), (0.25, 2**-0.5 - 1)):
        x = fgn.sample_fgn(100_000, 1.0, H, stream(11, f"lag1-{H}"))
        r1 = np.corrcoef(x[:-1], x[1:])[0, 1]
        assert r1 == pytest.approx(target, abs=0.01)


def test_fgn_brownian_case_iid():
    dt = 0.25
    x = fgn.sample_fgn(50_000, dt, 0.5, stream(3, "bm"))
    assert x.var() == pytest.approx(dt, rel=0.02)
    assert abs(np.corrcoef(x[:-1], x[1:])[0, 1]) < 0.02
    # variance-ratio test: blocks of 4 behave like sums of 4 iid terms
    blocks = x[: 4 * (len(x) // 4)].reshape(-1, 4).sum(axis=1)
    assert blocks.var() / (4 * x.var()) == pytest.approx(1.0, abs=0.03)


def test_fbm_path_normalization_and_variance():
    grid = TimeGrid(1.0, 16)
    vals = np.stack([
        fgn.sample_fbm(grid, 0.7, stream(5, "fbm", i)).values for i in range(20_000)
    ])
    assert np.all(vals[:, 0] == 0.0)
    assert vals[:, -1].var() == pytest.approx(1.0, abs=0.03)
    times = grid.times()
    for t in (0.25, 0.5, 1.0):
        k = int(round(t / grid.dt))
        var = vals[:, k].var()
        se = var * np.sqrt(2.0 / len(vals))
        assert abs(var - t ** (2 * 0.7)) < 3 * se + 1e-12


def test_fbm_empirical_covariance_matrix():
    grid = TimeGrid(1.0, 16)
    H = 0.3
    rngs = [stream(9, "cov", i) for i in range(20_000)]
    incs = fgn.sample_fgn_batch(grid.n_steps, grid.dt, H, rngs)
    paths = np.cumsum(incs, axis=1)
    times = grid.times()[1:]
    emp = paths.T @ paths / len(paths)
    theory = fgn.fbm_covariance(times[:, None], times[None, :], H)
    se = np.sqrt((np.outer(np.diag(theory), np.diag(theory)) + theory**2) / len(paths))
    assert np.max(np.abs(emp - theory) / se) < 5.0


def test_batch_matches_single_stream_draws():
    n, dt, H = 64, 0.1, 0.6
    batch = fgn.sample_fgn_batch(n, dt, H, [stream(2, "b", i) for i in range(3)])
    singles = np.stack([
        fgn.sample_fgn(n, dt, H, stream(2, "b", i)) for i in range(3)
    ])
    np.testing.assert_array_equal(batch, singles)


def test_dense_fallback_agrees_with_toeplitz_factor(monkeypatch):
    H, n = 0.8, 64
    monkeypatch.setattr(fgn, "_embedding_eigenvalues", lambda h, m: None)
    fgn._chol_cache.clear()
    z = fgn.sample_fgn(n, 0.5, H, stream(4, "dense"))
    # the fallback is L @ z with L the Cholesky factor; check the factor
    L = fgn._dense_factor(H, n)
    gamma = fgn.fgn_autocovariance(np.arange(n), H)
    np.testing.assert_allclose(L @ L.T, linalg.toeplitz(gamma), atol=1e-10)
    assert z.shape == (n,)


def test_sampler_infeasible_error(monkeypatch):
    monkeypatch.setattr(fgn, "_embedding_eigenvalues", lambda h, m: None)
    with pytest.raises(fgn.SamplerInfeasibleError):
        fgn.sample_fgn(fgn.DENSE_FALLBACK_MAX_N + 1, 1.0, 0.9, stream(0, "big"))


def test_mvn_normalizer_closed_form():
    # c1(H)^2 = (H-1/2)^2 B(H-1/2, 2-2H) / (H(2H-1)) for H > 1/2
    from scipy import special

    for H in (0.6, 0.75, 0.9):
        c1 = fgn.mvn_normalizer(H)
        closed = np.sqrt(
            (H - 0.5) ** 2 * special.beta(H - 0.5, 2 - 2 * H) / (H * (2 * H - 1))
        )
        assert c1 == pytest.approx(closed, rel=1e-7)
