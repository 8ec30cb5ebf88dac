import numpy as np
import pytest

from foulim import chaos, fgn, fou, harness, solvers
from foulim.chaos import ChaosFunction
from foulim.paths import SamplePath, TimeGrid
from foulim.streams import stream

H1 = ChaosFunction.from_coefficients([0, 1.0])
H2 = ChaosFunction.from_coefficients([0, 0, 1.0])


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def test_young_additive_case():
    grid = TimeGrid(1.0, 100)
    Z = SamplePath(grid, np.sin(grid.times()))
    x = solvers.young_integrate(2.0, lambda u: np.ones_like(u), Z)
    np.testing.assert_allclose(x.values, 2.0 + Z.values - Z.values[0], rtol=1e-14)


def test_young_smooth_driver_exponential_order():
    errs = []
    for n in (200, 400, 800, 1600):
        grid = TimeGrid(1.0, n)
        Z = SamplePath(grid, grid.times() ** 2)
        x = solvers.young_integrate(1.0, lambda u: u, Z)
        errs.append(abs(x.values[-1] - np.exp(1.0)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    # first-order scheme: dyadic orders increase toward 1
    assert np.all(np.diff(orders) > 0)
    assert orders[-1] > 0.99
    # Aitken extrapolation of the order sequence reaches 1
    d1, d2 = orders[1] - orders[0], orders[2] - orders[1]
    order_limit = orders[2] + d2 * d2 / (d1 - d2)
    assert order_limit >= 1.0 - 1e-3


def test_young_fbm_driver_matches_chain_rule():
    grid = TimeGrid(1.0, 4000)
    Z = fgn.sample_fbm(grid, 0.8, stream(1, "yfbm"))
    x = solvers.young_integrate(1.0, lambda u: u, Z)
    exact = np.exp(Z.values - Z.values[0])
    assert np.max(np.abs(x.values - exact)) < 0.02 * np.max(exact)


def test_limit_young_drift_only_is_ode_flow():
    grid = TimeGrid(1.0, 2000)
    Z = SamplePath(grid, np.zeros(2001))
    x = solvers.solve_limit_young(1.0, _zero, lambda u: u, 0.7, Z)
    assert x.values[-1] == pytest.approx(np.exp(0.7), rel=1e-3)


def test_limit_young_exponential_closed_form():
    grid = TimeGrid(1.0, 4000)
    Z = fgn.sample_fbm(grid, 0.8, stream(2, "ly"))
    x = solvers.solve_limit_young(1.0, lambda u: u, _zero, 0.0, Z)
    exact = np.exp(Z.values)
    assert np.max(np.abs(x.values - exact)) < 0.02 * np.max(exact)


def test_limit_young_degenerate_constants():
    grid = TimeGrid(1.0, 100)
    Z = SamplePath(grid, np.zeros(101))  # c = 0 folded into the driver
    x = solvers.solve_limit_young(0.3, lambda u: u, lambda u: u, 0.0, Z)
    np.testing.assert_allclose(x.values, 0.3)


def test_stratonovich_deterministic_when_c_zero():
    grid = TimeGrid(1.0, 1000)
    W = SamplePath(grid, stream(3, "w0").standard_normal(1001).cumsum() * 0.0)
    x = solvers.solve_limit_stratonovich(1.0, lambda u: u, lambda u: u, 0.5, 0.0, W)
    assert x.values[-1] == pytest.approx(np.exp(0.5), rel=1e-4)


def test_stratonovich_additive_matches_quadrature():
    grid = TimeGrid(1.0, 2000)
    incs = stream(4, "wa").standard_normal(2000) * np.sqrt(grid.dt)
    W = SamplePath(grid, np.concatenate([[0.0], np.cumsum(incs)]))
    c, g_bar = 0.7, 0.3
    h = lambda u: np.cos(u)
    x = solvers.solve_limit_stratonovich(0.2, lambda u: np.ones_like(u), h, g_bar, c, W)
    # additive noise: x_t = x0 + c W_t + g_bar int h(x_s) ds
    drift = g_bar * grid.dt * np.cumsum(np.cos(x.values[:-1]))
    expect = 0.2 + c * W.values[1:] + drift
    assert np.max(np.abs(x.values[1:] - expect)) < 5e-3


def test_stratonovich_no_ito_correction():
    # multiplicative case: log x - log x0 - cW - gbar*t must average to 0,
    # not drift by -c^2 t/2 as the Ito reading would
    grid = TimeGrid(1.0, 2000)
    c, g_bar = 0.8, 0.4
    resid = []
    for i in range(200):
        incs = stream(5, "strat", i).standard_normal(2000) * np.sqrt(grid.dt)
        W = SamplePath(grid, np.concatenate([[0.0], np.cumsum(incs)]))
        x = solvers.solve_limit_stratonovich(
            1.0, lambda u: u, lambda u: u, g_bar, c, W)
        resid.append(np.log(x.values[-1]) - c * W.values[-1] - g_bar)
    resid = np.array(resid)
    assert abs(resid.mean()) < 0.01
    assert abs(resid.mean()) < 0.1 * c**2 / 2


def test_rough_lift_properties():
    grid = TimeGrid(1.0, 50)
    a = 1.7
    lin = solvers.rough_lift_1d(SamplePath(grid, a * grid.times()))
    assert lin.lift(10, 30) == pytest.approx(
        0.5 * a**2 * (grid.times()[30] - grid.times()[10]) ** 2
    )
    const = solvers.rough_lift_1d(SamplePath(grid, np.full(51, 2.0)))
    assert const.lift(0, 50) == 0.0
    Z = fgn.sample_fbm(grid, 0.4, stream(6, "lift"))
    drv = solvers.rough_lift_1d(Z)
    rng = np.random.default_rng(0)
    for _ in range(25):
        i, k, j = sorted(rng.choice(51, size=3, replace=False))
        assert drv.chen_defect(i, k, j) == pytest.approx(0.0, abs=1e-14)


def test_flow_map_exponential():
    u = np.array([-1.0, 0.0, 0.5, 2.0])
    out = solvers.flow_map_1d(lambda x: x, 1.5, u)
    np.testing.assert_allclose(out, 1.5 * np.exp(u), rtol=1e-8)


def test_multiscale_config_validation():
    with pytest.raises(ValueError, match="resolve the fast scale"):
        solvers.MultiscaleConfig(
            f=_zero, h=_zero, G=H1, g=_zero, H=0.7, eps=0.01, x0=0.0,
            grid=TimeGrid(1.0, 50),
        )


def test_slow_fast_reduces_to_functional_integral():
    # f = 1, h = 0: the slow variable is exactly the scaled time integral
    eps = 0.05
    n_steps = 400  # dt = eps/20
    cfg = solvers.MultiscaleConfig(
        f=lambda u: np.ones_like(np.asarray(u, dtype=float)), h=_zero,
        G=H1, g=_zero, H=0.8, eps=eps, x0=0.0, grid=TimeGrid(1.0, n_steps),
    )
    fine = TimeGrid(1.0, 2 * n_steps)
    y = fou.sample_fou_ensemble(fine, fou.FouConfig(0.8, eps), 33, 50, "c1")
    x = solvers._solve_slow_fast_from_y(cfg, y)
    X = harness._functional_cumulative(H1, y, fine.dt, cfg.alpha())
    assert np.max(np.abs(x[:, -1] - X[:, -1])) < 0.01


def test_slow_fast_ergodic_drift_only():
    # f = 0: dx = h(x) g(y) with h = 1: x_t - x0 -> t * gbar
    g = np.cos
    g_bar = chaos.gaussian_expectation(g)
    ends = []
    for eps, name in ((0.05, "e1"), (0.01, "e2")):
        n_steps = int(round(1.0 / (eps / 20)))
        cfg = solvers.MultiscaleConfig(
            f=_zero, h=lambda u: np.ones_like(np.asarray(u, dtype=float)),
            G=H1, g=g, H=0.7, eps=eps, x0=0.0, grid=TimeGrid(1.0, n_steps),
            alpha_override=0.0,
        )
        end = solvers.solve_slow_fast_endpoints(cfg, 400, 35, name)
        assert end.mean() == pytest.approx(g_bar, abs=0.03)
        ends.append(end.std())
    assert ends[1] < ends[0]


def test_slow_fast_blowup_guard():
    cfg = solvers.MultiscaleConfig(
        f=lambda u: 1.0 + u**2, h=_zero, G=H1, g=_zero, H=0.7, eps=0.1,
        x0=5.0, grid=TimeGrid(1.0, 100), alpha_override=50.0,
    )
    with pytest.raises(FloatingPointError, match="blew up"):
        solvers.solve_slow_fast(cfg, stream(0, "blow"))


def test_grid_refinement_stability():
    eps = 0.05
    ends = []
    for n_steps in (200, 400):
        cfg = solvers.MultiscaleConfig(
            f=lambda u: np.sin(u) + 2.0, h=_zero, G=H2, g=_zero,
            H=0.6, eps=eps, x0=0.0, grid=TimeGrid(1.0, n_steps),
        )
        ends.append(solvers.solve_slow_fast_endpoints(cfg, 300, 37, "grid"))
    se = ends[0].std() / np.sqrt(len(ends[0]))
    assert abs(ends[0].mean() - ends[1].mean()) < se


def test_kinetic_identity_and_slope():
    grid = TimeGrid(1.0, 20)
    scan = solvers.kinetic_error_scan(0.7, [0.1, 0.05, 0.025], grid, 120, 39)
    assert scan.meta["identity_defect_max"] < 1e-6
    slope = -scan.slope
    assert slope == pytest.approx(0.7, abs=0.2)
    # errors shrink monotonically
    assert np.all(np.diff(scan.values) < 0)


def test_kinetic_incommensurate_scales_rejected():
    grid = TimeGrid(1.0, 10)
    with pytest.raises(ValueError, match="common refinement"):
        solvers.kinetic_error_scan(0.5, [0.1, 0.1 / np.pi], grid, 10, 0)
