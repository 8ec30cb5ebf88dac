"""Command-line surface for reproducible experiments.

Every run is fully determined by (subcommand, parameters, --seed) and
emits a config echo that can be re-ingested with --config to reproduce
it bit-exactly.  Exit codes: 0 success, 1 usage error, 2 numerical or
acceptance failure (with a machine-readable report where applicable).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import chaos, fgn, fou, harness, hermite, output, solvers
from .chaos import ChaosFunction, Regime
from .paths import TimeGrid
from .streams import stream

__all__ = ["main"]

THREADS_ENV = "FOULIM_THREADS"

_F_PRESETS = {
    "sin2": lambda x: np.sin(x) + 2.0,
    "linear": lambda x: x,
    "one": lambda x: np.ones_like(np.asarray(x, dtype=float)),
    "zero": lambda x: np.zeros_like(np.asarray(x, dtype=float)),
}
_G_PRESETS = {
    "zero": lambda y: np.zeros_like(np.asarray(y, dtype=float)),
    "one": lambda y: np.ones_like(np.asarray(y, dtype=float)),
    "cos": np.cos,
}


class UsageError(Exception):
    pass


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"could not parse float list {text!r}") from exc


def _chaos_from_args(args) -> ChaosFunction:
    coeffs = _parse_floats(args.coeffs)
    return ChaosFunction.from_coefficients(coeffs)


def _default_threads() -> int:
    return max(1, int(os.environ.get(THREADS_ENV, "1")))


def _echo(args, command: str, params: dict) -> None:
    text = output.config_echo(command, params)
    if args.out:
        with open(f"{args.out}.config", "w") as fh:
            fh.write(text)
    else:
        sys.stderr.write(text)


def _emit_table(args, header, rows, summary: dict) -> None:
    if args.format == "csv":
        if args.out:
            output.write_csv(f"{args.out}.csv", header, rows)
            output.write_json(f"{args.out}.json", summary)
        else:
            import csv as _csv

            w = _csv.writer(sys.stdout, quoting=_csv.QUOTE_MINIMAL, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([output.fmt(v) for v in row])
    else:
        payload = dict(summary)
        payload["table"] = {"header": header, "rows": [[output.fmt(v) for v in r] for r in rows]}
        if args.out:
            output.write_json(f"{args.out}.json", payload)
        else:
            import json as _json

            _json.dump(payload, sys.stdout, indent=2, sort_keys=True, default=str)
            sys.stdout.write("\n")


def _path_rows(times, matrix):
    rows = []
    for r, row in enumerate(matrix):
        for t, v in zip(times, row):
            rows.append((r, t, v))
    return rows


# ------------------------------------------------------------------ commands


def _cmd_sample_fbm(args) -> int:
    grid = TimeGrid(args.horizon, args.n_steps)
    mats = []
    for r in range(args.replicas):
        rng = stream(args.seed, "cli-fbm", r)
        mats.append(fgn.sample_fbm(grid, args.H, rng).values)
    params = dict(H=args.H, horizon=args.horizon, n_steps=args.n_steps,
                  replicas=args.replicas, seed=args.seed)
    _echo(args, "sample-fbm", params)
    _emit_table(args, ["replica", "t", "value"], _path_rows(grid.times(), mats),
                {"command": "sample-fbm", **params})
    return 0


def _cmd_sample_fou(args) -> int:
    grid = TimeGrid(args.horizon, args.n_steps)
    cfg = fou.FouConfig(args.H, args.eps)
    mat = fou.sample_fou_ensemble(grid, cfg, args.seed, args.replicas, "cli-fou")
    params = dict(H=args.H, eps=args.eps, horizon=args.horizon,
                  n_steps=args.n_steps, replicas=args.replicas, seed=args.seed)
    _echo(args, "sample-fou", params)
    _emit_table(args, ["replica", "t", "value"], _path_rows(grid.times(), mat),
                {"command": "sample-fou", **params})
    return 0


def _cmd_rho(args) -> int:
    s = np.linspace(0.0, args.s_max, args.n_points)
    vals = fou.rho(s, args.H)
    params = dict(H=args.H, s_max=args.s_max, n_points=args.n_points)
    _echo(args, "rho", params)
    _emit_table(args, ["s", "rho"], list(zip(s, vals)), {"command": "rho", **params})
    return 0


def _cmd_chaos(args) -> int:
    G = _chaos_from_args(args)
    regime = chaos.classify_regime(G.hermite_rank, args.H)
    formulas = {
        Regime.SHORT_RANGE: "1/sqrt(eps)",
        Regime.BOUNDARY: "1/sqrt(eps*|ln(eps)|)",
        Regime.LONG_RANGE: f"eps^({regime.h_star - 1.0:.17g})",
    }
    summary = {
        "command": "chaos",
        "H": args.H,
        "coefficients": list(G.coefficients),
        "hermite_rank": G.hermite_rank,
        "h_star": regime.h_star,
        "regime": regime.kind.value,
        "alpha_formula": formulas[regime.kind],
    }
    if args.eps is not None:
        summary["alpha"] = regime.alpha(args.eps)
    params = dict(H=args.H, coeffs=args.coeffs, eps=args.eps)
    _echo(args, "chaos", params)
    rows = [(k, c) for k, c in enumerate(G.coefficients)]
    _emit_table(args, ["order", "coefficient"], rows, summary)
    return 0


def _cmd_constants(args) -> int:
    G = _chaos_from_args(args)
    regime = chaos.classify_regime(G.hermite_rank, args.H)
    summary = {
        "command": "constants",
        "H": args.H,
        "hermite_rank": G.hermite_rank,
        "h_star": regime.h_star,
        "regime": regime.kind.value,
        "sigma": fou.stationary_sigma(args.H),
        "c": chaos.c_constant(G, args.H),
    }
    if regime.kind is Regime.LONG_RANGE:
        summary["K_normalizer"] = chaos.K_normalizer(regime.h_star, G.hermite_rank)
        summary["kernel_amplitude"] = fou.kernel_amplitude(args.H)
    else:
        A, tail = chaos.limit_covariance_A(G, G, args.H)
        summary["A_self"] = A
        summary["A_truncation_tail"] = tail
    params = dict(H=args.H, coeffs=args.coeffs)
    _echo(args, "constants", params)
    rows = [(k, v) for k, v in summary.items() if isinstance(v, (int, float))]
    _emit_table(args, ["constant", "value"], rows, summary)
    return 0


def _cmd_hermite_sample(args) -> int:
    grid = TimeGrid(args.horizon, args.n_steps)
    spec = hermite.HermiteSpec(args.H, args.m, args.xi_window, args.n_xi)
    mats = []
    for r in range(args.replicas):
        rng = stream(args.seed, "cli-hermite", r)
        noise = hermite.sample_shared_noise(
            spec.xi_window, grid.horizon, spec.n_xi, rng,
            seed_lineage=(args.seed, "cli-hermite", r),
        )
        mats.append(hermite.hermite_values(grid, spec, noise))
    params = dict(H=args.H, m=args.m, xi_window=args.xi_window, n_xi=args.n_xi,
                  horizon=args.horizon, n_steps=args.n_steps,
                  replicas=args.replicas, seed=args.seed)
    _echo(args, "hermite-sample", params)
    _emit_table(args, ["replica", "t", "value"], _path_rows(grid.times(), mats),
                {"command": "hermite-sample", **params})
    return 0


def _cmd_clt_scan(args) -> int:
    G = _chaos_from_args(args)
    eps_list = _parse_floats(args.eps_list)
    scan = harness.variance_scan(
        G, args.H, args.t, eps_list, args.replicas, args.seed,
        dt_ratio=args.dt_ratio, threads=args.threads,
    )
    finest = scan.eps_values[-1]
    if args.replicas >= 1000:
        samples = harness._fou_endpoint_samples(
            G, args.H, args.t, finest, args.replicas, args.seed,
            f"vscan-eps{len(scan.eps_values) - 1}", args.dt_ratio,
            chaos.classify_regime(G.hermite_rank, args.H).alpha(finest), args.threads,
        )
        diag = harness.clt_diagnostics(samples)
    else:
        diag = {"note": "replicas < 1000: distributional diagnostics skipped"}
    regime = scan.meta["regime"]
    expected = {"short_range": -1.0, "boundary": -1.0,
                "long_range": 2.0 * scan.meta["h_star"] - 2.0}[regime]
    lo, hi = scan.slope_ci
    summary = {
        "command": "clt-scan",
        "regime": regime,
        "h_star": scan.meta["h_star"],
        "slope_vs_log_inv_eps": scan.slope,
        "slope_ci": [lo, hi],
        "expected_slope": expected,
        "slope_pass": bool(lo <= expected + 0.1 and hi >= expected - 0.1),
        "scaled_flatness": scan.meta["scaled_flatness"],
        "diagnostics_at_finest_eps": diag,
    }
    params = dict(H=args.H, coeffs=args.coeffs, t=args.t, eps_list=args.eps_list,
                  replicas=args.replicas, seed=args.seed, dt_ratio=args.dt_ratio)
    _echo(args, "clt-scan", params)
    rows = list(zip(scan.eps_values, scan.values, scan.stderrs,
                    [scan.n_replicas] * len(scan.eps_values)))
    _emit_table(args, ["eps", "statistic", "stderr", "n"], rows, summary)
    return 0


def _cmd_l2_hermite(args) -> int:
    G = _chaos_from_args(args)
    eps_list = _parse_floats(args.eps_list)
    scan = harness.l2_convergence_hermite(
        G, args.H, args.t, eps_list, args.replicas, args.seed, threads=args.threads,
    )
    summary = {
        "command": "l2-hermite",
        "monotone_decreasing": scan.meta["monotone_decreasing"],
        "limit_coefficient": scan.meta["limit_coefficient"],
        "h_star": scan.meta["h_star"],
        "pass": bool(scan.meta["monotone_decreasing"]
                     and scan.values[-1] < 0.5 * scan.values[0]),
    }
    params = dict(H=args.H, coeffs=args.coeffs, t=args.t, eps_list=args.eps_list,
                  replicas=args.replicas, seed=args.seed)
    _echo(args, "l2-hermite", params)
    rows = list(zip(scan.eps_values, scan.values, scan.stderrs,
                    [scan.n_replicas] * len(scan.eps_values)))
    _emit_table(args, ["eps", "statistic", "stderr", "n"], rows, summary)
    return 0


def _cmd_kinetic_scan(args) -> int:
    eps_list = _parse_floats(args.eps_list)
    grid = TimeGrid(args.t, args.n_report)
    scan = solvers.kinetic_error_scan(
        args.H, eps_list, grid, args.replicas, args.seed, threads=args.threads,
    )
    lo, hi = scan.slope_ci
    summary = {
        "command": "kinetic-scan",
        "H": args.H,
        "slope_vs_log_eps": -scan.slope,
        "slope_ci_vs_log_eps": [-hi, -lo],
        "expected_slope": args.H,
        "slope_pass": bool(-hi <= args.H + 0.1 and -lo >= args.H - 0.1),
        "identity_defect_max": scan.meta["identity_defect_max"],
        "holder_slope_vs_log_eps": -scan.meta["holder_slope"],
        "holder_gamma": scan.meta["holder_gamma"],
    }
    params = dict(H=args.H, t=args.t, eps_list=args.eps_list, n_report=args.n_report,
                  replicas=args.replicas, seed=args.seed)
    _echo(args, "kinetic-scan", params)
    rows = list(zip(scan.eps_values, scan.values, scan.stderrs,
                    [scan.n_replicas] * len(scan.eps_values)))
    _emit_table(args, ["eps", "statistic", "stderr", "n"], rows, summary)
    return 0


def _cmd_homogenize(args) -> int:
    from scipy import stats as _stats

    G = _chaos_from_args(args)
    f = _F_PRESETS[args.f]
    h = _F_PRESETS[args.hfun]
    g = _G_PRESETS[args.gfun]
    g_bar = chaos.gaussian_expectation(g) if args.gfun != "zero" else 0.0
    n_steps = max(int(round(args.t / (args.eps / args.dt_ratio))), 1)
    cfg = solvers.MultiscaleConfig(
        f, h, G, g, args.H, args.eps, args.x0, TimeGrid(args.t, n_steps), args.seed,
    )
    endpoints = solvers.solve_slow_fast_endpoints(
        cfg, args.replicas, args.seed, threads=args.threads,
    )
    regime = chaos.classify_regime(G.hermite_rank, args.H)
    c = chaos.c_constant(G, args.H)
    limit = _limit_endpoint_samples(
        G, args.H, args.t, args.x0, f, h, g_bar, args.replicas, args.seed + 1,
    )
    ks = _stats.ks_2samp(endpoints, limit)
    summary = {
        "command": "homogenize",
        "regime": regime.kind.value,
        "c": c,
        "g_bar": g_bar,
        "ks_statistic": float(ks.statistic),
        "ks_pvalue": float(ks.pvalue),
        "pass": bool(ks.pvalue > 0.01),
        "endpoint_mean": harness.fsum_mean(endpoints),
        "endpoint_variance": harness.fsum_variance(endpoints),
    }
    params = dict(H=args.H, coeffs=args.coeffs, eps=args.eps, t=args.t, x0=args.x0,
                  f=args.f, hfun=args.hfun, gfun=args.gfun,
                  replicas=args.replicas, seed=args.seed, dt_ratio=args.dt_ratio)
    _echo(args, "homogenize", params)
    rows = [(r, v) for r, v in enumerate(endpoints)]
    _emit_table(args, ["replica", "endpoint"], rows, summary)
    return 0 if summary["pass"] else 2


def _limit_endpoint_samples(G, H, t, x0, f, h, g_bar, n, seed):
    """Samples of the limit-equation endpoint at time t.

    Uses the scalar chain rule: for the driver endpoint U (c W_t or
    c~ Z_t), the Young/Stratonovich solution with drift g_bar h is the
    flow of (f, g_bar h); with h = 0 it is the flow of f evaluated at U.
    For nonzero h the Heun/left-point limit solvers are used instead.
    """
    regime = chaos.classify_regime(G.hermite_rank, H)
    rng = stream(seed, "limit-endpoint")
    c = chaos.c_constant(G, H)
    if regime.kind is Regime.LONG_RANGE:
        m = G.hermite_rank
        spec = hermite.HermiteSpec(regime.h_star, m, 60.0 * t, 12000)
        grid = TimeGrid(t, 400)
        z = hermite.hermite_ensemble(grid, spec, seed, n, "limit-endpoint-z")[:, 0]
        u = np.sign(G.coefficients[m]) * c * z
    else:
        u = c * np.sqrt(t) * rng.standard_normal(n)
    if _is_zero_map(h):
        return solvers.flow_map_1d(f, x0, u)
    # general case: integrate the limit equation per replica
    grid = TimeGrid(t, 4000)
    out = np.empty(n)
    for r in range(n):
        W = np.concatenate([[0.0], np.cumsum(rng.standard_normal(grid.n_steps))]) * np.sqrt(grid.dt)
        from .paths import SamplePath

        path = SamplePath(grid, W)
        out[r] = solvers.solve_limit_stratonovich(x0, f, h, g_bar, c, path).values[-1]
    return out


def _is_zero_map(h) -> bool:
    probe = np.array([-1.7, 0.3, 2.9])
    return bool(np.all(np.asarray(h(probe)) == 0.0))


def _cmd_verify(args) -> int:
    from . import acceptance

    # the gate runs from the pinned suite seed unless explicitly overridden
    seed = acceptance.MASTER_SEED if args.seed is None else args.seed
    report = acceptance.run_all(suite=args.suite, seed=seed,
                                threads=args.threads)
    for res in report["criteria"]:
        status = "PASS" if res["passed"] else "FAIL"
        print(f"[{status}] criterion {res['number']:2d} {res['name']}"
              f" ({res['seconds']:.1f}s)")
    print(f"suite={args.suite} passed={report['passed']}"
          f" total={report['seconds']:.1f}s")
    if args.out:
        output.write_json(f"{args.out}.json", report)
        _echo(args, "verify", dict(suite=args.suite, seed=seed))
    return 0 if report["passed"] else 2


# ------------------------------------------------------------------ parser


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="foulim",
        description="Sampling and Monte Carlo verification for fractional "
                    "Ornstein-Uhlenbeck scaling limits",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed")
    common.add_argument("--replicas", type=int, default=1)
    common.add_argument("--out", type=str, default=None,
                        help="output path prefix (writes <out>.csv/.json/.config)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--config", type=str, default=None,
                        help="read parameters from a config echo file")
    common.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default ${THREADS_ENV} or 1)")

    sub = p.add_subparsers(dest="command")

    sp = sub.add_parser("sample-fbm", parents=[common])
    sp.add_argument("--H", type=float, required=True)
    sp.add_argument("--horizon", type=float, default=1.0)
    sp.add_argument("--n-steps", type=int, default=256)
    sp.set_defaults(func=_cmd_sample_fbm)

    sp = sub.add_parser("sample-fou", parents=[common])
    sp.add_argument("--H", type=float, required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--horizon", type=float, default=1.0)
    sp.add_argument("--n-steps", type=int, default=None)
    sp.set_defaults(func=_cmd_sample_fou)

    sp = sub.add_parser("rho", parents=[common])
    sp.add_argument("--H", type=float, required=True)
    sp.add_argument("--s-max", type=float, default=50.0)
    sp.add_argument("--n-points", type=int, default=101)
    sp.set_defaults(func=_cmd_rho)

    sp = sub.add_parser("chaos", parents=[common])
    sp.add_argument("--H", type=float, required=True)
    sp.add_argument("--coeffs", type=str, required=True,
                    help="comma-separated Hermite coefficients c_0,c_1,...")
    sp.add_argument("--eps", type=float, default=None)
    sp.set_defaults(func=_cmd_chaos)

    sp = sub.add_parser("constants", parents=[common])
    sp.add_argument("--H", type=float, required=True)
    sp.add_argument("--coeffs", type=str, required=True)
    sp.set_defaults(func=_cmd_constants)

    sp = sub.add_parser("hermite-sample", parents=[common])
    sp.add_argument("--H", type=float, required=True)
    sp.add_argument("--m", type=int, default=2)
    sp.add_argument("--xi-window", type=float, default=50.0)
    sp.add_argument("--n-xi", type=int, default=4000)
    sp.add_argument("--horizon", type=float, default=1.0)
    sp.add_argument("--n-steps", type=int, default=200)
    sp.set_defaults(func=_cmd_hermite_sample)

    sp = sub.add_parser("clt-scan", parents=[common])
    sp.add_argument("--H", type=float, required=True)
    sp.add_argument("--coeffs", type=str, required=True)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--eps-list", type=str, default="0.1,0.05,0.02")
    sp.add_argument("--dt-ratio", type=float, default=50.0)
    sp.set_defaults(func=_cmd_clt_scan)

    sp = sub.add_parser("l2-hermite", parents=[common])
    sp.add_argument("--H", type=float, required=True)
    sp.add_argument("--coeffs", type=str, required=True)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--eps-list", type=str, default="0.2,0.1,0.05")
    sp.set_defaults(func=_cmd_l2_hermite)

    sp = sub.add_parser("kinetic-scan", parents=[common])
    sp.add_argument("--H", type=float, required=True)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--eps-list", type=str, default="0.1,0.05,0.02,0.01")
    sp.add_argument("--n-report", type=int, default=50)
    sp.set_defaults(func=_cmd_kinetic_scan)

    sp = sub.add_parser("homogenize", parents=[common])
    sp.add_argument("--H", type=float, required=True)
    sp.add_argument("--coeffs", type=str, required=True)
    sp.add_argument("--eps", type=float, default=0.02)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--x0", type=float, default=0.0)
    sp.add_argument("--f", choices=sorted(_F_PRESETS), default="sin2")
    sp.add_argument("--hfun", choices=sorted(_F_PRESETS), default="zero")
    sp.add_argument("--gfun", choices=sorted(_G_PRESETS), default="zero")
    sp.add_argument("--dt-ratio", type=float, default=50.0)
    sp.set_defaults(func=_cmd_homogenize)

    sp = sub.add_parser("verify", parents=[common])
    sp.add_argument("--suite", choices=["quick", "full"], default="quick")
    sp.set_defaults(func=_cmd_verify, seed=None)

    return p


def _apply_config(argv: list[str]) -> list[str]:
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config requires a file argument")
    command, params = output.read_config(argv[i + 1])
    rest = argv[:i] + argv[i + 2 :]
    if rest and not rest[0].startswith("-"):
        if rest[0] != command:
            raise UsageError(
                f"config file is for {command!r} but {rest[0]!r} was requested"
            )
        rest = rest[1:]
    merged = [command]
    for key, val in params.items():
        opt = "--" + key.replace("_", "-")
        if opt not in rest:
            merged.extend([opt, val])
    merged.extend(rest)
    return merged


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        argv = _apply_config(argv)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return 0 if exc.code == 0 else 1
        if getattr(args, "command", None) is None:
            parser.print_help()
            return 1
        if args.threads is None:
            args.threads = _default_threads()
        if getattr(args, "n_steps", 0) is None and args.command == "sample-fou":
            args.n_steps = max(int(round(args.horizon / (args.eps / 50.0))), 1)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
