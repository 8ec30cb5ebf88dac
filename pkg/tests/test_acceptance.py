"""Acceptance gate: one test per release criterion, full pinned parameters.

Each test prints its pass/fail line (visible with `pytest -s` or on
failure) and asserts the criterion outcome.  The same checks back the
`foulim verify --suite full` command.

Known red: criterion 10 fails at its pinned scale eps = 0.02, where the
true endpoint-law KS distance sits at/above the 1% critical value for
N = 2e3 samples; its details carry the eps = 0.01 points (p = 0.24 and
0.77) showing the convergence itself.  The test states the contract
faithfully rather than loosening it.  Criterion 6's short-range branch
is likewise near-critical (true excess kurtosis ~0.3 at the pinned
eps = 0.005 against a 0.2 gate) and happens to pass under the pinned
master seed; both are discussed in the README's verification section.
"""

import os

import pytest

from foulim import acceptance

SEED = acceptance.MASTER_SEED
THREADS = max(1, int(os.environ.get("FOULIM_THREADS", "1")))

_ctx: dict = {}


def _report(res):
    status = "PASS" if res.passed else "FAIL"
    print(f"[{status}] criterion {res.number:2d} {res.name}: {res.details}")
    return res


def test_criterion_01_fbm_exactness():
    res = _report(acceptance.crit_1_fbm_exactness(SEED, "full", THREADS))
    assert res.passed, res.details


def test_criterion_02_fou_stationarity_decay():
    res = _report(acceptance.crit_2_fou_stationarity_decay(SEED, "full", THREADS))
    assert res.passed, res.details


def test_criterion_03_degenerate_constant():
    res = _report(acceptance.crit_3_degenerate_constant(SEED, "full", THREADS))
    assert res.passed, res.details


def test_criterion_04_scaling_regimes():
    res = _report(acceptance.crit_4_scaling_regimes(SEED, "full", THREADS))
    assert res.passed, res.details


def test_criterion_05_limit_covariance():
    res = _report(acceptance.crit_5_limit_covariance(SEED, "full", THREADS, ctx=_ctx))
    assert res.passed, res.details


def test_criterion_06_limit_kurtosis():
    res = _report(acceptance.crit_6_limit_kurtosis(SEED, "full", THREADS, ctx=_ctx))
    assert res.passed, res.details


def test_criterion_07_hermite_sampler():
    res = _report(acceptance.crit_7_hermite_sampler(SEED, "full", THREADS))
    assert res.passed, res.details


def test_criterion_08_l2_coupled():
    res = _report(acceptance.crit_8_l2_coupled(SEED, "full", THREADS))
    assert res.passed, res.details


def test_criterion_09_kinetic_rate():
    res = _report(acceptance.crit_9_kinetic_rate(SEED, "full", THREADS))
    assert res.passed, res.details


def test_criterion_10_homogenization():
    res = _report(acceptance.crit_10_homogenization(SEED, "full", THREADS))
    assert res.passed, res.details


def test_criterion_11_solver_oracles():
    res = _report(acceptance.crit_11_solver_oracles(SEED, "full", THREADS))
    assert res.passed, res.details


def test_criterion_12_determinism():
    res = _report(acceptance.crit_12_determinism(SEED, "full", THREADS))
    assert res.passed, res.details
