import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import optimize, stats

from rhoci.analytic import fisher_z_ci
from rhoci.core import DomainError, MethodFailure, MethodId
from rhoci.distributions import CovMatrix2, sample_bvnormal
from rhoci.harness import SimConfig, lookup, run_cell
from rhoci.likelihood import (
    ParamVector,
    _modified_std,
    _signed_lr_std,
    constrained_mle,
    fd_hessian,
    information_at_mean,
    loglik,
    loglik_moments,
    lr_bounds,
    lr_ci,
    mle,
    modified_signed_lr,
    signed_lr,
)
from rhoci.summary import dataset_with_r, suff_stats

GRID = np.linspace(-1 + 1e-10, 1 - 1e-10, 100_001)


@pytest.fixture
def data(gen):
    cov = CovMatrix2.from_params(1.5, 0.7, 0.55)
    return sample_bvnormal(gen, (1.0, -2.0), cov, 15)


def grid_roots(values):
    s = np.sign(values)
    idx = np.nonzero(s[:-1] * s[1:] <= 0)[0]
    return 0.5 * (GRID[idx] + GRID[idx + 1])


# ---------------------------------------------------------------- loglik
def test_loglik_factorizes_at_zero_rho(data):
    theta = ParamVector(0.3, -1.0, 1.2, 0.8, 0.0)
    ref = stats.norm.logpdf(data[:, 0], 0.3, 1.2).sum() + stats.norm.logpdf(data[:, 1], -1.0, 0.8).sum()
    assert loglik(theta, data) == pytest.approx(ref, abs=1e-10)


def test_loglik_matches_scipy_mvn(data):
    theta = ParamVector(0.3, -1.0, 1.2, 0.8, 0.4)
    cov = [[1.44, 0.4 * 1.2 * 0.8], [0.4 * 1.2 * 0.8, 0.64]]
    ref = stats.multivariate_normal([0.3, -1.0], cov).logpdf(data).sum()
    assert loglik(theta, data) == pytest.approx(ref, abs=1e-10)


def test_loglik_moments_agrees(data):
    st_ = suff_stats(data)
    theta = np.array([0.3, -1.0, 1.2, 0.8, 0.4])
    v = loglik_moments(theta, st_.n, st_.mean1, st_.mean2, st_.s1sq, st_.s2sq, st_.s12)
    assert v == pytest.approx(loglik(theta, data), abs=1e-9)


def test_loglik_rejects_bad_params(data):
    with pytest.raises(DomainError):
        loglik(ParamVector(0, 0, 1, 1, 1.0), data)
    with pytest.raises(DomainError):
        loglik(ParamVector(0, 0, -1, 1, 0.0), data)


def test_mle_matches_numeric_optimum(data):
    def neg(p):
        return -loglik(ParamVector(p[0], p[1], np.exp(p[2]), np.exp(p[3]), np.tanh(p[4])), data)

    res = optimize.minimize(neg, np.zeros(5), method="BFGS", options={"gtol": 1e-10})
    got = np.array([res.x[0], res.x[1], np.exp(res.x[2]), np.exp(res.x[3]), np.tanh(res.x[4])])
    assert got == pytest.approx(np.array(mle(data)), abs=1e-6)


def test_max_loglik_translation_invariant(data):
    shifted = data + np.array([10.0, -3.0])
    assert loglik(mle(shifted), shifted) == pytest.approx(loglik(mle(data), data), abs=1e-9)


# ---------------------------------------------------------------- constrained MLE
def test_constrained_at_r_is_mle(data):
    full = mle(data)
    con = constrained_mle(data, full.rho)
    assert np.array(con) == pytest.approx(np.array(full), abs=1e-6)


def test_constrained_below_unconstrained(data, gen):
    top = loglik(mle(data), data)
    for rho0 in gen.uniform(-0.99, 0.99, 100):
        assert loglik(constrained_mle(data, rho0), data) <= top + 1e-12


def test_constrained_vs_grid_search(data):
    rho0 = -0.2
    con = constrained_mle(data, rho0)
    s1 = np.linspace(0.5 * con.sigma1, 1.5 * con.sigma1, 200)
    s2 = np.linspace(0.5 * con.sigma2, 1.5 * con.sigma2, 200)
    S1, S2 = np.meshgrid(s1, s2, indexing="ij")
    st_ = suff_stats(data)
    p = np.stack(np.broadcast_arrays(st_.mean1, st_.mean2, S1, S2, rho0), axis=-1)
    grid_best = loglik_moments(p, st_.n, st_.mean1, st_.mean2, st_.s1sq, st_.s2sq, st_.s12).max()
    got = loglik(con, data)
    assert got >= grid_best - 1e-9
    assert got == pytest.approx(grid_best, abs=1e-3)


def test_constrained_rejects_edge(data):
    with pytest.raises(DomainError):
        constrained_mle(data, 1.0)


# ---------------------------------------------------------------- D
def test_d_zero_at_r(data):
    assert signed_lr(data, suff_stats(data).r) == pytest.approx(0.0, abs=1e-6)


def test_d_is_signed_root_of_loglik_drop(data):
    top = loglik(mle(data), data)
    for rho0 in (-0.8, 0.0, 0.3, 0.9):
        drop = 2 * (top - loglik(constrained_mle(data, rho0), data))
        d = signed_lr(data, rho0)
        assert d * d == pytest.approx(drop, rel=1e-10)
        assert np.sign(d) == np.sign(suff_stats(data).r - rho0)


def test_d_standardized_matches_raw(data):
    st_ = suff_stats(data)
    for rho0 in (-0.5, 0.2, 0.85):
        assert float(_signed_lr_std(st_.r, st_.n, rho0)) == pytest.approx(signed_lr(data, rho0), abs=1e-9)


@given(st.floats(-0.95, 0.95), st.integers(4, 60))
def test_d_strictly_decreasing(r, n):
    rho = np.linspace(-0.999, 0.999, 2001)
    d = _signed_lr_std(r, n, rho)
    assert np.all(np.diff(d) < 0)


def test_d_location_scale_invariant(data):
    moved = data * np.array([3.0, 0.2]) + np.array([-4.0, 7.0])
    for rho0 in (-0.3, 0.7):
        assert signed_lr(moved, rho0) == pytest.approx(signed_lr(data, rho0), abs=1e-9)
        assert modified_signed_lr(moved, rho0) == pytest.approx(modified_signed_lr(data, rho0), abs=1e-9)


# ---------------------------------------------------------------- information and D*
@pytest.mark.parametrize("params", [(0, 0, 1, 1, 0.4), (0, 0, 1.3, 0.9, -0.6), (0, 0, 0.7, 0.7, 0.1)])
def test_information_matches_finite_differences(params):
    n, r = 12, 0.35
    fun = lambda p: loglik_moments(p, n, 0.0, 0.0, 1.0, 1.0, r)
    fd = -fd_hessian(fun, np.array(params, float), list(range(5)))
    exact = information_at_mean(np.array(params, float), n, 1.0, 1.0, r)
    assert exact == pytest.approx(fd, rel=1e-5, abs=1e-4)


@given(st.floats(-0.9, 0.9), st.integers(5, 50))
def test_dstar_sign_matches_d(r, n):
    rho = np.linspace(-0.99, 0.99, 397)
    rho = rho[np.abs(rho - r) > 1e-3]
    d = _signed_lr_std(r, n, rho)
    ds = _modified_std(r, n, rho)
    ok = ~np.isnan(ds)
    assert ok.mean() > 0.95
    # next to r the O(n^-1/2) log correction dominates D; signs agree once |D| > 0.25
    far = ok & (np.abs(d) > 0.25)
    assert np.all(np.sign(ds[far]) == np.sign(d[far]))


@pytest.mark.parametrize("r,n", [(0.3, 10), (-0.7786, 16), (0.9, 6)])
def test_dstar_continuous(r, n):
    # the curve is steep but smooth at the edges; jumps are checked on a fine interior grid
    rho = np.linspace(-0.95, 0.95, 40_001)
    rho = rho[np.abs(rho - r) > 1e-3]
    ds = _modified_std(r, n, rho)
    assert not np.isnan(ds).any()
    for side in (rho < r, rho > r):
        assert np.max(np.abs(np.diff(ds[side]))) < 0.05


def test_dstar_singular_at_r(data):
    with pytest.raises(MethodFailure):
        modified_signed_lr(data, suff_stats(data).r)


# ---------------------------------------------------------------- intervals
def test_lr_close_to_fisher_at_large_n(gen):
    cov = CovMatrix2.from_params(1.0, 1.0, 0.5)
    x = sample_bvnormal(gen, (0.0, 0.0), cov, 200)
    lr = lr_ci(x)
    fz = fisher_z_ci(suff_stats(x).r, 200)
    assert lr.lower == pytest.approx(fz.lower, abs=0.01)
    assert lr.upper == pytest.approx(fz.upper, abs=0.01)


@pytest.mark.parametrize("modified", [False, True])
def test_symmetric_at_zero(modified):
    x = dataset_with_r(0.0, 20)
    ci = lr_ci(x, modified=modified)
    assert ci.lower == pytest.approx(-ci.upper, abs=1e-6)


@pytest.mark.parametrize("modified", [False, True])
@pytest.mark.parametrize("r,n", [(0.9755, 11), (-0.7786, 16), (0.2, 5)])
def test_roots_match_grid_scan(r, n, modified):
    b = lr_bounds(r, n, 0.05, modified)
    z = stats.norm.ppf(0.975)
    stat = _modified_std(r, n, GRID) if modified else _signed_lr_std(r, n, GRID)
    stat = np.where(np.abs(GRID - r) < 1e-3, np.sign(r - GRID) * 1e-9, stat) if modified else stat
    lower_roots = grid_roots(stat - z)
    upper_roots = grid_roots(stat + z)
    assert np.min(np.abs(lower_roots - b.lower[0])) <= 1e-5
    assert np.min(np.abs(upper_roots - b.upper[0])) <= 1e-5


@pytest.mark.xfail(strict=True, reason="published modified interval for Example 1 has upper end -0.450; "
                   "the invariant statistic at r=-0.7786, n=16 gives about -0.542")
def test_modified_table_example_interval():
    # Example 1 through its (r, n) standardization: the statistic is invariant
    ci = lr_ci(dataset_with_r(-0.7786, 16), modified=True)
    assert (ci.lower, ci.upper) == pytest.approx((-0.913, -0.450), abs=2e-3)


def test_lr_method_ids():
    x = dataset_with_r(0.4, 12)
    assert lr_ci(x).method == MethodId.SIGNED_LR
    assert lr_ci(x, modified=True).method == MethodId.MODIFIED_SIGNED_LR


def test_nested_in_alpha():
    r = np.linspace(-0.95, 0.95, 39)
    wide = lr_bounds(r, 10, 0.01, True)
    narrow = lr_bounds(r, 10, 0.1, True)
    assert np.all(wide.lower <= narrow.lower + 1e-9)
    assert np.all(wide.upper >= narrow.upper - 1e-9)


@pytest.mark.slow
def test_signed_lr_undercovers_at_n5():
    cfg = SimConfig(n_grid=(5,), rho_grid=(0.0,), reps=2000, methods=(MethodId.SIGNED_LR,))
    res = lookup(run_cell(cfg, ("normal", 5, 0.0)), 5, 0.0, MethodId.SIGNED_LR)
    assert res.coverage < 0.93


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="modified signed LR under-covers at n=10 (about 0.86); see acceptance criterion 9")
def test_modified_coverage_at_n10():
    cfg = SimConfig(n_grid=(10,), rho_grid=(0.5,), reps=2000, methods=(MethodId.MODIFIED_SIGNED_LR,))
    res = lookup(run_cell(cfg, ("normal", 10, 0.5)), 10, 0.5, MethodId.MODIFIED_SIGNED_LR)
    assert 0.93 <= res.coverage <= 0.97
