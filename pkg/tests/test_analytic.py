import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rhoci import analytic
from rhoci.analytic import (
    check_monotone,
    fisher_z_ci,
    haddad_provost_bounds,
    haddad_provost_ci,
    hotelling_bounds,
    hotelling_ci,
    hotelling_transform,
    jeyaratnam_bounds,
    jeyaratnam_ci,
    jeyaratnam_w,
    muddapur_f_bounds,
    muddapur_t_bounds,
    muddapur_t_ci,
    ruben_bounds,
    ruben_ci,
    ruben_statistic,
    withers_nadarajah_ci,
    wn_bounds,
    wn_corrected_quantile,
)
from rhoci.core import DomainError, MethodId, NotApplicableError
from rhoci.distributions import f_quantile, std_normal_quantile, t_quantile
from rhoci.summary import stats_from_r, suff_stats

GRID = np.linspace(-1 + 1e-10, 1 - 1e-10, 100_001)
Z975 = 1.959963984540054

rs = st.floats(-0.995, 0.995)
ns = st.integers(4, 80)


def grid_roots(values):
    """Midpoints of the grid cells where ``values`` changes sign."""
    s = np.sign(values)
    idx = np.nonzero(s[:-1] * s[1:] <= 0)[0]
    return 0.5 * (GRID[idx] + GRID[idx + 1])


def assert_on_grid(root, values, tol=1e-5):
    roots = grid_roots(values)
    assert roots.size > 0
    assert np.min(np.abs(roots - root)) <= tol


def lohi(b):
    return float(b.lower[0]), float(b.upper[0])


# ---------------------------------------------------------------- Fisher z
def test_fisher_table_values():
    ci = fisher_z_ci(0.9755, 11)
    assert (ci.lower, ci.upper) == pytest.approx((0.905, 0.994), abs=1e-3)
    ci = fisher_z_ci(0.9738, 11)
    assert (ci.lower, ci.upper) == pytest.approx((0.899, 0.993), abs=1e-3)
    ci = fisher_z_ci(-0.7786, 16)
    assert (ci.lower, ci.upper) == pytest.approx((-0.919, -0.461), abs=1e-3)


def test_fisher_symmetric_value():
    # tanh(1.959964 / 3)
    ci = fisher_z_ci(0.0, 12)
    assert ci.upper == pytest.approx(0.573901, abs=1e-6)
    assert ci.lower == -ci.upper


def test_fisher_not_applicable_at_three():
    with pytest.raises(NotApplicableError):
        fisher_z_ci(0.2, 3)


# ---------------------------------------------------------------- Hotelling
def test_hotelling_table_value():
    ci = hotelling_ci(0.9755, 11, variant=3)
    assert (ci.lower, ci.upper) == pytest.approx((0.909, 0.994), abs=1e-3)


@pytest.mark.parametrize("variant", [1, 2, 3, 4])
@pytest.mark.parametrize("n", [3, 5, 12, 40])
def test_hotelling_symmetric_at_zero(variant, n):
    ci = hotelling_ci(0.0, n, variant=variant)
    assert ci.lower == pytest.approx(-ci.upper, abs=1e-9)


@pytest.mark.parametrize("variant", [1, 2, 3, 4])
@pytest.mark.parametrize("r,n", [(0.9755, 11), (-0.3, 6), (0.5, 25)])
def test_hotelling_grid_scan(variant, r, n):
    lo, hi = lohi(hotelling_bounds(np.array([r]), n, 0.05, variant))
    zi = hotelling_transform(np.arctanh(r), r, n, variant)
    g = hotelling_transform(np.arctanh(GRID), GRID, n, variant)
    half = Z975 / math.sqrt(n - 1)
    assert_on_grid(lo, g - (zi - half))
    assert_on_grid(hi, g - (zi + half))


def test_hotelling_bad_variant():
    with pytest.raises(DomainError):
        hotelling_transform(0.1, 0.1, 10, 5)


# ---------------------------------------------------------------- Ruben
def test_ruben_table_value():
    ci = ruben_ci(0.9755, 11)
    assert (ci.lower, ci.upper) == pytest.approx((0.888, 0.993), abs=1e-3)


@pytest.mark.parametrize("n", [4, 7, 30])
def test_ruben_symmetric(n):
    ci = ruben_ci(0.0, n)
    assert ci.lower == pytest.approx(-ci.upper, abs=1e-12)


@pytest.mark.parametrize("r,n", [(0.9755, 11), (-0.6, 8), (0.1, 30)])
def test_ruben_grid_scan(r, n):
    lo, hi = lohi(ruben_bounds(np.array([r]), n, 0.05))
    vals = np.abs(ruben_statistic(r, GRID, n)) - Z975
    assert_on_grid(lo, vals)
    assert_on_grid(hi, vals)


# ---------------------------------------------------------------- Muddapur 1
def _muddapur_quadratic(r, b, n, rho, alpha=0.05):
    t = t_quantile(1 - alpha / 2, n - 2)
    return (n - 2) * (r - rho * b) ** 2 - t * t * (1 - rho**2) * (1 - r * r)


def test_muddapur_t_symmetric():
    lo, hi = lohi(muddapur_t_bounds(np.array([0.0]), np.array([1.0]), 10, 0.05))
    assert lo == pytest.approx(-hi, abs=1e-12)


@pytest.mark.parametrize("r,b,n", [(0.9755, 1.0, 11), (0.4, 1.7, 9), (-0.2, 1.2, 20)])
def test_muddapur_t_grid_scan(r, b, n):
    lo, hi = lohi(muddapur_t_bounds(np.array([r]), np.array([b]), n, 0.05))
    vals = _muddapur_quadratic(r, b, n, GRID)
    assert_on_grid(lo, vals)
    assert_on_grid(hi, vals)


def test_muddapur_t_reduces_to_samiuddin():
    r, n = 0.45, 14
    lo, hi = lohi(muddapur_t_bounds(np.array([r]), np.array([1.0]), n, 0.05))
    t = t_quantile(0.975, n - 2)
    sam = np.sqrt(n - 2) * (r - GRID) / np.sqrt((1 - r * r) * (1 - GRID**2))
    assert_on_grid(lo, sam - t)
    assert_on_grid(hi, sam + t)


@pytest.mark.parametrize("b", [1.0, 3.0, 30.0])
def test_muddapur_t_vieta(b):
    r, n = 0.6, 12
    lo, hi = lohi(muddapur_t_bounds(np.array([r]), np.array([b]), n, 0.05))
    t = t_quantile(0.975, n - 2)
    mid = (n - 2) * r * b / ((n - 2) * b * b + t * t * (1 - r * r))
    assert 0.5 * (lo + hi) == pytest.approx(mid, abs=1e-12)


def test_muddapur_t_from_stats():
    data = np.array([[1.0, 2.0], [2.0, 2.5], [3.0, 4.5], [4.0, 4.0], [5.0, 6.5]])
    ci = muddapur_t_ci(suff_stats(data))
    assert ci.method is MethodId.MUDDAPUR1 and -1 <= ci.lower < ci.upper <= 1


# ---------------------------------------------------------------- Jeyaratnam / Muddapur 2
def test_jeyaratnam_table_value():
    ci = jeyaratnam_ci(0.9755, 11)
    assert (ci.lower, ci.upper) == pytest.approx((0.905, 0.993), abs=1e-3)


def test_jeyaratnam_at_zero():
    w = jeyaratnam_w(10, 0.05)
    ci = jeyaratnam_ci(0.0, 10)
    assert (ci.lower, ci.upper) == pytest.approx((-w, w), abs=1e-15)


def test_jeyaratnam_equals_f_form(gen):
    for _ in range(100):
        r = gen.uniform(-0.999, 0.999)
        n = int(gen.integers(3, 200))
        a = jeyaratnam_bounds(np.array([r]), n, 0.05)
        b = muddapur_f_bounds(np.array([r]), n, 0.05)
        assert lohi(a) == pytest.approx(lohi(b), abs=1e-10)


# ---------------------------------------------------------------- Haddad-Provost
def test_haddad_provost_symmetric():
    ci = haddad_provost_ci(stats_from_r(0.0, 9))
    assert ci.lower == pytest.approx(-ci.upper, abs=1e-12)


def test_haddad_provost_closed_form(gen):
    for _ in range(50):
        n = int(gen.integers(3, 60))
        data = gen.standard_normal((n, 2)) @ np.array([[1.0, 0.5], [0.0, 2.0]])
        s = suff_stats(data)
        lo, hi = lohi(haddad_provost_bounds(np.array([s.dplus]), np.array([s.dminus]), n, 0.05))
        ends = []
        for p in (0.025, 0.975):  # upper quantiles F*_{alpha/2}, F*_{1-alpha/2}
            f = f_quantile(1 - p, n - 1, n - 1)
            ends.append(((1 + s.r) - (1 - s.r) * f) / ((1 + s.r) + (1 - s.r) * f))
        assert (lo, hi) == pytest.approx(tuple(sorted(ends)), abs=1e-10)


# ---------------------------------------------------------------- Withers-Nadarajah
@pytest.mark.parametrize("n", [5, 16, 40])
def test_wn1_at_zero_is_fisher_like(n):
    c = math.tanh(Z975 / math.sqrt(n))
    # g1 vanishes at rho = 0 exactly when it is evaluated at the estimate
    ci = withers_nadarajah_ci(0.0, n, order=1, plug_in=True)
    assert (ci.lower, ci.upper) == pytest.approx((-c, c), abs=1e-9)
    # at the hypothesized rho, g1(endpoint) != 0 shrinks the interval slightly
    ci = withers_nadarajah_ci(0.0, n, order=1)
    assert ci.lower == pytest.approx(-ci.upper, abs=1e-12)
    assert 0 < c - ci.upper < 0.05


@pytest.mark.parametrize("order", [1, 2])
@pytest.mark.parametrize("r,n", [(0.9755, 11), (-0.5, 7), (0.2, 30)])
def test_wn_grid_scan(order, r, n):
    lo, hi = lohi(wn_bounds(np.array([r]), n, 0.05, order))
    theta = np.arctanh(r)
    for root, p in ((lo, 0.975), (hi, 0.025)):
        x = std_normal_quantile(p)
        vals = theta - np.arctanh(GRID) - wn_corrected_quantile(x, GRID, n, order) / math.sqrt(n)
        assert_on_grid(root, vals)


def test_wn_plug_in_differs():
    a = withers_nadarajah_ci(0.7, 10, order=2)
    b = withers_nadarajah_ci(0.7, 10, order=2, plug_in=True)
    assert a.lower != b.lower


def test_wn_bad_order():
    with pytest.raises(DomainError):
        wn_bounds(np.array([0.1]), 10, 0.05, 3)


# ---------------------------------------------------------------- properties
def test_startup_monotonicity():
    assert check_monotone() == []


R_ONLY = {
    "FisherZ": lambda r, n, a: analytic.fisher_z_bounds(r, n, a),
    "Hotelling1": lambda r, n, a: hotelling_bounds(r, n, a, 1),
    "Hotelling2": lambda r, n, a: hotelling_bounds(r, n, a, 2),
    "Hotelling3": lambda r, n, a: hotelling_bounds(r, n, a, 3),
    "Hotelling4": lambda r, n, a: hotelling_bounds(r, n, a, 4),
    "Ruben": lambda r, n, a: ruben_bounds(r, n, a),
    "Muddapur2": lambda r, n, a: jeyaratnam_bounds(r, n, a),
    "WN1": lambda r, n, a: wn_bounds(r, n, a, 1),
    "WN2": lambda r, n, a: wn_bounds(r, n, a, 2),
    "HaddadProvost": lambda r, n, a: haddad_provost_bounds(2 * n * (1 + r), 2 * n * (1 - r), n, a),
    "Muddapur1": lambda r, n, a: muddapur_t_bounds(r, np.full(np.shape(r), 1.3), n, a),
}


@pytest.mark.parametrize("name", sorted(R_ONLY))
@given(r=rs, n=ns)
def test_sign_equivariance(name, r, n):
    fn = R_ONLY[name]
    pos = fn(np.array([r]), n, 0.05)
    neg = fn(np.array([-r]), n, 0.05)
    assert np.isnan(pos.lower[0]) == np.isnan(neg.lower[0])
    if not np.isnan(pos.lower[0]):
        assert float(neg.lower[0]) == pytest.approx(-float(pos.upper[0]), abs=1e-9)
        assert float(neg.upper[0]) == pytest.approx(-float(pos.lower[0]), abs=1e-9)


@pytest.mark.parametrize("name", sorted(R_ONLY))
@given(r=rs, n=ns)
def test_alpha_nesting(name, r, n):
    fn = R_ONLY[name]
    bs = [fn(np.array([r]), n, a) for a in (0.01, 0.05, 0.10)]
    if any(np.isnan(b.lower[0]) for b in bs):
        return
    for wide, narrow in zip(bs, bs[1:]):
        assert wide.lower[0] <= narrow.lower[0] + 1e-12
        assert wide.upper[0] >= narrow.upper[0] - 1e-12
    for b in bs:
        assert -1.0 <= b.lower[0] <= b.upper[0] <= 1.0


def test_degenerate_at_one():
    for name, fn in R_ONLY.items():
        if name in ("HaddadProvost", "Muddapur2", "Muddapur1"):
            continue
        b = fn(np.array([1.0, -1.0]), 10, 0.05)
        assert list(b.lower) == [1.0, -1.0] and list(b.upper) == [1.0, -1.0]
        assert b.clamped_lower.all() and b.clamped_upper.all()
