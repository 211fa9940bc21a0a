import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdspde.estimate import (
    DataError,
    InteriorMarginError,
    estimate_alpha,
    estimate_sigma_point,
    estimate_sigma_pooled,
    log_linear_fit,
    quarticity,
    realized_volatilities,
    realized_volatility,
    scheme_checks,
    separation_statistic,
    thin_time_grid,
    validate_scheme,
)
from mdspde.model import S3, FieldSample, ModelParams, rescaling_constant_K
from mdspde.numerics import FullRankViolation, RngStream
from mdspde.simulate import ReplacementSettings, build_cache, simulate_replacement

P = ModelParams(2, 0.0, (6.0, 0.0), 1.0, 1.0, 0.4)


def random_field(n=40, pts=((0.2, 0.3), (0.5, 0.5), (0.7, 0.1)), seed=0, params=P):
    vals = np.cumsum(RngStream(seed, 0).normal((n + 1, len(pts))), axis=0)
    return FieldSample(vals, np.array(pts), params)


def test_realized_volatility_examples():
    pts = np.array([[0.5, 0.5], [0.3, 0.3]])
    s = FieldSample(np.array([[0.0, 2.0], [1.0, 2.0], [0.0, 2.0], [1.0, 2.0]]), pts, P)
    assert realized_volatility(s, 0) == 3.0
    assert realized_volatility(s, 1) == 0.0
    np.testing.assert_array_equal(realized_volatilities(s), [3.0, 0.0])


def test_sigma_point_formula_and_scaling():
    s = random_field()
    rep = estimate_sigma_point(s, 1)
    K = rescaling_constant_K(P)
    want = realized_volatility(s, 1) * math.exp(6 * 0.5) / (s.n * s.Delta**0.4 * K)
    assert abs(rep["sigma2"] / want - 1) < 1e-14
    assert abs(estimate_sigma_point(s.scaled(3.0), 1)["sigma2"] / rep["sigma2"] - 9) < 1e-12
    zero = FieldSample(np.zeros((11, 1)), [[0.5, 0.5]], P)
    assert estimate_sigma_pooled(zero)["sigma2"] == 0.0


def test_pooled_is_mean_of_pointwise():
    s = random_field()
    pooled = estimate_sigma_pooled(s, delta=0.05)["sigma2"]
    points = [estimate_sigma_point(s, j)["sigma2"] for j in range(s.m)]
    assert abs(pooled - np.mean(points)) < 1e-14 * abs(pooled)
    single = s.select([2])
    assert estimate_sigma_pooled(single)["sigma2"] == estimate_sigma_point(s, 2)["sigma2"]


def test_pooled_report_contents():
    s = random_field()
    rep = estimate_sigma_pooled(s, delta=0.05)
    assert rep.ci_lower[0] <= rep.estimate[0] <= rep.ci_upper[0]
    assert rep.se[0] >= 0
    assert rep.assumed["alpha_prime"]["source"] == "sample metadata"
    rep2 = estimate_sigma_pooled(s, alpha_prime=0.5, delta=0.05)
    assert rep2.assumed["alpha_prime"]["value"] == 0.5
    assert rep2.estimate[0] != rep.estimate[0]


def test_interior_margin_enforced():
    s = random_field(pts=((0.02, 0.5), (0.5, 0.5), (0.7, 0.1)))
    with pytest.raises(InteriorMarginError):
        estimate_sigma_pooled(s, delta=0.05)


def test_quarticity_scaling_and_zero():
    s = random_field()
    q = quarticity(s)
    assert q > 0
    assert abs(quarticity(s.scaled(2.0)) / q - 16) < 1e-12
    assert quarticity(FieldSample(np.zeros((5, 1)), [[0.5, 0.5]], P)) == 0.0


def _field_with_rv(rv, n, pts):
    # alternating increments of size sqrt(rv/n) give exactly the requested realized volatility
    signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    inc = np.outer(signs, np.sqrt(np.asarray(rv) / n))
    vals = np.vstack([np.zeros(len(rv)), np.cumsum(inc, axis=0)])
    return FieldSample(vals, np.asarray(pts, dtype=float), P)


def test_log_linear_exact_recovery():
    n, a = 1000, 0.4
    rng = np.random.default_rng(2)
    pts = rng.uniform(0.1, 0.9, size=(12, 2))
    sigma0_sq, kappa = 1.7, np.array([6.0, -0.5])
    K1 = rescaling_constant_K(d=2, eta=1.0, alpha_prime=a)
    rv = n * (1 / n) ** a * sigma0_sq * K1 * np.exp(-pts @ kappa)
    psi, nat = log_linear_fit(_field_with_rv(rv, n, pts), alpha_prime=a, delta=0.05)
    np.testing.assert_allclose(nat.estimate, [sigma0_sq, 6.0, -0.5], rtol=1e-9, atol=1e-9)
    assert np.max(np.abs(psi.diagnostics["residuals"])) < 1e-9


def test_log_linear_interpolates_with_d_plus_one_points():
    s = random_field(pts=S3)
    psi, nat = log_linear_fit(s, delta=0.05)
    assert np.max(np.abs(psi.diagnostics["residuals"])) < 1e-12
    assert nat.components == ["sigma0_sq", "kappa1", "kappa2"]
    assert psi.diagnostics["full_rank"]


def test_log_linear_errors():
    with pytest.raises(FullRankViolation):
        log_linear_fit(random_field(pts=((0.2, 0.3), (0.5, 0.5))), delta=0.05)
    with pytest.raises(FullRankViolation):
        log_linear_fit(random_field(pts=((0.2, 0.2), (0.4, 0.4), (0.6, 0.6))), delta=0.05)
    s = random_field(pts=S3)
    vals = s.values.copy()
    vals[:, 1] = 0.3
    with pytest.raises(DataError):
        log_linear_fit(FieldSample(vals, s.points, P), delta=0.05)


def test_log_linear_warns_below_minimum_n():
    with pytest.warns(RuntimeWarning, match="log-linear"):
        log_linear_fit(random_field(pts=S3), delta=0.05)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), half=st.integers(1, 60))
def test_thinning_identity(seed, half):
    vals = RngStream(seed, 0).normal((2 * half + 1, 2))
    s = FieldSample(vals, [[0.3, 0.3], [0.6, 0.4]], P)
    fine = np.diff(s.values, axis=0)
    coarse = thin_time_grid(s)
    assert coarse.n == half
    np.testing.assert_allclose(np.diff(coarse.values, axis=0), fine[0::2] + fine[1::2], rtol=0, atol=1e-12)
    cross = 2 * np.sum(fine[1::2] * fine[0::2], axis=0)
    np.testing.assert_allclose(realized_volatilities(coarse), realized_volatilities(s) + cross, rtol=1e-12, atol=1e-12)


def test_thinning_twice_and_odd():
    s = random_field(n=40)
    assert thin_time_grid(thin_time_grid(s)).n == 10
    with pytest.raises(ValueError):
        thin_time_grid(random_field(n=41))


def test_alpha_exact_toy():
    # fine increments (1, t) repeated: RV_fine = n/2 (1 + t^2), RV_coarse = n/2 (1 + t)^2
    a = 0.37
    # solve (1+t)^2 / (1+t^2) = 2^(a-1), a root in (-1, 0)
    c = 2 ** (a - 1)
    t = (-2 + math.sqrt(4 - 4 * (1 - c) ** 2)) / (2 * (1 - c))
    n = 200
    inc = np.tile([1.0, t], n // 2)
    vals = np.concatenate([[0.0], np.cumsum(inc)])[:, None]
    s = FieldSample(vals, [[0.5, 0.5]], P)
    rep = estimate_alpha(s, delta=0.05)
    assert abs(rep["alpha_prime"] - a) < 1e-12


def test_alpha_scale_invariance_and_report():
    s = random_field(n=400, seed=4)
    rep = estimate_alpha(s, delta=0.05)
    for c in (1e-3, -2.5, 7.0):
        assert abs(estimate_alpha(s.scaled(c), delta=0.05)["alpha_prime"] - rep["alpha_prime"]) < 1e-12
    assert rep.diagnostics["n"] == 200


def test_alpha_data_error():
    with pytest.raises(DataError):
        estimate_alpha(FieldSample(np.ones((11, 1)), [[0.5, 0.5]], P))


def test_scheme_checks():
    c = scheme_checks(10**4, np.array(S3), 0.4)
    assert abs(c["m_bound"] - 10 ** (4 * 0.6 / 4)) < 1e-12
    assert round(c["m_bound"], 2) == 3.98
    assert c["m_within_bound"]
    c = scheme_checks(10**4, np.array(S3), 0.6)
    assert round(c["m_bound"], 2) == 2.51
    assert not c["m_within_bound"]
    assert c["full_rank"]
    dup = np.array([[0.2, 0.3], [0.2, 0.3], [0.5, 0.5]])
    c = scheme_checks(100, dup, 0.4)
    assert c["separation"] == 0.0 and c["separation_degenerate"] and not c["full_rank"]
    assert separation_statistic([[0.1, 0.1], [0.1, 0.4], [0.5, 0.9]]) == pytest.approx(0.9, abs=1e-15)
    assert validate_scheme(random_field(pts=S3), 0.4)["n_below_minimum"]


def _interior_grid(M=10, delta=0.05):
    g = np.arange(1, M) / M
    g = g[(g >= delta) & (g <= 1 - delta)]
    X, Y = np.meshgrid(g, g, indexing="ij")
    return np.column_stack([X.ravel(), Y.ravel()])


@pytest.mark.slow
@pytest.mark.filterwarnings("ignore:n=.* does not exceed")
def test_errors_shrink_with_n():
    s = ReplacementSettings(10, 6, 500)
    cache = build_cache(P, s)
    pts = _interior_grid()
    med = {}
    for n in (1000, 4000, 16000):
        errs = {"sigma2": [], "kappa1": [], "alpha": []}
        for r in range(100):
            f = simulate_replacement(P, n, s, cache, RngStream(900 + n, r)).at_points(pts)
            errs["sigma2"].append(abs(estimate_sigma_pooled(f, delta=0.05)["sigma2"] - 1))
            errs["kappa1"].append(abs(log_linear_fit(f, delta=0.05)[1]["kappa1"] - 6))
            errs["alpha"].append(abs(estimate_alpha(f, delta=0.05)["alpha_prime"] - 0.4))
        med[n] = {k: float(np.median(v)) for k, v in errs.items()}
    for k in ("sigma2", "kappa1", "alpha"):
        assert med[1000][k] > med[4000][k] > med[16000][k], (k, med)


@pytest.mark.slow
def test_quarticity_ci_coverage_n1e4():
    # single central point: the setting least affected by the finite-n bias of the pooled estimator
    s = ReplacementSettings(10, 6, 500)
    cache = build_cache(P, s)
    hits = 0
    R = 500
    for r in range(R):
        f = simulate_replacement(P, 10**4, s, cache, RngStream(4242, r)).at_points([[0.5, 0.5]])
        rep = estimate_sigma_pooled(f, delta=0.05)
        hits += rep.ci_lower[0] <= 1.0 <= rep.ci_upper[0]
    assert 0.90 <= hits / R <= 0.99, hits / R
