"""Estimators built on realized volatilities of temporal increments.

Known-parameter plumbing: every estimator takes the values it treats as known
as keyword arguments and falls back to ``sample.params`` otherwise. The report
records which values were used and where they came from.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .model import (
    FieldSample,
    alpha_variance_constant,
    asymptotic_sigma_matrix,
    rescaling_constant_K,
    upsilon,
)
from .numerics import FullRankViolation, design_matrix, matrix_rank_ok, normal_quantile, ols_solve

__all__ = [
    "DataError",
    "InteriorMarginError",
    "EstimationReport",
    "realized_volatility",
    "realized_volatilities",
    "estimate_sigma_point",
    "estimate_sigma_pooled",
    "quarticity",
    "log_linear_fit",
    "thin_time_grid",
    "estimate_alpha",
    "validate_scheme",
    "scheme_checks",
    "separation_statistic",
]


class DataError(ValueError):
    """Observations cannot be used, e.g. a realized volatility is not positive."""


class InteriorMarginError(ValueError):
    pass


@dataclass
class EstimationReport:
    name: str
    estimate: np.ndarray
    asymptotic_variance: np.ndarray
    se: np.ndarray
    ci_lower: np.ndarray
    ci_upper: np.ndarray
    level: float
    components: list[str]
    diagnostics: dict[str, Any] = field(default_factory=dict)
    assumed: dict[str, Any] = field(default_factory=dict)

    def __getitem__(self, component: str) -> float:
        return float(self.estimate[self.components.index(component)])

    def to_dict(self) -> dict[str, Any]:
        def plain(v):
            if isinstance(v, np.ndarray):
                return v.tolist()
            if isinstance(v, (np.floating, np.integer, np.bool_)):
                return v.item()
            if isinstance(v, dict):
                return {k: plain(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [plain(x) for x in v]
            return v

        return {
            "estimator": self.name,
            "components": self.components,
            "estimate": plain(self.estimate),
            "asymptotic_variance": plain(self.asymptotic_variance),
            "se": plain(self.se),
            "ci_lower": plain(self.ci_lower),
            "ci_upper": plain(self.ci_upper),
            "level": self.level,
            "diagnostics": plain(self.diagnostics),
            "assumed": plain(self.assumed),
        }


def _known(sample: FieldSample, name: str, value, assumed: dict[str, Any]):
    if value is not None:
        assumed[name] = {"value": np.asarray(value).tolist(), "source": "supplied"}
        return value
    if sample.params is None:
        raise ValueError(f"{name} must be supplied: the sample carries no model parameters")
    value = {"eta": sample.params.eta, "kappa": sample.params.kappa, "alpha_prime": sample.params.alpha_prime}[name]
    assumed[name] = {"value": np.asarray(value).tolist(), "source": "sample metadata"}
    return value


def _check_interior(sample: FieldSample, delta: float | None) -> None:
    if delta is None:
        return
    eps = 1e-12
    if np.any(sample.points < delta - eps) or np.any(sample.points > 1 - delta + eps):
        raise InteriorMarginError(f"all estimation points must lie in [delta, 1-delta]^d for delta={delta}")


def _ci(est: np.ndarray, var: np.ndarray, scale: float, level: float):
    se = np.sqrt(np.maximum(var, 0.0) / scale)
    z = normal_quantile(0.5 + level / 2)
    return se, est - z * se, est + z * se


def realized_volatilities(sample: FieldSample) -> np.ndarray:
    """Sum of squared temporal increments at every spatial point."""
    inc = np.diff(sample.values, axis=0)
    return np.einsum("ij,ij->j", inc, inc)


def realized_volatility(sample: FieldSample, y_index: int) -> float:
    inc = np.diff(sample.values[:, y_index])
    return float(inc @ inc)


def _sigma_point_values(sample: FieldSample, eta, kappa, alpha_prime) -> np.ndarray:
    K = rescaling_constant_K(d=sample.d, eta=eta, alpha_prime=alpha_prime)
    n = sample.n
    tilt = np.exp(sample.points @ np.asarray(kappa, dtype=float))
    return realized_volatilities(sample) * tilt / (n * sample.Delta**alpha_prime * K)


def estimate_sigma_pooled(sample: FieldSample, *, eta: float | None = None, kappa=None,
                          alpha_prime: float | None = None, delta: float | None = None,
                          level: float = 0.95, series_tol: float = 1e-10,
                          alpha_plug_in: bool = False) -> EstimationReport:
    """Volatility estimate averaged over all points of ``sample``.

    ``sigma^2_hat = (n m Delta^a' K)^-1 sum_j sum_i (Delta_i X)^2(y_j) exp(kappa.y_j)``.
    The interval uses the limit variance ``Upsilon sigma^4 / (n m)`` with the
    quarticity estimate in place of ``sigma^4``.
    """
    _check_interior(sample, delta)
    assumed: dict[str, Any] = {}
    eta = _known(sample, "eta", eta, assumed)
    kappa = _known(sample, "kappa", kappa, assumed)
    alpha_prime = _known(sample, "alpha_prime", alpha_prime, assumed)
    if alpha_plug_in:
        assumed["alpha_prime"]["source"] = "plug-in estimate"
    per_point = _sigma_point_values(sample, eta, kappa, alpha_prime)
    est = float(np.mean(per_point))
    q = _quarticity_value(sample, eta, kappa, alpha_prime)
    ups = upsilon(alpha_prime, series_tol)
    var = np.array([ups * q])
    nm = sample.n * sample.m
    se, lo, hi = _ci(np.array([est]), var, nm, level)
    diag = {"n": sample.n, "m": sample.m, "upsilon": ups,
            "K": rescaling_constant_K(d=sample.d, eta=eta, alpha_prime=alpha_prime), "quarticity": q,
            "alpha_plug_in": alpha_plug_in}
    return EstimationReport("sigma2_pooled", np.array([est]), var, se, lo, hi, level, ["sigma2"], diag, assumed)


def estimate_sigma_point(sample: FieldSample, y_index: int, **kwargs) -> EstimationReport:
    """Volatility estimate from the single point ``sample.points[y_index]``."""
    rep = estimate_sigma_pooled(sample.select([y_index]), **kwargs)
    rep.name = "sigma2_point"
    rep.diagnostics["y"] = sample.points[y_index].tolist()
    return rep


def _quarticity_value(sample: FieldSample, eta, kappa, alpha_prime) -> float:
    K = rescaling_constant_K(d=sample.d, eta=eta, alpha_prime=alpha_prime)
    inc = np.diff(sample.values, axis=0)
    tilt2 = np.exp(2 * (sample.points @ np.asarray(kappa, dtype=float)))
    s4 = np.sum(inc**4, axis=0) @ tilt2
    return float(s4 / (K**2 * 3 * sample.m * sample.n * sample.Delta ** (2 * alpha_prime)))


def quarticity(sample: FieldSample, *, eta: float | None = None, kappa=None,
               alpha_prime: float | None = None, delta: float | None = None) -> float:
    """Consistent estimate of ``sigma^4`` from fourth powers of increments."""
    _check_interior(sample, delta)
    assumed: dict[str, Any] = {}
    eta = _known(sample, "eta", eta, assumed)
    kappa = _known(sample, "kappa", kappa, assumed)
    alpha_prime = _known(sample, "alpha_prime", alpha_prime, assumed)
    return _quarticity_value(sample, eta, kappa, alpha_prime)


def log_linear_fit(sample: FieldSample, *, alpha_prime: float | None = None, delta: float,
                   level: float = 0.95, series_tol: float = 1e-10,
                   alpha_plug_in: bool = False) -> tuple[EstimationReport, EstimationReport]:
    """OLS of ``log(RV(y_j) / (n Delta^a'))`` on ``(1, y_j)``.

    Returns the report for ``Psi = (log(sigma0^2 K1), -kappa_1, ..., -kappa_d)``
    and for the natural parameters ``(sigma0^2, kappa_1, ..., kappa_d)``. Here
    ``K1`` is the rescaling constant at ``eta = 1``: the intercept identifies
    ``sigma^2 K = sigma0^2 K1`` and nothing about ``eta`` separately.
    """
    _check_interior(sample, delta)
    assumed: dict[str, Any] = {}
    alpha_prime = _known(sample, "alpha_prime", alpha_prime, assumed)
    if alpha_plug_in:
        assumed["alpha_prime"]["source"] = "plug-in estimate"
    d, n, m = sample.d, sample.n, sample.m
    if m < d + 1:
        raise FullRankViolation(f"need at least d+1={d + 1} spatial points, got {m}")
    rv = realized_volatilities(sample)
    if np.any(rv <= 0):
        raise DataError("log-linear fit needs strictly positive realized volatilities")
    X = design_matrix(sample.points)
    Y = np.log(rv / (n * sample.Delta**alpha_prime))
    psi = ols_solve(X, Y)
    K1 = rescaling_constant_K(d=d, eta=1.0, alpha_prime=alpha_prime)
    ups = upsilon(alpha_prime, series_tol)
    sig = asymptotic_sigma_matrix(sample.points, delta)
    sig_inv = np.linalg.inv(sig)
    cov_psi = ups * (1 - 2 * delta) * sig_inv
    nu_hat = np.concatenate([[math.exp(psi[0]) / K1], -psi[1:]])
    J = np.diag(np.concatenate([[nu_hat[0]], -np.ones(d)]))
    cov_nu = ups * (1 - 2 * delta) * J @ sig_inv @ J
    checks = validate_scheme(sample, alpha_prime)
    diag = {"n": n, "m": m, "upsilon": ups, "K1": K1, "residuals": (Y - X @ psi), **checks}
    if checks["n_below_minimum"]:
        warnings.warn(
            f"n={n} does not exceed (d+1)^((d+2)/(1-a'))={checks['n_minimum']:.4g}; "
            "the log-linear approximation may be poor",
            RuntimeWarning,
        )
    psi_names = ["log_sigma0sq_K"] + [f"neg_kappa{l + 1}" for l in range(d)]
    nu_names = ["sigma0_sq"] + [f"kappa{l + 1}" for l in range(d)]
    reps = []
    for name, est, cov, comps in (("psi", psi, cov_psi, psi_names), ("natural", nu_hat, cov_nu, nu_names)):
        var = np.diag(cov).copy()
        se, lo, hi = _ci(est, var, n * m, level)
        reps.append(EstimationReport(name, est, var, se, lo, hi, level, comps,
                                     {**diag, "covariance": cov}, dict(assumed)))
    return reps[0], reps[1]


def thin_time_grid(sample: FieldSample) -> FieldSample:
    """Keep every second time point (``Delta`` doubles)."""
    if sample.n % 2:
        raise ValueError(f"thinning needs an even number of steps, got {sample.n}")
    meta = dict(sample.settings)
    meta["thinned"] = meta.get("thinned", 0) + 1
    return FieldSample(sample.values[::2], sample.points, sample.params, sample.seed, sample.method, meta)


def estimate_alpha(sample: FieldSample, *, delta: float | None = None, level: float = 0.95,
                   series_tol: float = 1e-10) -> EstimationReport:
    """Damping estimate from realized volatilities on the full and the thinned grid.

    ``a_hat = (m log 2)^-1 sum_j log(2 RV_coarse(y_j) / RV_fine(y_j))``; the
    limit variance of ``sqrt(2 n m)(a_hat - a')`` is evaluated at ``a_hat``.
    """
    _check_interior(sample, delta)
    fine = realized_volatilities(sample)
    coarse = realized_volatilities(thin_time_grid(sample))
    if np.any(fine <= 0) or np.any(coarse <= 0):
        raise DataError("damping estimate needs strictly positive realized volatilities")
    est = float(np.mean(np.log(2 * coarse / fine)) / math.log(2))
    n_coarse, m = sample.n // 2, sample.m
    diag: dict[str, Any] = {"n_fine": sample.n, "n": n_coarse, "m": m}
    if 0 < est < 1:
        var = alpha_variance_constant(est, series_tol)
        diag["upsilon"] = upsilon(est, series_tol)
    else:
        var = float("nan")
        diag["note"] = "estimate outside (0, 1); variance undefined"
    se, lo, hi = _ci(np.array([est]), np.array([var]), 2 * n_coarse * m, level)
    return EstimationReport("alpha_prime", np.array([est]), np.array([var]), se, lo, hi, level,
                            ["alpha_prime"], diag, {})


def separation_statistic(points) -> float:
    """``m * min_{j1 != j2} ||y_j1 - y_j2||_0`` where ``||x||_0`` is the smallest nonzero |x_l| (0 if none)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    m = pts.shape[0]
    if m < 2:
        return float("inf")
    best = math.inf
    for i in range(m):
        diff = np.abs(pts[i + 1:] - pts[i])
        masked = np.where(diff > 0, diff, np.inf)
        mins = masked.min(axis=1)
        mins[np.isinf(mins)] = 0.0
        if mins.size:
            best = min(best, float(mins.min()))
    return m * best


def validate_scheme(sample: FieldSample, alpha_prime: float) -> dict[str, Any]:
    """Non-fatal checks of the observation design against the asymptotic regime."""
    return scheme_checks(sample.n, sample.points, alpha_prime)


def scheme_checks(n: int, points, alpha_prime: float) -> dict[str, Any]:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    m, d = pts.shape
    bound = n ** ((1 - alpha_prime) / (d + 2))
    n_min = (d + 1) ** ((d + 2) / (1 - alpha_prime))
    sep = separation_statistic(pts)
    full_rank = m >= d + 1 and matrix_rank_ok(design_matrix(pts))
    return {
        "m_bound": bound,
        "m_within_bound": m < bound,
        "n_minimum": n_min,
        "n_below_minimum": n <= n_min,
        "separation": sep,
        "separation_degenerate": sep == 0.0,
        "full_rank": bool(full_rank),
    }
