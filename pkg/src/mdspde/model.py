"""Parameterization, spectral objects and closed-form moments of the SPDE

    dX_t = A X_t dt + sigma dB_t  on [0, 1]^d,  X = 0 on the boundary,
    A = eta * Laplacian + sum_l nu_l d/dy_l + theta0,

driven by a cylindrical Brownian motion whose k-th mode is damped by
``lambda_k^(-alpha/2)`` with ``alpha = d/2 - 1 + alpha'``.

Throughout, ``kappa . y`` denotes the *signed* sum ``sum_l kappa_l y_l``; it is
not a norm and can be negative.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .numerics import design_matrix, second_difference_powers, sum_power_series

__all__ = [
    "ModelParams",
    "SamplingScheme",
    "FieldSample",
    "multi_indices",
    "eigenvalue",
    "eigenvalues",
    "eigenfunction",
    "eigenfunction_matrix",
    "kappa_dot",
    "rescaling_constant_K",
    "upsilon",
    "lambda_const",
    "alpha_variance_constant",
    "theoretical_mean_sq_increment",
    "truncated_mean_sq_increment",
    "theoretical_autocovariance",
    "theoretical_autocorrelation",
    "asymptotic_sigma_matrix",
    "S3",
]

# Three-point design used for the natural-parameter study (determinant 0.12).
S3 = ((0.1, 0.3), (0.4, 0.2), (0.7, 0.5))


@dataclass(frozen=True)
class ModelParams:
    """Structural parameters of the SPDE.

    ``alpha``, ``kappa`` and ``sigma0_sq`` are derived. Construction fails if
    ``d < 2`` or if the smallest eigenvalue ``lambda_(1,...,1)`` is not
    positive, since every moment formula and simulator needs ``lambda_k > 0``.
    """

    d: int
    theta0: float
    nu: tuple[float, ...]
    eta: float
    sigma: float
    alpha_prime: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "nu", tuple(float(v) for v in self.nu))
        if int(self.d) != self.d or self.d < 2:
            raise ValueError(
                f"d={self.d}: only d >= 2 space dimensions are supported; the damping band "
                "alpha in (d/2-1, d/2) is formulated for the multi-dimensional model"
            )
        if len(self.nu) != self.d:
            raise ValueError(f"nu must have length d={self.d}, got {len(self.nu)}")
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if not self.sigma >= 0:
            raise ValueError("sigma must be nonnegative")
        if not 0.0 < self.alpha_prime < 1.0:
            raise ValueError("alpha_prime must lie in (0, 1)")
        lam1 = self.lambda_offset + math.pi**2 * self.eta * self.d
        if not lam1 > 0:
            raise ValueError(f"smallest eigenvalue lambda_(1,...,1) = {lam1:.6g} is not positive")

    @property
    def alpha(self) -> float:
        return self.d / 2 - 1 + self.alpha_prime

    @property
    def kappa(self) -> np.ndarray:
        return np.asarray(self.nu) / self.eta

    @property
    def sigma0_sq(self) -> float:
        return self.sigma**2 / self.eta ** (self.d / 2)

    @property
    def lambda_offset(self) -> float:
        """``-theta0 + sum_l nu_l^2 / (4 eta)``, the k-independent part of ``lambda_k``."""
        return -self.theta0 + sum(v * v for v in self.nu) / (4 * self.eta)

    def replace(self, **changes) -> "ModelParams":
        data = self.to_dict()
        data.update(changes)
        return ModelParams(**data)

    def to_dict(self) -> dict[str, Any]:
        return {
            "d": int(self.d),
            "theta0": float(self.theta0),
            "nu": [float(v) for v in self.nu],
            "eta": float(self.eta),
            "sigma": float(self.sigma),
            "alpha_prime": float(self.alpha_prime),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ModelParams":
        return cls(
            d=int(data["d"]),
            theta0=float(data["theta0"]),
            nu=tuple(data["nu"]),
            eta=float(data["eta"]),
            sigma=float(data["sigma"]),
            alpha_prime=float(data["alpha_prime"]),
        )


@dataclass(frozen=True)
class SamplingScheme:
    """Observation design: ``n`` steps of size ``1/n`` and ``m`` points in ``[delta, 1-delta]^d``."""

    n: int
    spatial_points: np.ndarray
    delta: float

    def __post_init__(self) -> None:
        pts = np.atleast_2d(np.asarray(self.spatial_points, dtype=float))
        object.__setattr__(self, "spatial_points", pts)
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if not 0.0 < self.delta < 0.5:
            raise ValueError("delta must lie in (0, 1/2)")
        if pts.shape[0] < 1:
            raise ValueError("at least one spatial point is required")
        eps = 1e-12
        if np.any(pts < self.delta - eps) or np.any(pts > 1 - self.delta + eps):
            raise ValueError(f"spatial points must lie in [delta, 1-delta]^d with delta={self.delta}")
        if len({tuple(p) for p in np.round(pts, 12)}) != pts.shape[0]:
            raise ValueError("spatial points must be pairwise distinct")

    @property
    def Delta(self) -> float:
        return 1.0 / self.n

    @property
    def m(self) -> int:
        return self.spatial_points.shape[0]


@dataclass(frozen=True)
class FieldSample:
    """Field values ``values[i, j] = X_{i/n}(y_j)`` on ``n + 1`` time points.

    ``settings`` carries the simulator cut-offs; ``method`` is ``"truncation"``,
    ``"replacement"`` or ``"external"`` for data that was not simulated here.
    """

    values: np.ndarray
    points: np.ndarray
    params: ModelParams | None
    seed: int | None = None
    method: str = "external"
    settings: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if vals.ndim != 2 or vals.shape[1] != pts.shape[0]:
            raise ValueError(f"values {vals.shape} do not match {pts.shape[0]} spatial points")
        if vals.shape[0] < 2:
            raise ValueError("need at least two time points")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.values.shape[0] - 1

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def Delta(self) -> float:
        return 1.0 / self.n

    def select(self, indices: Sequence[int]) -> "FieldSample":
        idx = np.asarray(indices, dtype=int)
        return FieldSample(self.values[:, idx], self.points[idx], self.params, self.seed, self.method, dict(self.settings))

    def interior(self, delta: float) -> "FieldSample":
        """Columns whose points lie in ``[delta, 1-delta]^d``."""
        eps = 1e-12
        mask = np.all((self.points >= delta - eps) & (self.points <= 1 - delta + eps), axis=1)
        return self.select(np.flatnonzero(mask))

    def at_points(self, points) -> "FieldSample":
        """Columns matching ``points`` (to 1e-9); raises ``KeyError`` for points not present."""
        want = np.atleast_2d(np.asarray(points, dtype=float))
        idx = []
        for p in want:
            hit = np.flatnonzero(np.all(np.abs(self.points - p) < 1e-9, axis=1))
            if hit.size == 0:
                raise KeyError(f"point {tuple(p)} is not part of the sample")
            idx.append(int(hit[0]))
        return self.select(idx)

    def scaled(self, c: float) -> "FieldSample":
        return FieldSample(c * self.values, self.points, self.params, self.seed, self.method, dict(self.settings))


def multi_indices(cutoff: int, d: int) -> np.ndarray:
    """All ``k`` in ``{1, ..., cutoff}^d`` in lexicographic order, shape ``(cutoff^d, d)``."""
    return np.array(list(itertools.product(range(1, cutoff + 1), repeat=d)), dtype=np.int64).reshape(-1, d)


def eigenvalue(params: ModelParams, k: Sequence[int]) -> float:
    """``lambda_k = -theta0 + sum_l (nu_l^2/(4 eta) + pi^2 k_l^2 eta)``."""
    k = np.asarray(k)
    if k.shape != (params.d,) or np.any(k < 1):
        raise ValueError(f"multi-index must have {params.d} positive components")
    return float(params.lambda_offset + math.pi**2 * params.eta * float(np.sum(k.astype(float) ** 2)))


def eigenvalues(params: ModelParams, ks: np.ndarray) -> np.ndarray:
    ks = np.asarray(ks, dtype=float)
    return params.lambda_offset + math.pi**2 * params.eta * np.sum(ks**2, axis=-1)


def _check_unit_cube(y: np.ndarray) -> None:
    if np.any(y < 0) or np.any(y > 1):
        raise ValueError("spatial coordinates must lie in [0, 1]")


def eigenfunction(params: ModelParams, k: Sequence[int], y: Sequence[float]) -> float:
    """``e_k(y) = 2^(d/2) prod_l sin(pi k_l y_l) exp(-kappa_l y_l / 2)``; exactly 0 on the boundary."""
    return float(eigenfunction_matrix(params, np.asarray([k]), np.asarray([y]))[0, 0])


def eigenfunction_matrix(params: ModelParams, ks: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Matrix ``E[j, r] = e_{ks[r]}(points[j])``.

    Computed per axis and multiplied, so the cost is ``O(m * P * d)``.
    """
    ks = np.atleast_2d(np.asarray(ks))
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    _check_unit_cube(pts)
    kappa = params.kappa
    out = np.full((pts.shape[0], ks.shape[0]), 2.0 ** (params.d / 2))
    for ax in range(params.d):
        y = pts[:, ax]
        s = np.sin(np.pi * np.outer(y, ks[:, ax]))
        s[(y == 0.0) | (y == 1.0), :] = 0.0
        out *= s * np.exp(-kappa[ax] * y / 2)[:, None]
    return out


def kappa_dot(params: ModelParams, y) -> np.ndarray | float:
    """Signed sum ``sum_l kappa_l y_l`` (for one point or a stack of points)."""
    y = np.asarray(y, dtype=float)
    return y @ params.kappa


def rescaling_constant_K(params: ModelParams | None = None, *, d: int | None = None, eta: float | None = None,
                         alpha_prime: float | None = None) -> float:
    """``K = Gamma(1-a') / (2^d (pi eta)^(d/2) a' Gamma(d/2))``.

    Either pass ``params`` or the three keywords.
    """
    if params is not None:
        d, eta, alpha_prime = params.d, params.eta, params.alpha_prime
    if d is None or eta is None or alpha_prime is None:
        raise TypeError("need params or d, eta and alpha_prime")
    if not 0 < alpha_prime < 1:
        raise ValueError("alpha_prime must lie in (0, 1)")
    return math.gamma(1 - alpha_prime) / (2**d * (math.pi * eta) ** (d / 2) * alpha_prime * math.gamma(d / 2))


def upsilon(alpha_prime: float, tol: float = 1e-10) -> float:
    """Asymptotic variance constant of the volatility estimator.

    ``sum_{r>=0} (-r^a + 2(r+1)^a - (r+2)^a)^2 + 2`` with the series cut once
    the tail bound drops below ``tol``.
    """
    a = float(alpha_prime)
    return sum_power_series(lambda r: second_difference_powers(r, a) ** 2, a, tol) + 2.0


def lambda_const(alpha_prime: float, tol: float = 1e-10) -> float:
    """Cross-grid covariance constant of the damping estimator.

    ``2(2^a - 2) + sum_{r>=0} D(r+1) D(r)`` where ``D(r)`` is the second
    difference ``-r^a + 2(r+1)^a - (r+2)^a``.
    """
    a = float(alpha_prime)
    series = sum_power_series(
        lambda r: second_difference_powers(r, a, shift=1) * second_difference_powers(r, a), a, tol
    )
    return 2.0 * (2.0**a - 2.0) + series


def alpha_variance_constant(alpha_prime: float, tol: float = 1e-10) -> float:
    """``log(2)^-2 (3 U - 2^(2-a) (U + L))``, the limit variance of ``sqrt(2nm)(a_hat - a)``."""
    u = upsilon(alpha_prime, tol)
    lam = lambda_const(alpha_prime, tol)
    return (3 * u - 2 ** (2 - alpha_prime) * (u + lam)) / math.log(2) ** 2


def theoretical_mean_sq_increment(params: ModelParams, y, Delta: float) -> float:
    """Leading term ``Delta^a' sigma^2 exp(-kappa.y) K`` of ``E[(Delta_i X)^2(y)]``."""
    return Delta**params.alpha_prime * params.sigma**2 * math.exp(-float(kappa_dot(params, y))) * rescaling_constant_K(params)


def truncated_mean_sq_increment(params: ModelParams, y, Delta: float, cutoff: int) -> float:
    """Exact stationary ``E[(Delta_i X)^2(y)]`` of the field truncated to ``{1..cutoff}^d``.

    Each mode contributes ``sigma^2 lambda^-(1+alpha) (1 - exp(-lambda Delta)) e_k(y)^2``.
    """
    ks = multi_indices(cutoff, params.d)
    lam = eigenvalues(params, ks)
    e = eigenfunction_matrix(params, ks, np.asarray([y]))[0]
    w = params.sigma**2 * lam ** (-1 - params.alpha) * -np.expm1(-lam * Delta)
    return float(np.sum(w * e**2))


def theoretical_autocovariance(params: ModelParams, y, Delta: float, lag: int) -> float:
    """Leading term of ``Cov(Delta_i X(y), Delta_{i+lag} X(y))`` for ``lag >= 1``."""
    if lag < 1 or int(lag) != lag:
        raise ValueError("lag must be an integer >= 1")
    a = params.alpha_prime
    h = float(lag)
    shape = 2 * h**a - (h - 1) ** a - (h + 1) ** a
    return -0.5 * theoretical_mean_sq_increment(params, y, Delta) * shape


def theoretical_autocorrelation(alpha_prime: float, lag: int) -> float:
    """``-h^a + ((h-1)^a + (h+1)^a)/2``; equals ``2^(a-1) - 1`` at lag 1."""
    if lag < 1:
        raise ValueError("lag must be an integer >= 1")
    h = float(lag)
    a = alpha_prime
    return -(h**a) + 0.5 * ((h - 1) ** a + (h + 1) ** a)


def asymptotic_sigma_matrix(spatial_points, delta: float) -> np.ndarray:
    """Finite-m version ``(1-2 delta)/m X^T X`` of the limiting design covariance."""
    X = design_matrix(spatial_points)
    return (1 - 2 * delta) / X.shape[0] * (X.T @ X)
