"""Numerical kernels shared by the model, simulation and estimation layers.

Nothing in here knows about SPDEs: least squares with a rank gate, seeded
Gaussian streams, summary statistics and the two slowly converging series
that appear in the asymptotic variances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

__all__ = [
    "FullRankViolation",
    "design_matrix",
    "matrix_rank_ok",
    "ols_solve",
    "RngStream",
    "gauss",
    "Summary",
    "summary",
    "normal_quantile",
    "second_difference_powers",
    "sum_power_series",
]

RANK_RTOL = 1e-10


class FullRankViolation(ValueError):
    """Design matrix does not span R^(d+1)."""


def design_matrix(points) -> np.ndarray:
    """Rows ``(1, y_1, ..., y_d)`` for every spatial point."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return np.hstack([np.ones((pts.shape[0], 1)), pts])


def matrix_rank_ok(X: np.ndarray, rtol: float = RANK_RTOL) -> bool:
    X = np.asarray(X, dtype=float)
    if X.shape[0] < X.shape[1]:
        return False
    s = np.linalg.svd(X, compute_uv=False)
    return bool(s[-1] > rtol * s[0])


def ols_solve(X, Y) -> np.ndarray:
    """Least-squares coefficients of ``Y ~ X`` via an orthogonal factorization.

    Raises
    ------
    FullRankViolation
        If ``X`` has fewer rows than columns or its smallest singular value is
        below ``1e-10`` times the largest. The spatial design must span
        ``R^(d+1)`` (full-rank assumption of the log-linear model).
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.ndim != 2 or Y.shape != (X.shape[0],):
        raise ValueError(f"shape mismatch: X {X.shape}, Y {Y.shape}")
    if not matrix_rank_ok(X):
        raise FullRankViolation(
            f"design matrix of shape {X.shape} is rank deficient; the points "
            "(1, y_j) must span R^(d+1) (full-rank assumption)"
        )
    Q, R = np.linalg.qr(X, mode="reduced")
    return np.linalg.solve(R, Q.T @ Y)


@dataclass
class RngStream:
    """Reproducible Gaussian stream identified by ``(seed, index)``.

    Backed by PCG64 seeded through :class:`numpy.random.SeedSequence` with the
    index as spawn key, so distinct indices give independent streams and the
    same pair always replays the same draws. Single consumer only.
    """

    seed: int
    index: int | tuple[int, ...] = 0
    algorithm: str = "PCG64"
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.algorithm != "PCG64":
            raise ValueError(f"unsupported algorithm {self.algorithm!r}")
        key = self.index if isinstance(self.index, tuple) else (self.index,)
        ss = np.random.SeedSequence(int(self.seed) & (2**64 - 1), spawn_key=tuple(int(k) for k in key))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def normal(self, size=None):
        return self._gen.standard_normal(size)

    def child(self, *key: int) -> "RngStream":
        base = self.index if isinstance(self.index, tuple) else (self.index,)
        return RngStream(self.seed, base + tuple(key), self.algorithm)


def gauss(stream: RngStream) -> float:
    """One standard normal variate from ``stream``."""
    return float(stream.normal())


@dataclass(frozen=True)
class Summary:
    n: int
    mean: float
    variance: float | None
    quantiles: dict[float, float]

    def quantile(self, q: float) -> float:
        return self.quantiles[q]


def summary(samples: Sequence[float], qs: Sequence[float] = (0.025, 0.25, 0.5, 0.75, 0.975)) -> Summary:
    """Mean, unbiased variance (``None`` for one sample) and linear-interpolation quantiles."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("summary of an empty sample")
    var = float(np.var(x, ddof=1)) if x.size > 1 else None
    qv = np.quantile(x, qs, method="linear")
    return Summary(int(x.size), float(np.mean(x)), var, {float(q): float(v) for q, v in zip(qs, qv)})


def normal_quantile(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError("probability must lie in (0, 1)")
    return float(stats.norm.ppf(p))


def second_difference_powers(r: np.ndarray, a: float, shift: int = 0) -> np.ndarray:
    """``-(r+s)^a + 2(r+s+1)^a - (r+s+2)^a`` evaluated without cancellation.

    For large arguments the three powers nearly cancel, so the value is written
    as ``x^a * (2 expm1(a log1p(1/x)) - expm1(a log1p(2/x)))`` with ``x = r+s``.
    """
    x = np.asarray(r, dtype=float) + shift
    out = np.empty_like(x)
    zero = x == 0
    out[zero] = 2.0 - 2.0**a
    xp = x[~zero]
    out[~zero] = xp**a * (2.0 * np.expm1(a * np.log1p(1.0 / xp)) - np.expm1(a * np.log1p(2.0 / xp)))
    return out


def sum_power_series(
    term: Callable[[np.ndarray], np.ndarray],
    a: float,
    tol: float,
    chunk: int = 1 << 16,
) -> float:
    """Sum ``term(r)`` over ``r >= 0`` for summands bounded by ``C r^(2a-4)``.

    Summation stops once the last block's largest summand is below ``tol/100``
    and the integral tail bound ``C (R-1)^(2a-3) / (3-2a)`` with
    ``C = (a(1-a))^2`` is below ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    c = (a * (1.0 - a)) ** 2
    total = 0.0
    start = 0
    while True:
        r = np.arange(start, start + chunk, dtype=float)
        vals = term(r)
        total += math.fsum(vals)
        start += chunk
        tail = c * (start - 1.0) ** (2 * a - 3) / (3 - 2 * a)
        if np.max(np.abs(vals)) < tol * 1e-2 and tail < tol:
            return total
        # later blocks can be wider; terms only shrink
        chunk = min(chunk * 2, 1 << 22)
