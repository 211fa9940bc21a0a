"""Spectral simulation of the SPDE: truncation and replacement engines.

Both engines evolve Fourier modes as exact Ornstein-Uhlenbeck paths. Noise
layout per replication stream is fixed: modes are visited in lexicographic
multi-index order and mode rank ``r`` consumes the ``r``-th block of ``n + 1``
standard normals (entry 0 is the stationary initial draw, unused for a zero
start). The replacement engine then draws its ``n x (M-1)^d`` replacement
normals. Output therefore does not depend on the chunk size used internally.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .model import FieldSample, ModelParams, eigenfunction_matrix, eigenvalues, multi_indices
from .numerics import RngStream

__all__ = [
    "DEFAULT_BUDGET",
    "BudgetExceeded",
    "CacheKeyMismatch",
    "OffGridError",
    "TruncationSettings",
    "ReplacementSettings",
    "ReplacementCache",
    "ou_step",
    "ou_paths",
    "simulate_truncation",
    "axis_index_set",
    "replacement_variance",
    "build_cache",
    "load_cache",
    "save_cache",
    "cache_key",
    "grid_points",
    "discrete_inner_product",
    "simulate_replacement",
    "CACHE_STATS",
]

log = logging.getLogger(__name__)

# mode x step work units refused without an explicit override
DEFAULT_BUDGET = 1e8
CACHE_FORMAT_VERSION = 1
# float64 entries per noise block held in memory at once
_BLOCK_ENTRIES = 4_000_000

CACHE_STATS = {"computed": 0, "memory_hits": 0, "disk_hits": 0}
_MEMORY_CACHE: dict[str, "ReplacementCache"] = {}


class BudgetExceeded(RuntimeError):
    pass


class CacheKeyMismatch(ValueError):
    pass


class OffGridError(ValueError):
    pass


@dataclass(frozen=True)
class TruncationSettings:
    cutoff: int
    init: str = "zero"

    def __post_init__(self) -> None:
        if self.cutoff < 1:
            raise ValueError("truncation cutoff must be >= 1")
        if self.init not in ("zero", "stationary"):
            raise ValueError("init must be 'zero' or 'stationary'")

    def to_dict(self) -> dict[str, Any]:
        return {"cutoff": self.cutoff, "init": self.init}


@dataclass(frozen=True)
class ReplacementSettings:
    M: int
    L: int
    K_v: int

    def __post_init__(self) -> None:
        if self.M < 2:
            raise ValueError("M must be >= 2")
        if not 1 <= self.L < self.K_v:
            raise ValueError("need 1 <= L < K_v")

    def to_dict(self) -> dict[str, Any]:
        return {"M": self.M, "L": self.L, "K_v": self.K_v}


@dataclass
class ReplacementCache:
    """Replacement variances ``s_m`` for ``m in {1..M-1}^d`` (array of shape ``(M-1,)*d``)."""

    key: dict[str, Any]
    table: np.ndarray
    source: str = "computed"
    path: Path | None = None

    @property
    def digest(self) -> str:
        return _digest(self.key)


def _digest(key: dict[str, Any]) -> str:
    return hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()[:16]


def cache_key(params: ModelParams, settings: ReplacementSettings) -> dict[str, Any]:
    return {
        "M": settings.M,
        "L": settings.L,
        "K_v": settings.K_v,
        "d": params.d,
        "theta0": float(params.theta0),
        "nu": [float(v) for v in params.nu],
        "eta": float(params.eta),
        "sigma": float(params.sigma),
        "alpha_prime": float(params.alpha_prime),
    }


def ou_step(x, lam, sigma, alpha, Delta, z):
    """Exact OU transition ``x e^(-lam Delta) + sigma sqrt((1 - e^(-2 lam Delta)) / (2 lam^(1+alpha))) z``."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0) or Delta <= 0:
        raise ValueError("need lam > 0 and Delta > 0")
    scale = sigma * np.sqrt(-np.expm1(-2 * lam * Delta) / (2 * lam ** (1 + alpha)))
    return x * np.exp(-lam * Delta) + scale * z


def ou_paths(lam: np.ndarray, sigma: float, alpha: float, Delta: float, noise: np.ndarray,
             stationary: bool) -> np.ndarray:
    """OU paths for many modes at once.

    ``noise`` has shape ``(P, n + 1)``; column 0 gives the stationary start
    when ``stationary`` is true, otherwise paths start at 0. Returns an array of
    shape ``(n + 1, P)``.
    """
    lam = np.asarray(lam, dtype=float)
    decay = np.exp(-lam * Delta)
    scale = sigma * np.sqrt(-np.expm1(-2 * lam * Delta) / (2 * lam ** (1 + alpha)))
    paths = np.ascontiguousarray((noise * scale[:, None]).T)
    if stationary:
        paths[0] = noise[:, 0] * sigma / np.sqrt(2 * lam ** (1 + alpha))
    else:
        paths[0] = 0.0
    tmp = np.empty_like(decay)
    for i in range(1, paths.shape[0]):
        np.multiply(paths[i - 1], decay, out=tmp)
        paths[i] += tmp
    return paths


def _check_budget(work: float, budget: float | None) -> None:
    limit = DEFAULT_BUDGET if budget is None else budget
    if work > limit:
        raise BudgetExceeded(
            f"simulation needs {work:.3g} mode-steps, above the budget {limit:.3g}; spectral "
            "simulation cost grows like cutoff^d * n (single paths at cut-off 1e5 take hours), "
            "raise the budget explicitly to proceed"
        )


def _block_size(n_time: int) -> int:
    return max(1, _BLOCK_ENTRIES // (n_time + 1))


def simulate_truncation(params: ModelParams, n: int, spatial_points, settings: TruncationSettings,
                        stream: RngStream, budget: float | None = None) -> FieldSample:
    """Field at ``spatial_points`` from the modes ``{1..cutoff}^d``, ``n`` steps of size ``1/n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    pts = np.atleast_2d(np.asarray(spatial_points, dtype=float))
    if pts.shape[1] != params.d:
        raise ValueError(f"points must have {params.d} coordinates")
    ks = multi_indices(settings.cutoff, params.d)
    _check_budget(float(ks.shape[0]) * n, budget)
    lam = eigenvalues(params, ks)
    E = eigenfunction_matrix(params, ks, pts)
    Delta = 1.0 / n
    values = np.zeros((n + 1, pts.shape[0]))
    block = _block_size(n)
    for start in range(0, ks.shape[0], block):
        sl = slice(start, start + block)
        noise = stream.normal((lam[sl].size, n + 1))
        paths = ou_paths(lam[sl], params.sigma, params.alpha, Delta, noise, settings.init == "stationary")
        values += paths @ E[:, sl].T
    return FieldSample(values, pts, params, stream.seed, "truncation", settings.to_dict())


def axis_index_set(k: int, M: int, bound: int) -> list[int]:
    """Frequencies aliasing onto ``k`` on the grid ``j/M``: ``{k + 2lM} u {2M - k + 2lM}`` below ``bound``."""
    if not 1 <= k <= M - 1:
        raise ValueError(f"k={k} must lie in [1, M-1] for M={M}")
    plus = range(k, bound, 2 * M)
    minus = range(2 * M - k, bound, 2 * M)
    return sorted(set(plus) | set(minus))


def _variance_table(params: ModelParams, settings: ReplacementSettings, ms: np.ndarray) -> np.ndarray:
    """Shell sums for each row of ``ms``, reusing values for permuted multi-indices."""
    M, L, K_v = settings.M, settings.L, settings.K_v
    bound = K_v * M
    low = L * M
    sets = {k: np.asarray(axis_index_set(k, M, bound), dtype=float) for k in range(1, M)}
    c0 = params.lambda_offset
    c1 = math.pi**2 * params.eta
    expo = -(1 + params.alpha)
    half_s2 = params.sigma**2 / 2
    memo: dict[tuple[int, ...], float] = {}
    out = np.empty(ms.shape[0])
    for r, m in enumerate(ms):
        sig = tuple(sorted(int(v) for v in m))
        if sig not in memo:
            axes = [sets[k] for k in sig]
            # iterate the first axis, outer-sum the rest
            rest_sq = np.zeros(1)
            rest_low = np.ones(1, dtype=bool)
            for ax in axes[1:]:
                rest_sq = np.add.outer(rest_sq, ax**2).ravel()
                rest_low = np.logical_and.outer(rest_low, ax < low).ravel()
            total = 0.0
            for l1 in axes[0]:
                lam = c0 + c1 * (l1 * l1 + rest_sq)
                w = lam**expo
                if l1 < low:
                    w = np.where(rest_low, 0.0, w)
                total += float(np.sum(w))
            memo[sig] = half_s2 * total
        out[r] = memo[sig]
    return out


def replacement_variance(params: ModelParams, M: int, L: int, K_v: int, m: Sequence[int]) -> float:
    """``s_m``: sum of ``sigma^2 / (2 lambda_l^(1+alpha))`` over the aliasing set of ``m``
    restricted to ``(0, K_v M)^d`` minus ``(0, L M)^d``."""
    if K_v <= L:
        return 0.0
    settings = ReplacementSettings(M, L, K_v)
    m = np.asarray(m, dtype=int)
    if m.shape != (params.d,) or np.any(m < 1) or np.any(m > M - 1):
        raise ValueError(f"m must lie in {{1..{M - 1}}}^{params.d}")
    return float(_variance_table(params, settings, m[None, :])[0])


def _cache_file(cache_dir: Path, key: dict[str, Any]) -> Path:
    return Path(cache_dir) / f"replacement_{_digest(key)}.json"


def save_cache(cache: ReplacementCache, path: Path) -> None:
    payload = {
        "format_version": CACHE_FORMAT_VERSION,
        "key": cache.key,
        "shape": list(cache.table.shape),
        "variances": [float(v) for v in cache.table.ravel()],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=1))


def load_cache(path: Path, expected_key: dict[str, Any] | None = None) -> ReplacementCache:
    """Read a cache file; raise :class:`CacheKeyMismatch` if ``expected_key`` differs."""
    payload = json.loads(Path(path).read_text())
    if payload.get("format_version") != CACHE_FORMAT_VERSION:
        raise CacheKeyMismatch(f"unsupported cache format {payload.get('format_version')!r}")
    key = payload["key"]
    if expected_key is not None and key != expected_key:
        raise CacheKeyMismatch(f"cache key {key} does not match requested {expected_key}")
    table = np.asarray(payload["variances"], dtype=float).reshape(payload["shape"])
    return ReplacementCache(key, table, "disk", Path(path))


def build_cache(params: ModelParams, settings: ReplacementSettings,
                cache_dir: str | Path | None = None) -> ReplacementCache:
    """Replacement variances for every ``m``, memoized in-process and on disk.

    A file in ``cache_dir`` is reused only when its key matches exactly. A
    failing write still returns the in-memory table, with a warning.
    """
    key = cache_key(params, settings)
    digest = _digest(key)
    path = _cache_file(Path(cache_dir), key) if cache_dir is not None else None
    hit = _MEMORY_CACHE.get(digest)
    if hit is not None and hit.key == key:
        CACHE_STATS["memory_hits"] += 1
        out = ReplacementCache(key, hit.table, "memory", hit.path)
        if path is not None and not path.exists():
            _persist(out, path)
        return out
    if path is not None and path.exists():
        try:
            cache = load_cache(path, key)
        except (CacheKeyMismatch, ValueError, KeyError) as exc:
            log.info("ignoring cache file %s: %s", path, exc)
        else:
            CACHE_STATS["disk_hits"] += 1
            _MEMORY_CACHE[digest] = cache
            return cache
    d = params.d
    ms = multi_indices(settings.M - 1, d)
    table = _variance_table(params, settings, ms).reshape((settings.M - 1,) * d)
    CACHE_STATS["computed"] += 1
    cache = ReplacementCache(key, table, "computed", None)
    if path is not None:
        _persist(cache, path)
    _MEMORY_CACHE[digest] = cache
    return cache


def _persist(cache: ReplacementCache, path: Path) -> None:
    try:
        save_cache(cache, path)
        cache.path = path
    except OSError as exc:
        warnings.warn(f"could not persist replacement cache to {path}: {exc}", RuntimeWarning)


def clear_memory_cache() -> None:
    _MEMORY_CACHE.clear()


def grid_points(M: int, d: int) -> np.ndarray:
    """All ``j / M`` for ``j in {0..M}^d``, lexicographic, boundary included."""
    j = multi_indices(M + 1, d) - 1
    return j / M


def discrete_inner_product(params: ModelParams, M: int, f_vals: np.ndarray, g_vals: np.ndarray) -> float:
    """``M^-d sum_j f(y_j) g(y_j) exp(kappa.y_j)`` over the full grid :func:`grid_points`."""
    pts = grid_points(M, params.d)
    w = np.exp(pts @ params.kappa)
    return float(np.sum(np.asarray(f_vals) * np.asarray(g_vals) * w) / M**params.d)


def _alias(ks: np.ndarray, M: int) -> tuple[np.ndarray, np.ndarray]:
    """Grid frequency (flat index into ``{1..M-1}^d``, -1 if invisible) and sign of each mode."""
    r = ks % (2 * M)
    sign = np.where(r > M, -1.0, 1.0).prod(axis=1)
    m = np.where(r > M, 2 * M - r, r)
    visible = np.all((m >= 1) & (m <= M - 1), axis=1)
    flat = np.zeros(ks.shape[0], dtype=np.int64)
    for ax in range(ks.shape[1]):
        flat = flat * (M - 1) + (m[:, ax] - 1)
    flat[~visible] = -1
    sign[~visible] = 0.0
    return flat, sign


def simulate_replacement(params: ModelParams, n: int, settings: ReplacementSettings,
                         cache: ReplacementCache | None, stream: RngStream,
                         points=None, budget: float | None = None,
                         cache_dir: str | Path | None = None) -> FieldSample:
    """Field on the grid ``{j/M}^d`` with zero initial condition.

    Modes in ``{1..LM-1}^d`` are exact OU paths folded onto their grid
    frequency (with the aliasing sign); every grid coefficient then receives an
    independent ``N(0, s_m)`` replacement draw at each step ``i >= 1``.
    ``points`` optionally restricts the output to a subset of grid points.
    """
    M, L, d = settings.M, settings.L, params.d
    key = cache_key(params, settings)
    if cache is None:
        cache = build_cache(params, settings, cache_dir)
    elif cache.key != key:
        raise CacheKeyMismatch(f"cache built for {cache.key}, simulation requests {key}")
    grid = grid_points(M, d)
    if points is not None:
        want = np.atleast_2d(np.asarray(points, dtype=float))
        scaled = want * M
        if np.any(np.abs(scaled - np.round(scaled)) > 1e-9) or np.any(want < 0) or np.any(want > 1):
            raise OffGridError(
                "replacement simulation only produces values on the grid j/M; "
                "use the truncation method for off-grid points"
            )
        out_pts = np.round(scaled) / M
    else:
        out_pts = grid
    ks = multi_indices(L * M - 1, d)
    _check_budget(float(ks.shape[0]) * n, budget)
    lam = eigenvalues(params, ks)
    flat, sign = _alias(ks, M)
    Q = (M - 1) ** d
    grid_ms = multi_indices(M - 1, d)
    E = eigenfunction_matrix(params, grid_ms, out_pts)
    Delta = 1.0 / n
    U = np.zeros((n + 1, Q))
    block = _block_size(n)
    for start in range(0, ks.shape[0], block):
        sl = slice(start, start + block)
        noise = stream.normal((lam[sl].size, n + 1))
        paths = ou_paths(lam[sl], params.sigma, params.alpha, Delta, noise, stationary=False)
        fold = np.zeros((paths.shape[1], Q))
        vis = flat[sl] >= 0
        fold[np.flatnonzero(vis), flat[sl][vis]] = sign[sl][vis]
        U += paths @ fold
    sd = np.sqrt(cache.table.ravel())
    for start in range(1, n + 1, max(1, _BLOCK_ENTRIES // Q)):
        stop = min(n + 1, start + max(1, _BLOCK_ENTRIES // Q))
        U[start:stop] += stream.normal((stop - start, Q)) * sd
    values = U @ E.T
    meta = settings.to_dict()
    meta["cache_digest"] = cache.digest
    return FieldSample(values, out_pts, params, stream.seed, "replacement", meta)
