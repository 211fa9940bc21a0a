"""Command-line entry point and Monte Carlo harness.

Usage::

    mdspde constants --d 2 --alpha-prime 0.4
    mdspde simulate  --config run.json
    mdspde estimate  --config run.json field.bin
    mdspde mc        --config run.json --workers 4
    mdspde cache build --config run.json

Exit codes: 0 ok, 2 invalid config, 3 budget refusal, 4 metadata mismatch,
5 unusable data.
"""

from __future__ import annotations

import copy
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import click
import numpy as np

from .estimate import (
    DataError,
    EstimationReport,
    InteriorMarginError,
    estimate_alpha,
    estimate_sigma_pooled,
    log_linear_fit,
    quarticity,
)
from .io import load_field, save_field
from .model import (
    S3,
    FieldSample,
    ModelParams,
    SamplingScheme,
    alpha_variance_constant,
    asymptotic_sigma_matrix,
    lambda_const,
    rescaling_constant_K,
    theoretical_autocorrelation,
    theoretical_mean_sq_increment,
    upsilon,
)
from .numerics import FullRankViolation, RngStream, summary
from .simulate import (
    BudgetExceeded,
    CacheKeyMismatch,
    OffGridError,
    ReplacementCache,
    ReplacementSettings,
    TruncationSettings,
    build_cache,
    simulate_replacement,
    simulate_truncation,
)

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_METADATA, EXIT_DATA = 0, 2, 3, 4, 5

ESTIMATORS = ("sigma2_pooled", "quarticity", "log_linear", "alpha_prime")

DEFAULTS: dict[str, Any] = {
    "scheme": {"delta": 0.05},
    "estimators": ["sigma2_pooled"],
    "pipeline": {"plug_in_alpha": False},
    "replications": 1,
    "seed": 0,
    "workers": 1,
    "output_dir": "mdspde_out",
    "cache_dir": None,
    "field_format": "bin",
    "level": 0.95,
    "tolerances": {"series_tol": 1e-10, "budget": 1e8},
}
_ALLOWED = {
    "": {"model", "scheme", "simulator", "estimators", "pipeline", "replications", "seed", "workers",
         "output_dir", "cache_dir", "field_format", "level", "tolerances"},
    "model": {"d", "theta0", "nu", "eta", "sigma", "alpha_prime"},
    "scheme": {"n", "spatial", "delta"},
    "pipeline": {"plug_in_alpha"},
    "tolerances": {"series_tol", "budget"},
}


class ConfigError(ValueError):
    pass


class MetadataMismatch(ValueError):
    pass


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass
class RunConfig:
    """Fully validated run description; ``raw`` is the resolved JSON form."""

    params: ModelParams
    n: int
    points: np.ndarray
    delta: float
    simulator: TruncationSettings | ReplacementSettings
    estimators: list[str]
    plug_in_alpha: bool
    replications: int
    seed: int
    workers: int
    output_dir: Path
    cache_dir: Path
    field_format: str
    level: float
    series_tol: float
    budget: float
    raw: dict[str, Any] = field(repr=False, default_factory=dict)

    @property
    def method(self) -> str:
        return "truncation" if isinstance(self.simulator, TruncationSettings) else "replacement"

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        try:
            return cls._parse(data)
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc

    @classmethod
    def _parse(cls, data: dict[str, Any]) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        raw = _merge(DEFAULTS, data)
        for section, allowed in _ALLOWED.items():
            node = raw if section == "" else raw.get(section)
            if not isinstance(node, dict):
                raise ConfigError(f"section {section!r} must be an object")
            unknown = set(node) - allowed
            if unknown:
                raise ConfigError(f"unknown keys in {section or 'config'}: {sorted(unknown)}")
        if "model" not in data or "simulator" not in data or "n" not in raw["scheme"]:
            raise ConfigError("config needs 'model', 'simulator' and 'scheme.n'")
        params = ModelParams.from_dict(raw["model"])
        delta = float(raw["scheme"]["delta"])
        sim = raw["simulator"]
        method = sim.get("method")
        if method == "truncation":
            extra = set(sim) - {"method", "cutoff", "init"}
            settings: Any = TruncationSettings(int(sim["cutoff"]), sim.get("init", "zero"))
        elif method == "replacement":
            extra = set(sim) - {"method", "M", "L", "K_v"}
            settings = ReplacementSettings(int(sim["M"]), int(sim["L"]), int(sim["K_v"]))
        else:
            raise ConfigError("simulator.method must be 'truncation' or 'replacement'")
        if extra:
            raise ConfigError(f"unknown keys in simulator: {sorted(extra)}")
        spatial = raw["scheme"].get("spatial", {"kind": "grid", "M": getattr(settings, "M", 10)})
        points = _resolve_points(spatial, params.d, delta)
        n = int(raw["scheme"]["n"])
        SamplingScheme(n, points, delta)
        ests = list(raw["estimators"])
        bad = [e for e in ests if e not in ESTIMATORS]
        if bad:
            raise ConfigError(f"unknown estimators {bad}; choose from {list(ESTIMATORS)}")
        if ("alpha_prime" in ests or raw["pipeline"]["plug_in_alpha"]) and n % 2:
            raise ConfigError("the damping estimator needs an even number of time steps")
        reps = int(raw["replications"])
        if reps < 1:
            raise ConfigError("replications must be >= 1")
        workers = int(raw["workers"])
        if workers < 1:
            raise ConfigError("workers must be >= 1")
        if raw["field_format"] not in ("bin", "csv"):
            raise ConfigError("field_format must be 'bin' or 'csv'")
        out = Path(raw["output_dir"])
        cache_dir = Path(raw["cache_dir"]) if raw["cache_dir"] else out / "cache"
        raw["scheme"]["spatial"] = spatial
        return cls(params, n, points, delta, settings, ests, bool(raw["pipeline"]["plug_in_alpha"]), reps,
                   int(raw["seed"]), workers, out, cache_dir, raw["field_format"], float(raw["level"]),
                   float(raw["tolerances"]["series_tol"]), float(raw["tolerances"]["budget"]), raw)


def _resolve_points(spatial: dict[str, Any], d: int, delta: float) -> np.ndarray:
    kind = spatial.get("kind")
    if kind == "S3":
        if d != 2:
            raise ConfigError("the S3 design is two-dimensional")
        return np.asarray(S3, dtype=float)
    if kind == "points":
        pts = np.asarray(spatial["points"], dtype=float)
        if pts.ndim != 2 or pts.shape[1] != d:
            raise ConfigError(f"points must be a list of {d}-vectors")
        return pts
    if kind == "grid":
        M = int(spatial["M"])
        j = np.arange(0, M + 1) / M
        axis = j[(j >= delta - 1e-12) & (j <= 1 - delta + 1e-12)]
        mesh = np.meshgrid(*([axis] * d), indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=1)
    raise ConfigError("scheme.spatial.kind must be 'grid', 'points' or 'S3'")


def load_config(path: str | Path | None, overrides: dict[str, Any] | None = None) -> RunConfig:
    data: dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if overrides:
        data = _merge(data, overrides)
    return RunConfig.from_dict(data)


# --- simulation and estimation of one replication -------------------------------------------

def simulate_one(cfg: RunConfig, replication: int, cache: ReplacementCache | None = None) -> FieldSample:
    stream = RngStream(cfg.seed, replication)
    if cfg.method == "truncation":
        return simulate_truncation(cfg.params, cfg.n, cfg.points, cfg.simulator, stream, budget=cfg.budget)
    return simulate_replacement(cfg.params, cfg.n, cfg.simulator, cache, stream, budget=cfg.budget,
                                cache_dir=cfg.cache_dir)


def estimate_all(cfg: RunConfig, sample: FieldSample) -> list[EstimationReport]:
    """Run the configured estimators on the scheme points of ``sample``."""
    obs = sample.at_points(cfg.points)
    reports: list[EstimationReport] = []
    alpha_known = None
    if cfg.plug_in_alpha or "alpha_prime" in cfg.estimators:
        rep = estimate_alpha(obs, delta=cfg.delta, level=cfg.level, series_tol=cfg.series_tol)
        if "alpha_prime" in cfg.estimators:
            reports.append(rep)
        if cfg.plug_in_alpha:
            alpha_known = float(rep.estimate[0])
            if not 0 < alpha_known < 1:
                raise DataError(f"plug-in damping estimate {alpha_known:.4g} outside (0, 1)")
    kw = {"alpha_prime": alpha_known}
    if "sigma2_pooled" in cfg.estimators:
        reports.append(estimate_sigma_pooled(obs, delta=cfg.delta, level=cfg.level, series_tol=cfg.series_tol,
                                             alpha_plug_in=cfg.plug_in_alpha, **kw))
    if "quarticity" in cfg.estimators:
        q = quarticity(obs, delta=cfg.delta, **kw)
        nan = np.array([np.nan])
        reports.append(EstimationReport("quarticity", np.array([q]), nan, nan, nan, nan, cfg.level,
                                        ["sigma4"], {"n": obs.n, "m": obs.m}, {}))
    if "log_linear" in cfg.estimators:
        reports.extend(log_linear_fit(obs, delta=cfg.delta, level=cfg.level, series_tol=cfg.series_tol,
                                      alpha_plug_in=cfg.plug_in_alpha, **kw))
    return reports


def truth(cfg: RunConfig) -> dict[tuple[str, str], float]:
    p = cfg.params
    K1 = rescaling_constant_K(d=p.d, eta=1.0, alpha_prime=p.alpha_prime)
    out = {("sigma2_pooled", "sigma2"): p.sigma**2, ("quarticity", "sigma4"): p.sigma**4,
           ("alpha_prime", "alpha_prime"): p.alpha_prime,
           ("natural", "sigma0_sq"): p.sigma0_sq}
    if p.sigma0_sq > 0:
        out[("psi", "log_sigma0sq_K")] = math.log(p.sigma0_sq * K1)
    for l, k in enumerate(p.kappa):
        out[("natural", f"kappa{l + 1}")] = float(k)
        out[("psi", f"neg_kappa{l + 1}")] = -float(k)
    return out


def theoretical_variances(cfg: RunConfig) -> dict[tuple[str, str], tuple[float, float]]:
    """Limit variance of the normalized error and its normalizing rate, per component, at the truth."""
    p = cfg.params
    ups = upsilon(p.alpha_prime, cfg.series_tol)
    nm = cfg.n * cfg.m
    out: dict[tuple[str, str], tuple[float, float]] = {("sigma2_pooled", "sigma2"): (ups * p.sigma**4, nm)}
    out[("alpha_prime", "alpha_prime")] = (alpha_variance_constant(p.alpha_prime, cfg.series_tol),
                                           2 * (cfg.n // 2) * cfg.m)
    if cfg.m >= p.d + 1:
        sig_inv = np.linalg.inv(asymptotic_sigma_matrix(cfg.points, cfg.delta))
        cov_psi = ups * (1 - 2 * cfg.delta) * sig_inv
        J = np.diag([p.sigma0_sq] + [-1.0] * p.d)
        cov_nu = J @ cov_psi @ J
        names = ["log_sigma0sq_K"] + [f"neg_kappa{l + 1}" for l in range(p.d)]
        nat = ["sigma0_sq"] + [f"kappa{l + 1}" for l in range(p.d)]
        for i in range(p.d + 1):
            out[("psi", names[i])] = (float(cov_psi[i, i]), nm)
            out[("natural", nat[i])] = (float(cov_nu[i, i]), nm)
    return out


def _replication(args) -> tuple[int, list[dict[str, Any]] | None, str | None]:
    cfg, r, cache = args
    try:
        sample = simulate_one(cfg, r, cache)
        rows = []
        for rep in estimate_all(cfg, sample):
            for c, comp in enumerate(rep.components):
                rows.append({"run_id": r, "estimator": rep.name, "component": comp,
                             "value": float(rep.estimate[c]), "se": float(rep.se[c]),
                             "ci_lo": float(rep.ci_lower[c]), "ci_hi": float(rep.ci_upper[c]),
                             "seed": cfg.seed})
        return r, rows, None
    except (DataError, FullRankViolation, ValueError, FloatingPointError) as exc:
        return r, None, f"{type(exc).__name__}: {exc}"


CSV_COLUMNS = ["run_id", "estimator", "component", "value", "se", "ci_lo", "ci_hi", "seed"]


def _fmt(v: Any) -> str:
    return repr(v) if isinstance(v, float) else str(v)


@dataclass
class StudySummary:
    replications: int
    failures: dict[int, str]
    components: dict[str, dict[str, Any]]
    rows: list[dict[str, Any]]

    @property
    def complete(self) -> bool:
        return not self.failures

    def values(self, estimator: str, component: str) -> np.ndarray:
        return np.array([r["value"] for r in self.rows if r["estimator"] == estimator and r["component"] == component])


def run_mc(cfg: RunConfig, write: bool = True) -> StudySummary:
    """``cfg.replications`` independent replications; replication ``r`` uses stream ``(seed, r)``.

    Writes ``mc_results.csv`` (one row per replication, estimator and
    component) and ``mc_summary.json`` to ``cfg.output_dir``.
    """
    cache = None
    if cfg.method == "replacement":
        cache = build_cache(cfg.params, cfg.simulator, cfg.cache_dir if write else None)
    jobs = [(cfg, r, cache) for r in range(cfg.replications)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_replication, jobs, chunksize=1))
    else:
        results = [_replication(j) for j in jobs]
    results.sort(key=lambda t: t[0])
    rows = [row for _, rs, _ in results if rs for row in rs]
    failures = {r: err for r, _, err in results if err}
    comps = _summarize(cfg, rows)
    study = StudySummary(cfg.replications, failures, comps, rows)
    if write:
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        buf = io.StringIO()
        # execution-only keys stay out of the CSV so that it does not depend on the schedule
        audit = {k: v for k, v in cfg.raw.items() if k not in ("workers", "output_dir")}
        buf.write("# config: " + json.dumps(audit, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
        (cfg.output_dir / "mc_results.csv").write_text(buf.getvalue())
        payload = {"config": cfg.raw, "replications": cfg.replications, "completed": cfg.replications - len(failures),
                   "complete": study.complete, "failures": {str(k): v for k, v in failures.items()},
                   "components": comps}
        (cfg.output_dir / "mc_summary.json").write_text(json.dumps(payload, indent=1, sort_keys=True))
    return study


def _summarize(cfg: RunConfig, rows: list[dict[str, Any]]) -> dict[str, dict[str, Any]]:
    truths = truth(cfg)
    theo = theoretical_variances(cfg)
    keys = list(dict.fromkeys((r["estimator"], r["component"]) for r in rows))
    out = {}
    for key in keys:
        sel = [r for r in rows if (r["estimator"], r["component"]) == key]
        vals = np.array([r["value"] for r in sel])
        s = summary(vals)
        entry: dict[str, Any] = {"count": s.n, "mean": s.mean, "variance": s.variance, "median": s.quantile(0.5),
                                 "quantiles": {str(q): v for q, v in s.quantiles.items()}}
        if key in truths:
            t = truths[key]
            entry["truth"] = t
            entry["coverage"] = int(sum(r["ci_lo"] <= t <= r["ci_hi"] for r in sel))
            if key in theo:
                var, rate = theo[key]
                err = math.sqrt(rate) * (vals - t)
                entry["theoretical_variance"] = var
                entry["normalized_errors"] = err.tolist()
                entry["normalized_error_variance"] = float(np.var(err, ddof=1)) if err.size > 1 else None
        out[f"{key[0]}:{key[1]}"] = entry
    return out


def run_simulate(cfg: RunConfig, path: str | Path | None = None) -> Path:
    """Simulate replication 0 and write the field file (replacement fields cover the full grid)."""
    sample = simulate_one(cfg, 0)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    path = Path(path) if path else cfg.output_dir / f"field.{cfg.field_format}"
    return save_field(sample, path, cfg.field_format, extra={"config": cfg.raw})


def _check_metadata(cfg: RunConfig, sample: FieldSample) -> None:
    if sample.n != cfg.n:
        raise MetadataMismatch(f"sample has n={sample.n}, config says {cfg.n}")
    if sample.params is None:
        return
    claims, meta = cfg.params, sample.params
    for name in ("d", "nu", "eta", "alpha_prime"):
        a, b = getattr(claims, name), getattr(meta, name)
        if not np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float), rtol=0, atol=1e-12):
            raise MetadataMismatch(f"config claims {name}={a} but sample metadata has {b}")


def run_estimate(cfg: RunConfig, sample_path: str | Path, out_path: str | Path | None = None) -> Path:
    sample, header = load_field(sample_path)
    _check_metadata(cfg, sample)
    try:
        sample.at_points(cfg.points)
    except KeyError as exc:
        raise MetadataMismatch(str(exc)) from exc
    reports = estimate_all(cfg, sample)
    p = cfg.params
    payload = {
        "config": cfg.raw,
        "sample": {"path": str(sample_path), "method": header.get("method"), "seed": header.get("seed"),
                   "n": sample.n, "m": cfg.m},
        "constants": {"K": rescaling_constant_K(p), "K_eta1": rescaling_constant_K(d=p.d, eta=1.0, alpha_prime=p.alpha_prime),
                      "upsilon": upsilon(p.alpha_prime, cfg.series_tol)},
        "reports": [r.to_dict() for r in reports],
    }
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    out = Path(out_path) if out_path else cfg.output_dir / "report.json"
    out.write_text(json.dumps(payload, indent=1, sort_keys=True, default=float))
    return out


def constants_table(d: int, alpha_prime: float, eta: float = 1.0, tol: float = 1e-10,
                    params: ModelParams | None = None, y=None, Delta: float | None = None) -> dict[str, Any]:
    out: dict[str, Any] = {
        "d": d, "alpha_prime": alpha_prime, "eta": eta,
        "K": rescaling_constant_K(d=d, eta=eta, alpha_prime=alpha_prime),
        "upsilon": upsilon(alpha_prime, tol),
        "lambda": lambda_const(alpha_prime, tol),
        "alpha_variance": alpha_variance_constant(alpha_prime, tol),
        "lag1_autocorrelation": theoretical_autocorrelation(alpha_prime, 1),
    }
    if params is not None and y is not None and Delta is not None:
        out["mean_sq_increment"] = theoretical_mean_sq_increment(params, y, Delta)
    return out


# --- click commands -----------------------------------------------------------------------

def _overrides(sets: tuple[str, ...], **flags) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for item in sets:
        if "=" not in item:
            raise ConfigError(f"--set expects key.path=value, got {item!r}")
        path, value = item.split("=", 1)
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value
        node = out
        parts = path.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = parsed
    for k, v in flags.items():
        if v is not None:
            out[k] = v
    return out


def _guard(fn):
    """Run ``fn`` and translate library errors into the documented exit codes."""
    try:
        return fn()
    except (ConfigError, InteriorMarginError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except BudgetExceeded as exc:
        click.echo(f"budget refused: {exc}", err=True)
        sys.exit(EXIT_BUDGET)
    except (MetadataMismatch, CacheKeyMismatch, OffGridError) as exc:
        click.echo(f"metadata mismatch: {exc}", err=True)
        sys.exit(EXIT_METADATA)
    except (DataError, FullRankViolation) as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(EXIT_DATA)


_config_opt = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
                           help="JSON run configuration.")
_set_opt = click.option("--set", "sets", multiple=True, help="Override a config key, e.g. --set scheme.n=2000.")


@click.group()
def main() -> None:
    """Simulate multi-dimensional second-order SPDEs and estimate their parameters."""


@main.command()
@click.option("--d", type=int, default=2, show_default=True)
@click.option("--alpha-prime", type=float, required=True)
@click.option("--eta", type=float, default=1.0, show_default=True)
@click.option("--tol", type=float, default=1e-10, show_default=True)
@_config_opt
@click.option("--y", type=float, multiple=True, help="Spatial point for the theoretical moment (repeat per axis).")
@click.option("--n", type=int, default=None, help="Temporal resolution for the theoretical moment.")
def constants(d, alpha_prime, eta, tol, config_path, y, n):
    """Print K, Upsilon, Lambda and theoretical moments as JSON."""
    def go():
        params = None
        if config_path:
            params = load_config(config_path).params
        table = constants_table(d, alpha_prime, eta, tol, params, list(y) if y else None, 1.0 / n if n else None)
        click.echo(json.dumps(table, indent=1))
    _guard(go)


@main.command()
@_config_opt
@_set_opt
@click.option("--seed", type=int, default=None)
@click.option("--output-dir", type=str, default=None)
@click.option("--format", "field_format", type=click.Choice(["bin", "csv"]), default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Field file path.")
def simulate(config_path, sets, seed, output_dir, field_format, out):
    """Simulate one field and write it to disk."""
    def go():
        cfg = load_config(config_path, _overrides(sets, seed=seed, output_dir=output_dir, field_format=field_format))
        click.echo(str(run_simulate(cfg, out)))
    _guard(go)


@main.command()
@_config_opt
@_set_opt
@click.argument("sample", type=click.Path(exists=True, dir_okay=False))
@click.option("--output-dir", type=str, default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Report path.")
def estimate(config_path, sets, sample, output_dir, out):
    """Run the configured estimators on a field file and write a JSON report."""
    def go():
        cfg = load_config(config_path, _overrides(sets, output_dir=output_dir))
        click.echo(str(run_estimate(cfg, sample, out)))
    _guard(go)


@main.command()
@_config_opt
@_set_opt
@click.option("--seed", type=int, default=None)
@click.option("--replications", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--output-dir", type=str, default=None)
def mc(config_path, sets, seed, replications, workers, output_dir):
    """Monte Carlo study: per-replication CSV plus summary JSON."""
    def go():
        cfg = load_config(config_path, _overrides(sets, seed=seed, replications=replications, workers=workers,
                                                  output_dir=output_dir))
        study = run_mc(cfg)
        click.echo(f"{study.replications - len(study.failures)}/{study.replications} replications written to "
                   f"{cfg.output_dir}")
    _guard(go)


@main.group()
def cache() -> None:
    """Replacement-variance cache."""


@cache.command("build")
@_config_opt
@_set_opt
def cache_build(config_path, sets):
    """Precompute and persist the replacement variances for the configured model."""
    def go():
        cfg = load_config(config_path, _overrides(sets))
        if cfg.method != "replacement":
            raise ConfigError("cache build needs simulator.method = 'replacement'")
        c = build_cache(cfg.params, cfg.simulator, cfg.cache_dir)
        click.echo(f"{c.path} ({c.source})")
    _guard(go)


if __name__ == "__main__":
    main()
