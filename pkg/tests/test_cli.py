import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from mdspde.cli import ConfigError, RunConfig, load_config, main, run_mc
from mdspde.io import load_field, save_field
from mdspde.model import FieldSample, ModelParams, rescaling_constant_K, upsilon

MODEL = {"d": 2, "theta0": 0.0, "nu": [6.0, 0.0], "eta": 1.0, "sigma": 1.0, "alpha_prime": 0.4}


def base_config(tmp_path, **over):
    cfg = {
        "model": dict(MODEL),
        "scheme": {"n": 200, "spatial": {"kind": "grid", "M": 6}, "delta": 0.05},
        "simulator": {"method": "replacement", "M": 6, "L": 3, "K_v": 10},
        "estimators": ["sigma2_pooled", "log_linear", "alpha_prime", "quarticity"],
        "replications": 3,
        "seed": 17,
        "output_dir": str(tmp_path / "out"),
    }
    cfg.update(over)
    return cfg


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def test_unknown_keys_rejected(tmp_path):
    cfg = base_config(tmp_path)
    cfg["scheme"]["bogus"] = 1
    with pytest.raises(ConfigError, match="bogus"):
        RunConfig.from_dict(cfg)
    res = CliRunner().invoke(main, ["simulate", "--config", write(tmp_path, cfg)])
    assert res.exit_code == 2


def test_config_validation_before_compute(tmp_path):
    for bad in ({"estimators": ["nope"]}, {"replications": 0},
                {"simulator": {"method": "replacement", "M": 6, "L": 3, "K_v": 3}},
                {"model": dict(MODEL, alpha_prime=1.5)}):
        with pytest.raises(ConfigError):
            RunConfig.from_dict(base_config(tmp_path, **bad))
    cfg = base_config(tmp_path)
    cfg["scheme"]["n"] = 201
    with pytest.raises(ConfigError, match="even"):
        RunConfig.from_dict(cfg)


def test_flags_override_file(tmp_path):
    cfg = load_config(write(tmp_path, base_config(tmp_path)), {"seed": 99, "scheme": {"n": 100}})
    assert cfg.seed == 99 and cfg.n == 100 and cfg.m == 25


def test_s3_scheme_and_points(tmp_path):
    cfg = RunConfig.from_dict(base_config(tmp_path, scheme={"n": 100, "spatial": {"kind": "S3"}, "delta": 0.05},
                                          simulator={"method": "truncation", "cutoff": 5}))
    assert cfg.points.shape == (3, 2)
    cfg = RunConfig.from_dict(base_config(tmp_path, scheme={"n": 100, "spatial": {"kind": "points",
                                                                                  "points": [[0.5, 0.5]]}}))
    assert cfg.m == 1


def test_constants_command():
    res = CliRunner().invoke(main, ["constants", "--d", "2", "--alpha-prime", "0.5"])
    assert res.exit_code == 0, res.output
    out = json.loads(res.output)
    assert abs(out["K"] - 1 / (2 * math.sqrt(math.pi))) < 1e-14
    assert abs(out["upsilon"] - upsilon(0.5)) < 1e-15
    assert abs(out["lag1_autocorrelation"] - (math.sqrt(2) - 2) / 2) < 1e-15


def test_simulate_deterministic_and_cache_autobuild(tmp_path):
    cfg = base_config(tmp_path)
    path = write(tmp_path, cfg)
    r = CliRunner()
    a = r.invoke(main, ["simulate", "--config", path, "--out", str(tmp_path / "a.bin")])
    b = r.invoke(main, ["simulate", "--config", path, "--out", str(tmp_path / "b.bin")])
    assert a.exit_code == 0 and b.exit_code == 0, a.output
    assert (tmp_path / "a.bin").read_bytes() == (tmp_path / "b.bin").read_bytes()
    assert list((tmp_path / "out" / "cache").glob("replacement_*.json"))
    sample, header = load_field(tmp_path / "a.bin")
    assert header["extra"]["config"]["seed"] == 17
    assert sample.values.shape == (201, 49)


def test_zero_sigma_field_file(tmp_path):
    cfg = base_config(tmp_path, model=dict(MODEL, sigma=0.0), field_format="csv")
    res = CliRunner().invoke(main, ["simulate", "--config", write(tmp_path, cfg)])
    assert res.exit_code == 0, res.output
    sample, _ = load_field(tmp_path / "out" / "field.csv")
    assert np.all(sample.values == 0)


def test_field_roundtrip_formats(tmp_path):
    p = ModelParams.from_dict(MODEL)
    s = FieldSample(np.random.default_rng(0).normal(size=(5, 2)) / 3, [[0.1, 0.2], [0.5, 0.5]], p, 3, "truncation",
                    {"cutoff": 4})
    for fmt in ("bin", "csv"):
        save_field(s, tmp_path / f"f.{fmt}", fmt)
        back, _ = load_field(tmp_path / f"f.{fmt}")
        assert np.array_equal(back.values, s.values)
        assert back.params == p


def test_estimate_report_and_pipeline(tmp_path):
    cfg = base_config(tmp_path, pipeline={"plug_in_alpha": True})
    path = write(tmp_path, cfg)
    r = CliRunner()
    assert r.invoke(main, ["simulate", "--config", path]).exit_code == 0
    res = r.invoke(main, ["estimate", "--config", path, str(tmp_path / "out" / "field.bin")])
    assert res.exit_code == 0, res.output
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    names = [x["estimator"] for x in rep["reports"]]
    assert names[0] == "alpha_prime" and "sigma2_pooled" in names and "natural" in names
    sig = rep["reports"][names.index("sigma2_pooled")]
    assert sig["assumed"]["alpha_prime"]["source"] == "plug-in estimate"
    assert sig["assumed"]["alpha_prime"]["value"] == rep["reports"][0]["estimate"][0]
    assert rep["constants"]["K"] == rescaling_constant_K(ModelParams.from_dict(MODEL))
    assert "m_bound" in rep["reports"][names.index("psi")]["diagnostics"]


def test_estimate_metadata_mismatch(tmp_path):
    cfg = base_config(tmp_path)
    path = write(tmp_path, cfg)
    r = CliRunner()
    r.invoke(main, ["simulate", "--config", path])
    other = base_config(tmp_path, model=dict(MODEL, alpha_prime=0.5))
    res = r.invoke(main, ["estimate", "--config", write(tmp_path, other, "o.json"),
                          str(tmp_path / "out" / "field.bin")])
    assert res.exit_code == 4


def test_estimate_nonpositive_rv(tmp_path):
    cfg = base_config(tmp_path, estimators=["log_linear"],
                      scheme={"n": 10, "spatial": {"kind": "S3"}, "delta": 0.05},
                      simulator={"method": "truncation", "cutoff": 3})
    p = ModelParams.from_dict(MODEL)
    vals = np.ones((11, 3))
    save_field(FieldSample(vals, [[0.1, 0.3], [0.4, 0.2], [0.7, 0.5]], p), tmp_path / "flat.bin")
    res = CliRunner().invoke(main, ["estimate", "--config", write(tmp_path, cfg), str(tmp_path / "flat.bin")])
    assert res.exit_code == 5


def test_budget_exit_code(tmp_path):
    cfg = base_config(tmp_path, tolerances={"budget": 10})
    res = CliRunner().invoke(main, ["simulate", "--config", write(tmp_path, cfg)])
    assert res.exit_code == 3


def test_mc_outputs_and_worker_independence(tmp_path):
    cfg = base_config(tmp_path)
    path = write(tmp_path, cfg)
    r = CliRunner()
    a = r.invoke(main, ["mc", "--config", path, "--workers", "1", "--output-dir", str(tmp_path / "w1")])
    b = r.invoke(main, ["mc", "--config", path, "--workers", "2", "--output-dir", str(tmp_path / "w2")])
    assert a.exit_code == 0 and b.exit_code == 0, a.output + b.output
    csv1 = (tmp_path / "w1" / "mc_results.csv").read_bytes()
    assert csv1 == (tmp_path / "w2" / "mc_results.csv").read_bytes()
    lines = csv1.decode().splitlines()
    assert lines[0].startswith("# config: ")
    assert lines[1] == "run_id,estimator,component,value,se,ci_lo,ci_hi,seed"
    summ = json.loads((tmp_path / "w1" / "mc_summary.json").read_text())
    assert summ["complete"] and summ["replications"] == 3
    s2 = summ["components"]["sigma2_pooled:sigma2"]
    assert s2["count"] == 3 and len(s2["normalized_errors"]) == 3
    assert s2["theoretical_variance"] == pytest.approx(upsilon(0.4))
    assert summ["config"]["seed"] == 17


def test_mc_single_replication_variance_null(tmp_path):
    cfg = RunConfig.from_dict(base_config(tmp_path, replications=1, estimators=["sigma2_pooled"]))
    study = run_mc(cfg)
    assert study.components["sigma2_pooled:sigma2"]["variance"] is None
    summ = json.loads((cfg.output_dir / "mc_summary.json").read_text())
    assert summ["components"]["sigma2_pooled:sigma2"]["variance"] is None


def test_mc_records_failures(tmp_path):
    # a zero field has zero realized volatilities, so every log-linear fit fails
    cfg = RunConfig.from_dict(base_config(tmp_path, model=dict(MODEL, sigma=0.0), estimators=["log_linear"],
                                          replications=2))
    study = run_mc(cfg)
    assert len(study.failures) == 2 and not study.complete
    summ = json.loads((cfg.output_dir / "mc_summary.json").read_text())
    assert summ["completed"] == 0 and not summ["complete"]


def test_cache_build_command(tmp_path):
    path = write(tmp_path, base_config(tmp_path, cache_dir=str(tmp_path / "cc")))
    res = CliRunner().invoke(main, ["cache", "build", "--config", path])
    assert res.exit_code == 0, res.output
    assert list((tmp_path / "cc").glob("replacement_*.json"))
