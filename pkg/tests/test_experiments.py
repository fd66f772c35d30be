import json
import math
from pathlib import Path

import jsonschema
import pytest

from fixdeg.experiments import (
    CSV_VERSION,
    ExperimentConfig,
    mann_kendall,
    run_experiment,
    to_csv,
    wilson,
)

ROOT = Path(__file__).resolve().parents[1]
SCHEMA = json.loads((ROOT / "docs" / "config_schema.json").read_text())


@pytest.mark.parametrize("name", ["balanced.json", "unbalanced.json", "roundtrip.json", "smoke.json"])
def test_shipped_configs_validate(name):
    data = json.loads((ROOT / "configs" / name).read_text())
    jsonschema.validate(data, SCHEMA)
    assert ExperimentConfig.load(ROOT / "configs" / name)


def test_schema_rejects_unknown_key():
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate({"scenario": "balanced_hamiltonicity", "n": [10], "bogus": 1}, SCHEMA)
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"scenario": "balanced_hamiltonicity", "n": [10], "bogus": 1})


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(scenario="nope", n=[10])
    with pytest.raises(ValueError):
        ExperimentConfig(scenario="rerandomize_roundtrip", profile={4: 1.0}, n=[20], rho=0.01, sigma=0.02)
    with pytest.raises(ValueError):
        ExperimentConfig(scenario="unbalanced_counterexample", n=[20])
    with pytest.raises(ValueError):
        ExperimentConfig(scenario="balanced_hamiltonicity", profile={4: 1.0}, n=[20], trials=0)


def test_wilson_and_trend_helpers():
    lo, hi = wilson(10, 10)
    assert lo < 1 and hi == pytest.approx(1.0)
    lo, hi = wilson(0, 10)
    assert lo == pytest.approx(0.0, abs=1e-12) and hi > 0
    tau, p = mann_kendall([1.0, 0.9, 0.8, 0.5, 0.3, 0.2, 0.0])
    assert tau == pytest.approx(-1.0) and p < 0.01
    tau, p = mann_kendall([0.0, 0.2, 0.4, 0.6, 0.8])
    assert tau == pytest.approx(1.0) and p > 0.9


def test_csv_formatting():
    text = to_csv(["a", "b", "c"], [{"a": True, "b": math.nan, "c": None}, {"a": 1, "b": 0.5}])
    assert text.splitlines() == ["a,b,c", "1,nan,", "1,0.5,"]


def _small(scenario, **kw):
    base = {"balanced_hamiltonicity": dict(profile={4: 0.5, 7: 0.5}, n=[30]),
            "unbalanced_counterexample": dict(n=[40], D_values=[4, 12]),
            "rerandomize_roundtrip": dict(profile={4: 0.6, 8: 0.4}, n=[40], rho=0.05, sigma=0.02)}[scenario]
    return ExperimentConfig(scenario=scenario, trials=3, seed=5, **base, **kw)


@pytest.mark.parametrize("scenario", ["balanced_hamiltonicity", "unbalanced_counterexample", "rerandomize_roundtrip"])
def test_scenarios_write_outputs(scenario, tmp_path):
    res = run_experiment(_small(scenario))
    assert len(res.rows) == 3 * (2 if scenario == "unbalanced_counterexample" else 1)
    paths = res.write(tmp_path)
    names = {p.name for p in paths}
    assert f"{scenario}.csv" in names and f"{scenario}_meta.json" in names
    header = (tmp_path / f"{scenario}.csv").read_text().splitlines()[0].split(",")
    assert header == res.columns
    meta = json.loads((tmp_path / f"{scenario}_meta.json").read_text())
    assert meta["csv_version"] == CSV_VERSION and meta["config"]["seed"] == 5
    if res.trend is not None:
        trend = json.loads((tmp_path / f"{scenario}_trend.json").read_text())
        assert set(trend["40"]) >= {"D", "hamiltonian_rate", "mk_tau", "mk_p"}


def test_seeded_and_thread_independent(tmp_path):
    cfg = _small("balanced_hamiltonicity")
    a = run_experiment(cfg, threads=1)
    b = run_experiment(cfg, threads=2)
    assert a.csv() == b.csv() and a.summary_csv() == b.summary_csv()
    c = run_experiment(_small("balanced_hamiltonicity", out=None), threads=1)
    assert c.csv() == a.csv()
