import json
import math
import os

import numpy as np
import pandas as pd
import pytest
from typer.testing import CliRunner

from tincell.cli import app
from tincell.models.config import RunConfig
from tincell.models.simulation import TrialOutcomes
from tincell.services import sweep

runner = CliRunner()


@pytest.fixture(autouse=True)
def isolated_env(monkeypatch, tmp_path):
    monkeypatch.chdir(tmp_path)
    for key in list(os.environ):
        if key.startswith("TINCELL_"):
            monkeypatch.delenv(key)


def test_help_lists_commands():
    result = runner.invoke(app, ["--help"])
    assert result.exit_code == 0
    for command in ("ptin", "coverage", "rate", "optimize-mu", "compare", "distances"):
        assert command in result.output


def test_ptin_sweep_to_csv(tmp_path):
    out = tmp_path / "ptin.csv"
    args = ["--quiet", "ptin", "--axis", "mu", "--values", "1,1.5,2", "--out", str(out)]
    result = runner.invoke(app, args)
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(out, comment="#")
    assert frame["mu"].tolist() == [1.0, 1.5, 2.0]
    assert frame["value"].iloc[-1] == 1.0
    manifest = json.loads((tmp_path / "ptin.csv.manifest.json").read_text())
    assert manifest["command"] == "ptin"
    assert manifest["sweep_values"] == [1.0, 1.5, 2.0]
    assert "lambda_b" in manifest["defaults"]
    assert "ptin.csv" in manifest["artifacts"]


def test_ptin_to_json(tmp_path):
    out = tmp_path / "ptin.json"
    result = runner.invoke(app, ["ptin", "--out", str(out), "--format", "json"])
    assert result.exit_code == 0, result.output
    payload = json.loads(out.read_text())
    assert payload["rows"][0]["metric"] == "prob_tin"


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_tables_do_not_depend_on_worker_count(tmp_path, fmt):
    tables = []
    for workers in (1, 2):
        out = tmp_path / f"w{workers}.{fmt}"
        args = ["--quiet", "ptin", "--axis", "mu", "--values", "1.5,1.8"]
        args += ["--workers", str(workers), "--out", str(out), "--format", fmt]
        result = runner.invoke(app, args)
        assert result.exit_code == 0, result.output
        tables.append(out.read_bytes())
    assert tables[0] == tables[1]
    sidecar = json.loads((tmp_path / f"w2.{fmt}.manifest.json").read_text())
    assert sidecar["config"]["workers"] == 2


def test_config_file_and_environment(tmp_path):
    config = tmp_path / "run.toml"
    config.write_text("mu = 1.6\n")
    out = tmp_path / "ptin.csv"
    result = runner.invoke(
        app,
        ["ptin", "--config", str(config), "--out", str(out)],
        env={"TINCELL_LAMBDA_B": "10"},
    )
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(out, comment="#")
    assert frame["mu"].iloc[0] == 1.6
    assert frame["lambda_b"].iloc[0] == 10.0


def test_optimize_mu_prints_a_table():
    result = runner.invoke(app, ["optimize-mu", "--axis", "theta_db", "--values", "10"])
    assert result.exit_code == 0, result.output
    assert "mu_star" in result.output
    assert "r_statistic" in result.output


@pytest.mark.parametrize(
    "args, message",
    [
        (["ptin", "--format", "xml"], "--format"),
        (["ptin", "--engines", "magic"], "unknown engine"),
        (["ptin", "--axis", "mu", "--values", "1.5,2.5"], "Error"),
        (["ptin", "--axis", "mu", "--values", "2,1"], "sorted"),
        (["ptin", "--values", "a,b"], "comma-separated"),
        (["ptin", "--config", "missing.toml"], "not found"),
    ],
)
def test_bad_input_exits_nonzero(args, message):
    result = runner.invoke(app, args)
    assert result.exit_code == 1
    assert message in result.output


def test_config_errors_name_the_field(tmp_path):
    config = tmp_path / "run.toml"
    config.write_text("m_factor = 0.5\n")
    result = runner.invoke(app, ["ptin", "--config", str(config)])
    assert result.exit_code == 1
    assert "m_factor" in result.output


def test_rate_bits_scale(mocker):
    point = mocker.patch("tincell.services.sweep.rate_point", return_value=[])
    result = runner.invoke(app, ["--quiet", "rate", "--bits"])
    assert result.exit_code == 0, result.output
    assert point.call_args.kwargs["scale"] == pytest.approx(1 / math.log(2))


def test_compare_reports_gains(mocker):
    row = {
        **sweep.params(RunConfig()),
        "engine": "simulation",
        "policy": "tin-exact",
        "metric": "coverage",
        "mu_used": 1.7,
        "baseline": 0.3,
        "treatment": 0.5,
        "relative_gain": 2 / 3,
    }
    point = mocker.patch("tincell.services.sweep.compare_point", return_value=[row])
    result = runner.invoke(
        app, ["compare", "--metric", "coverage", "--optimize-mu", "--trials", "100"]
    )
    assert result.exit_code == 0, result.output
    assert point.call_args.kwargs["metrics"] == ("coverage",)
    assert point.call_args.kwargs["optimize"] is True
    assert point.call_args.args[0].trials == 100
    assert "Gain over classical" in result.output
    assert "+66.7%" in result.output


def test_compare_rejects_unknown_metric():
    result = runner.invoke(app, ["compare", "--metric", "energy"])
    assert result.exit_code == 1


def test_engine_errors_exit_nonzero(mocker):
    from tincell.errors import ConvergenceError

    mocker.patch(
        "tincell.services.sweep.coverage_point",
        side_effect=ConvergenceError("quadrature failed", 0.5, 1e-3),
    )
    result = runner.invoke(app, ["coverage"])
    assert result.exit_code == 1
    assert "ConvergenceError" in result.output


def test_distances_with_dump(tmp_path, mocker):
    rng = np.random.default_rng(1)
    x11 = rng.rayleigh(0.2, 100)
    outcomes = TrialOutcomes(
        active=np.ones(100, dtype=bool),
        sinr=np.full(100, 2.0),
        triples=np.column_stack([x11, x11 + 0.05, x11 + 0.1]),
    )
    mocker.patch("tincell.services.simulator.run_trials", return_value=outcomes)
    out, dump = tmp_path / "cdf.csv", tmp_path / "trials.csv"
    result = runner.invoke(
        app,
        ["distances", "--grid-points", "20", "--dump", str(dump), "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    assert len(pd.read_csv(out, comment="#")) == 20
    assert len(pd.read_csv(dump)) == 100
    manifest = json.loads((tmp_path / "cdf.csv.manifest.json").read_text())
    assert set(manifest["artifacts"]) == {"cdf.csv", "trials.csv"}
