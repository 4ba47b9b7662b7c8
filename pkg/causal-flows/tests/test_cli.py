import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
import yaml
from click.testing import CliRunner

from src.cli.routes import cli
from src.core.exceptions import NonFiniteLoss
from src.schemas.bench import HyperSweepReport, MceReport


TINY_MODEL = {
    "embedding_hidden": [6, 5],
    "integrand_hidden": [6, 5],
    "embedding_width": 3,
    "quadrature_nodes": 12,
}
QUICK_TRAIN = {"batch_size": 64, "learning_rate": 0.001, "patience_epochs": 2, "max_epochs": 3}


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def project(tmp_path) -> Path:
    """Chain graph, matching data and a run file with small settings."""
    (tmp_path / "graph.txt").write_text("X -> Y\n", encoding="utf-8")
    rng = np.random.default_rng(0)
    x = rng.standard_normal(200)
    pd.DataFrame({"X": x, "Y": 0.5 * x + rng.standard_normal(200)}).to_csv(
        tmp_path / "data.csv", index=False
    )
    write_config(tmp_path, estimands=[])
    return tmp_path


def write_config(directory: Path, **overrides) -> Path:
    config = {
        "seed": 5,
        "workers": 1,
        "dag": {"path": "graph.txt"},
        "data": {"path": "data.csv"},
        "model": TINY_MODEL,
        "train": QUICK_TRAIN,
        "sampling": {"sample_count": 200},
        "output": {"directory": str(directory / "out")},
        **overrides,
    }
    path = directory / "run.yml"
    path.write_text(yaml.safe_dump(config), encoding="utf-8")
    return path


def invoke(runner: CliRunner, project: Path, *args: str):
    return runner.invoke(cli, ["--config", str(project / "run.yml"), *args])


def error_of(result) -> dict:
    return json.loads(result.stdout.strip().splitlines()[-1])["data"]


class TestSimulate:
    def test_writes_requested_rows(self, runner, tmp_path):
        result = runner.invoke(cli, ["--out", str(tmp_path), "--seed", "3", "simulate", "linear_gaussian", "-n", "1000"])

        assert result.exit_code == 0, result.output
        frame = pd.read_csv(tmp_path / "linear_gaussian_1000.csv", comment="#")
        assert list(frame.columns) == ["C", "A", "L", "M", "Y"]
        assert len(frame) == 1000

    def test_header_echoes_the_seed(self, runner, tmp_path):
        runner.invoke(cli, ["--out", str(tmp_path), "--seed", "3", "simulate", "coverage", "-n", "10"])

        assert "# seed: 3" in (tmp_path / "coverage_10.csv").read_text(encoding="utf-8")

    def test_unknown_kind_is_a_usage_error(self, runner, tmp_path):
        result = runner.invoke(cli, ["--out", str(tmp_path), "simulate", "quadratic"])

        assert result.exit_code == 2


class TestErrors:
    """Error records and exit codes"""

    def test_missing_config_file(self, runner, tmp_path):
        result = runner.invoke(cli, ["--config", str(tmp_path / "absent.yml"), "train"])

        assert result.exit_code == 2
        assert error_of(result)["error"] == "InputFileNotFound"

    def test_missing_data_file(self, runner, project):
        (project / "data.csv").unlink()
        result = invoke(runner, project, "train")

        assert result.exit_code == 2
        assert error_of(result)["error"] == "InputFileNotFound"

    def test_cyclic_graph(self, runner, project):
        (project / "graph.txt").write_text("X -> Y\nY -> X\n", encoding="utf-8")
        result = invoke(runner, project, "train")

        assert result.exit_code == 2
        assert error_of(result)["error"] == "CycleDetected"

    def test_regime_pointing_at_unknown_label(self, runner, project):
        write_config(
            project,
            sampling={
                "sample_count": 20,
                "regimes": {"b": {"assignments": {"Y": {"kind": "from_regime", "regime": "zzz"}}}},
            },
        )
        result = invoke(runner, project, "sample")

        assert result.exit_code == 2
        record = error_of(result)
        assert record["error"] == "RegimeReferenceError"
        assert record["detail"] == "regime=b,reference=zzz"

    def test_regime_pointing_forward(self, runner, project):
        invoke(runner, project, "train")
        write_config(
            project,
            sampling={
                "sample_count": 20,
                "regimes": {
                    "cross": {"assignments": {"Y": {"kind": "from_regime", "regime": "later"}}},
                    "later": {"assignments": {"X": {"kind": "fixed", "value": 1.0}}},
                },
            },
        )
        result = invoke(runner, project, "sample")

        assert result.exit_code == 2
        assert error_of(result)["error"] == "RegimeReferenceError"
        assert not (project / "out" / "samples").exists()

    def test_unknown_config_section(self, runner, project):
        write_config(project, plots={"enabled": True})
        result = invoke(runner, project, "train")

        assert result.exit_code == 2
        assert error_of(result)["error"] == "ConfigError"

    def test_estimate_without_model(self, runner, project):
        result = invoke(runner, project, "estimate")

        assert result.exit_code == 2
        assert error_of(result)["error"] == "InputFileNotFound"

    def test_numerical_errors_exit_with_one(self, runner, project, mocker):
        mocker.patch("src.cli.commands.model.train_model", side_effect=NonFiniteLoss("diverged"))
        result = invoke(runner, project, "train")

        assert result.exit_code == 1
        assert error_of(result)["exit_code"] == 1


class TestModelCommands:
    """Train, then estimate and sample from the written model"""

    def test_train_writes_model_and_history(self, runner, project):
        result = invoke(runner, project, "train")

        assert result.exit_code == 0, result.output
        assert (project / "out" / "model.json").exists()
        history = pd.read_csv(project / "out" / "history.csv", comment="#")
        assert list(history.columns) == ["epoch", "train_loss", "valid_loss"]

    def test_empty_estimand_list_gives_empty_results(self, runner, project):
        invoke(runner, project, "train")
        result = invoke(runner, project, "estimate")

        assert result.exit_code == 0, result.output
        assert (project / "out" / "results.jsonl").read_text(encoding="utf-8") == ""

    def test_estimate_records_carry_digests(self, runner, project):
        invoke(runner, project, "train")
        write_config(project, estimands=[{"kind": "ATE", "treatments": "X", "outcome": "Y"}])
        result = invoke(runner, project, "estimate")

        assert result.exit_code == 0, result.output
        lines = (project / "out" / "results.jsonl").read_text(encoding="utf-8").splitlines()
        record = json.loads(lines[0])
        assert record["data"]["estimand"] == "ATE_X_Y"
        assert record["data"]["sample_count"] == 200
        assert {"config_digest", "model_digest", "data_digest"} <= set(record["meta"])

    def test_changed_data_is_a_schema_mismatch(self, runner, project):
        invoke(runner, project, "train")
        with open(project / "data.csv", "a", encoding="utf-8") as f:
            f.write("0.5,0.25\n")
        result = invoke(runner, project, "estimate")

        assert result.exit_code == 2
        assert error_of(result)["error"] == "SchemaMismatch"

    def test_changed_graph_is_a_schema_mismatch(self, runner, project):
        invoke(runner, project, "train")
        (project / "graph.txt").write_text("X\nY\n", encoding="utf-8")
        result = invoke(runner, project, "estimate")

        assert result.exit_code == 2
        assert error_of(result)["error"] == "SchemaMismatch"

    def test_sample_exports_regimes(self, runner, project):
        invoke(runner, project, "train")
        write_config(
            project,
            sampling={
                "sample_count": 50,
                "regimes": {
                    "treated": {"assignments": {"X": {"kind": "fixed", "value": 1.0}}},
                    "observed": {},
                },
            },
        )
        result = invoke(runner, project, "sample")

        assert result.exit_code == 0, result.output
        manifest = json.loads((project / "out" / "samples" / "manifest.json").read_text())
        assert set(manifest["files"]) == {"treated", "observed"}
        treated = pd.read_csv(project / "out" / "samples" / "treated.csv", comment="#")
        assert len(treated) == 50
        assert np.allclose(treated["X"], 1.0)


class TestBenchCommands:
    def test_mce_reports_projected_fits(self, runner, tmp_path, mocker):
        run = mocker.patch(
            "src.cli.commands.bench.run_mce",
            return_value=MceReport(dgm="linear_gaussian", seed=1),
        )
        result = runner.invoke(cli, ["--out", str(tmp_path), "mce", "--sizes", "100,200"])

        assert result.exit_code == 0, result.output
        assert "Projected fits: 40" in result.stderr
        assert run.call_args.args[1] == (100, 200)
        assert (tmp_path / "mce_linear_gaussian.csv").exists()

    def test_paper_scale_replications(self, runner, tmp_path, mocker):
        mocker.patch("src.cli.commands.bench.run_mce", return_value=MceReport(dgm="discrete_non_additive", seed=1))
        result = runner.invoke(
            cli, ["--out", str(tmp_path), "--paper-scale", "mce", "--dgm", "discrete_non_additive", "--sizes", "100"]
        )

        assert "Projected fits: 400" in result.stderr

    def test_hyper_sweep_variant_choice(self, runner, tmp_path, mocker):
        sweep = mocker.patch("src.cli.commands.bench.run_hyper_sweep", return_value=HyperSweepReport(dgm="linear_gaussian"))
        result = runner.invoke(cli, ["--out", str(tmp_path), "hyper-sweep", "-n", "100", "--variant", "batch size of 512"])

        assert result.exit_code == 0, result.output
        assert [str(v) for v in sweep.call_args.args[1]] == ["batch size of 512"]

    def test_hyper_sweep_forwards_oracle_draws(self, runner, project, mocker):
        sweep = mocker.patch("src.cli.commands.bench.run_hyper_sweep", return_value=HyperSweepReport(dgm="linear_gaussian"))
        write_config(project, bench={"oracle_draws": 777})
        result = invoke(runner, project, "hyper-sweep", "-n", "100", "--variant", "default")

        assert result.exit_code == 0, result.output
        assert sweep.call_args.kwargs["oracle_draws"] == 777
