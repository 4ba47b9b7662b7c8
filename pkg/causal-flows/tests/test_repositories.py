import json

import numpy as np
import pandas as pd
import pytest

from src.core.enums import DgmKind, EstimandKind, TruthSource
from src.core.exceptions import InputFileNotFound, ParseError
from src.flow.serialization import dump_cgnf, load_cgnf
from src.repositories.models import ModelRepository
from src.repositories.reports import ReportRepository, mce_frame, plot_frame
from src.repositories.results import ResultRepository
from src.repositories.samples import SampleRepository
from src.repositories.tables import CsvRepository
from src.schemas.bench import CoverageReport, MceReport, MceRow
from src.schemas.common import IResultRecord
from src.schemas.estimands import EstimateResult
from src.schemas.graph import Fixed, Regime
from src.schemas.sampling import SamplePlan
from src.simulate.sampler import sample_regimes
from src.train.dataset import load_csv


def mce_report() -> MceReport:
    rows = [
        MceRow(estimand="ATE_A_Y", n=n, bias=0.01, sd=sd, replications=reps, truth=0.1875,
               truth_source=TruthSource.ANALYTIC)
        for n, sd, reps in [(500, 0.05, 3), (1000, None, 1)]
    ]
    return MceReport(dgm=DgmKind.LINEAR_GAUSSIAN, seed=1, rows=rows)


class TestModelRepository:
    def test_round_trip(self, tmp_path, toy_flow):
        repo = ModelRepository()
        path = repo.save(tmp_path / "nested" / "model.json", dump_cgnf(toy_flow, data_digest="abc"))
        restored = load_cgnf(repo.load(path))

        assert repo.load(path).data_digest == "abc"
        for old, new in zip(toy_flow.parameters(), restored.parameters()):
            np.testing.assert_array_equal(old, new)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputFileNotFound):
            ModelRepository().load(tmp_path / "model.json")

    def test_not_a_model_file(self, write_text):
        with pytest.raises(ParseError):
            ModelRepository().load(write_text("model.json", '{"format_version": 1}'))


class TestResultRepository:
    def test_records_one_per_line(self, tmp_path):
        estimate = EstimateResult(
            estimand="ATE_A_Y", kind=EstimandKind.ATE, point=0.2, mc_se=0.01, sample_count=10
        )
        repo = ResultRepository()
        path = repo.save(tmp_path / "results.jsonl", [IResultRecord(data=estimate, meta={"seed": 3})] * 2)

        lines = path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 2
        assert json.loads(lines[0])["data"]["point"] == 0.2
        assert repo.load(path)[1].meta == {"seed": 3}

    def test_empty_list_writes_empty_file(self, tmp_path):
        path = ResultRepository().save(tmp_path / "results.jsonl", [])

        assert path.read_text(encoding="utf-8") == ""
        assert ResultRepository().load(path) == []

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputFileNotFound):
            ResultRepository().load_raw(tmp_path / "results.jsonl")


class TestCsvRepository:
    def test_header_lines_are_skipped_on_load(self, tmp_path):
        repo = CsvRepository({"seed": 4, "dgm": "linear_gaussian"})
        path = repo.save(tmp_path / "table.csv", pd.DataFrame({"X": [1.0, 2.5], "Y": [0.1, 0.2]}))

        text = path.read_text(encoding="utf-8")
        assert text.startswith('# seed: 4\n# dgm: "linear_gaussian"\n')
        pd.testing.assert_frame_equal(repo.load(path), pd.DataFrame({"X": [1.0, 2.5], "Y": [0.1, 0.2]}))

    def test_written_tables_load_as_data(self, tmp_path, chain_dag):
        path = CsvRepository({"seed": 4}).save(
            tmp_path / "data.csv", pd.DataFrame({"X": [0.0, 1.0, 1.0], "Y": [0.3, 0.1, 0.2]})
        )

        assert load_csv(path, chain_dag).n == 3


class TestReportRepository:
    def test_mce_frame(self):
        frame = mce_frame(mce_report())

        assert list(frame.columns) == ["estimand", "n", "bias", "sd", "replications", "truth", "truth_source"]
        assert frame["truth_source"].tolist() == ["analytic", "analytic"]

    def test_plot_frame_drops_missing_sd(self):
        long = plot_frame(mce_report())

        assert len(long) == 3
        assert set(long["metric"]) == {"bias", "sd"}

    def test_save_mce(self, tmp_path):
        report_path, plot_path = ReportRepository({"seed": 1}).save_mce(tmp_path, mce_report(), "mce_linear")

        assert report_path.name == "mce_linear.csv"
        assert plot_path.name == "mce_linear_plot.csv"
        assert len(ReportRepository().load(report_path)) == 2

    def test_save_coverage(self, tmp_path):
        report = CoverageReport(
            n=100, datasets=2, replicates=10, level=0.9, truth=0.2, covered=1, seed=1,
            intervals=[[0.1, 0.3], [0.25, 0.4]],
        )
        frame = ReportRepository().load(ReportRepository().save_coverage(tmp_path, report))

        assert frame["covers"].tolist() == [True, False]


class TestSampleRepository:
    def test_export_and_reload(self, tmp_path, toy_flow):
        plan = SamplePlan(
            regimes={"0/treated": Regime(assignments={"X": Fixed(value=1.0)}), "0/control": Regime()},
            sample_count=20,
            seed=2,
        )
        samples = sample_regimes(toy_flow, plan)
        repo = SampleRepository({"seed": 2})
        manifest = repo.export(tmp_path, samples, plan, model_digest="m", config_digest="c")

        assert manifest.files["0/treated"] == "0__treated.csv"
        assert repo.load(tmp_path).model_digest == "m"
        frame = repo.regime(tmp_path, "0/treated")
        assert list(frame.columns) == ["X", "Y"]
        np.testing.assert_allclose(frame["Y"], samples.column("0/treated", "Y"), rtol=1e-9)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(InputFileNotFound):
            SampleRepository().load(tmp_path)
