import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import pandas as pd

from src.repositories.tables import CsvRepository
from src.schemas.bench import CoverageReport, MceReport


logger: logging.Logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["estimand", "n", "bias", "sd", "replications", "truth", "truth_source"]


def mce_frame(report: MceReport) -> pd.DataFrame:
    rows = [
        {
            "estimand": r.estimand,
            "n": r.n,
            "bias": r.bias,
            "sd": r.sd,
            "replications": r.replications,
            "truth": r.truth,
            "truth_source": str(r.truth_source),
        }
        for r in report.rows
    ]
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)


def plot_frame(report: MceReport) -> pd.DataFrame:
    """Long format (n, estimand, metric, value) for external plotting."""
    long = mce_frame(report).melt(
        id_vars=["n", "estimand"], value_vars=["bias", "sd"], var_name="metric"
    )
    return long.dropna(subset=["value"]).sort_values(["metric", "estimand", "n"])


class ReportRepository:
    """Writes bench reports as CSV tables with a run header."""

    def __init__(self, header: Optional[Dict[str, Any]] = None):
        self.tables = CsvRepository(header)

    def save_mce(self, directory: Path, report: MceReport, stem: str = "mce") -> Tuple[Path, Path]:
        directory = Path(directory)
        report_path = self.tables.save(directory / f"{stem}.csv", mce_frame(report))
        plot_path = self.tables.save(directory / f"{stem}_plot.csv", plot_frame(report))
        return report_path, plot_path

    def save_coverage(self, directory: Path, report: CoverageReport) -> Path:
        frame = pd.DataFrame(
            {
                "dataset": range(len(report.intervals)),
                "ci_low": [lo for lo, _ in report.intervals],
                "ci_high": [hi for _, hi in report.intervals],
            }
        )
        frame["covers"] = (frame["ci_low"] <= report.truth) & (report.truth <= frame["ci_high"])
        path = self.tables.save(Path(directory) / "coverage.csv", frame)
        logger.info(f"Coverage {report.covered}/{report.datasets - report.failures} written")
        return path

    def load(self, path: Path) -> pd.DataFrame:
        return self.tables.load(path)
