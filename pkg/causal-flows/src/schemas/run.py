import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml  # type: ignore
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.core.config import settings
from src.core.enums import DagFormat, DgmKind, HyperVariant
from src.core.exceptions import ConfigError, InputFileNotFound
from src.schemas.estimands import EstimandSpec, RhoGrid
from src.schemas.graph import Regime, VariableSpec, check_regime_references
from src.schemas.train import ArchitectureConfig, TrainConfig


logger: logging.Logger = logging.getLogger(__name__)


class DagSection(BaseModel):
    path: Path
    format: DagFormat = DagFormat.EDGE_LIST


class DataSection(BaseModel):
    path: Path
    variables: List[VariableSpec] = Field(
        default_factory=list, description="Kind/support overrides for inferred columns"
    )


class SamplingSection(BaseModel):
    sample_count: int = Field(default_factory=lambda: settings.DEFAULT_SAMPLE_COUNT, ge=1)
    regimes: Dict[str, Regime] = Field(default_factory=dict)

    @model_validator(mode="after")
    def check_references(self) -> "SamplingSection":
        check_regime_references(self.regimes)
        return self


class BootstrapSection(BaseModel):
    replicates: int = Field(default=200, ge=2)
    level: float = Field(default=0.90, gt=0, le=1)


class BenchSection(BaseModel):
    dgm: DgmKind = DgmKind.LINEAR_GAUSSIAN
    sample_sizes: Tuple[int, ...] = (1000, 2000, 4000, 8000, 16000)
    replications: Optional[int] = Field(default=None, ge=1)
    estimands: Optional[List[str]] = None
    oracle_draws: Optional[int] = Field(default=None, ge=1)
    coverage_datasets: int = Field(default=50, ge=1)
    coverage_n: int = Field(default=2000, ge=1)
    variants: List[HyperVariant] = Field(default_factory=lambda: list(HyperVariant))


class OutputSection(BaseModel):
    directory: Path = Path("out")


class RunConfig(BaseModel):
    """
    One YAML run file: where the graph and data live, how to train, what to
    estimate and where to write. CLI flags override ``seed``, ``workers`` and
    ``output.directory``.
    """

    model_config = ConfigDict(extra="forbid")

    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED)
    workers: Optional[int] = Field(default=None, ge=1)
    dag: Optional[DagSection] = None
    data: Optional[DataSection] = None
    model: ArchitectureConfig = Field(default_factory=ArchitectureConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    estimands: List[EstimandSpec] = Field(default_factory=list)
    sampling: SamplingSection = Field(default_factory=SamplingSection)
    bootstrap: BootstrapSection = Field(default_factory=BootstrapSection)
    sensitivity: List[RhoGrid] = Field(default_factory=list)
    bench: BenchSection = Field(default_factory=BenchSection)
    output: OutputSection = Field(default_factory=OutputSection)

    def require_dag(self) -> DagSection:
        if self.dag is None:
            raise ConfigError("The run configuration has no 'dag' section")
        if not self.dag.path.exists():
            raise InputFileNotFound(f"DAG file {str(self.dag.path)!r} does not exist")
        return self.dag

    def require_data(self) -> DataSection:
        if self.data is None:
            raise ConfigError("The run configuration has no 'data' section")
        if not self.data.path.exists():
            raise InputFileNotFound(f"Data file {str(self.data.path)!r} does not exist")
        return self.data

    def echo(self) -> Dict[str, Any]:
        """JSON-compatible copy embedded in every output."""
        return self.model_dump(mode="json")


def _resolve(section: Optional[Dict[str, Any]], base: Path) -> None:
    if section and "path" in section and not Path(section["path"]).is_absolute():
        section["path"] = str(base / section["path"])


def load_run_config(path: Optional[Path]) -> RunConfig:
    """
    Read a YAML run file; relative paths are taken from the file's directory.
    No path yields the defaults.

    Raises:
        InputFileNotFound, ConfigError
    """
    if path is None:
        return RunConfig()
    path = Path(path)
    if not path.exists():
        raise InputFileNotFound(f"Config file {str(path)!r} does not exist")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"Config file {str(path)!r} is not valid YAML", detail=str(exc))
    if not isinstance(raw, dict):
        raise ConfigError(f"Config file {str(path)!r} must hold a mapping")
    for key in ("dag", "data"):
        _resolve(raw.get(key), path.parent)
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(f"Invalid run configuration in {str(path)!r}", detail=str(exc))
