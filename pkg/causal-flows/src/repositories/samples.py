import logging
from pathlib import Path
from typing import Any, Dict, Optional

import pandas as pd

from src.core.exceptions import InputFileNotFound
from src.interfaces.repository import IRepository
from src.repositories.tables import CsvRepository
from src.schemas.sampling import SampleManifest, SamplePlan
from src.simulate.sampler import SampleSet


logger: logging.Logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"


def _file_name(label: str) -> str:
    return label.replace("/", "__") + ".csv"


class SampleRepository(IRepository[SampleManifest]):
    """A directory holding one CSV per regime plus a JSON manifest."""

    def __init__(self, header: Optional[Dict[str, Any]] = None):
        self.tables = CsvRepository(header)

    def export(
        self,
        directory: Path,
        samples: SampleSet,
        plan: SamplePlan,
        model_digest: Optional[str] = None,
        config_digest: Optional[str] = None,
    ) -> SampleManifest:
        directory = Path(directory)
        files = {}
        for label, values in samples.regimes.items():
            frame = pd.DataFrame(values, columns=list(samples.columns))
            self.tables.save(directory / _file_name(label), frame)
            files[label] = _file_name(label)
        manifest = SampleManifest(
            plan=plan,
            columns=list(samples.columns),
            files=files,
            model_digest=model_digest,
            config_digest=config_digest,
        )
        self.save(directory, manifest)
        return manifest

    def save(self, path: Path, item: SampleManifest) -> Path:
        path = Path(path) / MANIFEST
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(item.model_dump_json(indent=1), encoding="utf-8")
        logger.info(f"Wrote sample manifest {str(path)!r}")
        return path

    def load(self, path: Path) -> SampleManifest:
        path = Path(path) / MANIFEST
        if not self.exists(path):
            raise InputFileNotFound(f"Sample manifest {str(path)!r} does not exist")
        return SampleManifest.model_validate_json(path.read_text(encoding="utf-8"))

    def regime(self, path: Path, label: str) -> pd.DataFrame:
        return self.tables.load(Path(path) / self.load(path).files[label])
