import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence

from src.core.exceptions import InputFileNotFound
from src.interfaces.repository import IRepository
from src.schemas.common import IRecordBase


logger: logging.Logger = logging.getLogger(__name__)


class ResultRepository(IRepository[List[IRecordBase[Any]]]):
    """Line-delimited JSON records, one per estimate."""

    def save(self, path: Path, item: Sequence[IRecordBase[Any]]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            for record in item:
                f.write(record.model_dump_json() + "\n")
        logger.info(f"Wrote {len(item)} record(s) to {str(path)!r}")
        return path

    def load(self, path: Path) -> List[IRecordBase[Any]]:
        return [IRecordBase[Dict[str, Any]].model_validate(raw) for raw in self.load_raw(path)]

    def load_raw(self, path: Path) -> List[Dict[str, Any]]:
        path = Path(path)
        if not self.exists(path):
            raise InputFileNotFound(f"Results file {str(path)!r} does not exist")
        lines = path.read_text(encoding="utf-8").splitlines()
        return [json.loads(line) for line in lines if line.strip()]
